#include "swarm/examination.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

void ExaminationTable::set(int position, int last_clicked, double probability) {
    if (position < 1 || last_clicked < 0 || last_clicked >= position) {
        throw Error(Errc::configuration,
                    "examination entry (" + std::to_string(position) + ", " +
                        std::to_string(last_clicked) + ") needs 0 <= last_clicked < position");
    }
    if (!(probability > 0.0 && probability <= 1.0)) {
        throw Error(Errc::configuration, "examination probability must be in (0, 1]");
    }
    p_exam_[{position, last_clicked}] = probability;
}

std::optional<double> ExaminationTable::find(int position, int last_clicked) const {
    auto it = p_exam_.find({position, last_clicked});
    if (it == p_exam_.end()) return std::nullopt;
    return it->second;
}

double ExaminationTable::at(int position, int last_clicked) const {
    if (auto p = find(position, last_clicked)) return *p;
    throw Error(Errc::configuration, "no examination probability for position " +
                                         std::to_string(position) + " after last click " +
                                         std::to_string(last_clicked));
}

int ExaminationTable::max_position() const noexcept {
    return p_exam_.empty() ? 0 : p_exam_.rbegin()->first.first;
}

ExaminationTable ExaminationTable::parse(std::istream& in) {
    ExaminationTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3) throw ParseError(line_no, "expected 3 tab-separated fields");
        try {
            table.set(detail::parse_int(fields[0]), detail::parse_int(fields[1]),
                      detail::parse_double(fields[2]));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed number");
        }
    }
    return table;
}

ExaminationTable ExaminationTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read examination table " + path.string());
    return parse(in);
}

void ExaminationTable::save(std::ostream& out) const {
    for (const auto& [key, p] : p_exam_) {
        out << key.first << '\t' << key.second << '\t' << detail::format_double(p) << '\n';
    }
}

ExaminationTable ExaminationTable::single_browsing_approximation(int max_position) {
    // First page without a prior click; p(4, 0) = 0.82 is the one published anchor.
    constexpr std::array<double, 10> first_page = {1.00, 0.95, 0.88, 0.82, 0.76,
                                                   0.70, 0.65, 0.60, 0.56, 0.52};
    constexpr double floor = 0.05;
    auto round6 = [](double x) { return std::round(x * 1e6) / 1e6; };

    ExaminationTable table;
    for (int position = 1; position <= max_position; ++position) {
        double no_click = position <= 10
                              ? first_page[static_cast<std::size_t>(position - 1)]
                              : std::max(floor, 0.52 * std::pow(0.93, position - 10));
        table.set(position, 0, round6(no_click));
        for (int last = 1; last < position; ++last) {
            // Users who clicked keep scanning; decays with distance from the click.
            double after_click = std::max(floor, 0.98 * std::pow(0.985, position - last - 1));
            table.set(position, last, round6(after_click));
        }
    }
    return table;
}

}  // namespace swarm
