#include "swarm/analytics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

double cosine_similarity(std::span<const std::string> queries_a,
                         std::span<const std::string> queries_b) {
    auto term_counts = [](std::span<const std::string> queries) {
        std::map<std::string, double> tf;
        for (const auto& q : queries) {
            for (auto& token : tokenize(q)) tf[token] += 1.0;
        }
        return tf;
    };
    auto a = term_counts(queries_a);
    auto b = term_counts(queries_b);
    if (a.empty() || b.empty()) {
        throw Error(Errc::undefined_similarity, "cosine similarity of an empty query list");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (const auto& [term, count] : a) {
        norm_a += count * count;
        if (auto it = b.find(term); it != b.end()) dot += count * it->second;
    }
    for (const auto& [_, count] : b) norm_b += count * count;
    return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), 0.0, 1.0);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(Errc::invalid_argument, "pearson_r needs equal lengths");
    if (xs.size() < 3) throw Error(Errc::no_data, "pearson_r needs at least 3 pairs");
    const auto n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x, dy = ys[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(Errc::undefined_correlation, "correlation undefined for zero variance");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) throw Error(Errc::no_data, "significance needs at least 3 pairs");
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Significance pearson_significance(double r, std::size_t n) {
    const double p = pearson_p_value(r, n);
    if (p < 0.05) return Significance::at_5_percent;
    if (p < 0.10) return Significance::at_10_percent;
    return Significance::none;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

bool parse_bool(const std::string& text, std::size_t line_no) {
    auto t = normalize_query(text);
    if (t == "1" || t == "true" || t == "yes" || t == "trivial") return true;
    if (t == "0" || t == "false" || t == "no" || t == "non-trivial") return false;
    throw ParseError(line_no, "expected a boolean, got '" + text + "'");
}

}  // namespace

std::vector<ExperimentRecord> read_experiment_csv(std::istream& in) {
    std::vector<ExperimentRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("order", 0) == 0) continue;
        auto f = split_csv_row(line);
        if (f.size() != 6) throw ParseError(line_no, "expected 6 comma-separated fields");
        ExperimentRecord r;
        try {
            r.participant_order = static_cast<int>(detail::parse_int(f[0]));
            r.time_seconds = detail::parse_double(f[4]);
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        r.group = normalize_query(f[1]);
        if (r.group != "control" && r.group != "experimental") {
            throw ParseError(line_no, "group must be control or experimental");
        }
        if (r.participant_order < 1) throw ParseError(line_no, "order must be >= 1");
        if (!(r.time_seconds > 0.0)) throw ParseError(line_no, "seconds must be positive");
        r.task_id = f[2];
        r.trivial = parse_bool(f[3], line_no);
        for (auto& q : split(f[5], '|')) {
            if (!normalize_query(q).empty()) r.queries.push_back(q);
        }
        records.push_back(std::move(r));
    }
    return records;
}

ExperimentReport analyze_experiment(std::span<const ExperimentRecord> records) {
    ExperimentReport report;
    const std::vector<std::string> groups = {"control", "experimental"};

    std::set<std::tuple<std::string, std::string, int>> seen;
    for (const auto& r : records) {
        if (!seen.emplace(r.group, r.task_id, r.participant_order).second) {
            throw Error(Errc::invalid_argument, "participant " + std::to_string(r.participant_order) + " of group " +
                                                    r.group + " appears twice for task " + r.task_id);
        }
    }

    for (const auto& group : groups) {
        std::set<int> participants;
        for (const auto& r : records) {
            if (r.group == group) participants.insert(r.participant_order);
        }
        if (participants.size() < 3) {
            throw Error(Errc::no_data, "group '" + group + "' has fewer than 3 participants");
        }
        for (bool trivial : {true, false}) {
            std::map<int, std::pair<double, int>> per_participant;  // total seconds, task count
            for (const auto& r : records) {
                if (r.group != group || r.trivial != trivial) continue;
                auto& p = per_participant[r.participant_order];
                p.first += r.time_seconds;
                ++p.second;
            }
            for (const std::string measure : {"total", "average"}) {
                CorrelationCell cell{group, trivial, measure, per_participant.size(), {}, {}};
                std::vector<double> order, time;
                for (const auto& [o, p] : per_participant) {
                    order.push_back(o);
                    time.push_back(measure == "total" ? p.first : p.first / p.second);
                }
                if (order.size() >= 3) {
                    try {
                        cell.r = pearson_r(order, time);
                        cell.significance = pearson_significance(*cell.r, order.size());
                    } catch (const Error& e) {
                        if (e.code() != Errc::undefined_correlation) throw;
                    }
                }
                report.correlations.push_back(std::move(cell));
            }
        }
    }

    std::set<std::string> tasks;
    for (const auto& r : records) tasks.insert(r.task_id);
    for (const auto& task : tasks) {
        std::vector<const ExperimentRecord*> control, experimental;
        for (const auto& r : records) {
            if (r.task_id != task || r.queries.empty()) continue;
            (r.group == "control" ? control : experimental).push_back(&r);
        }
        auto mean_similarity = [&](const std::string& label, auto const& left, auto const& right,
                                   bool same) {
            SimilarityCell cell{task, label, 0.0, 0.0, 0};
            for (std::size_t i = 0; i < left.size(); ++i) {
                for (std::size_t j = same ? i + 1 : 0; j < right.size(); ++j) {
                    std::vector<std::string> first_a{left[i]->queries.front()};
                    std::vector<std::string> first_b{right[j]->queries.front()};
                    cell.first_query += cosine_similarity(first_a, first_b);
                    cell.all_queries += cosine_similarity(left[i]->queries, right[j]->queries);
                    ++cell.pairs;
                }
            }
            if (cell.pairs > 0) {
                cell.first_query /= static_cast<double>(cell.pairs);
                cell.all_queries /= static_cast<double>(cell.pairs);
            }
            report.similarities.push_back(cell);
        };
        mean_similarity("control", control, control, true);
        mean_similarity("experimental", experimental, experimental, true);
        mean_similarity("cross", control, experimental, false);
    }
    return report;
}

void write_experiment_report(std::ostream& out, const ExperimentReport& report) {
    auto flag = [](Significance s) {
        switch (s) {
            case Significance::at_5_percent: return "5%";
            case Significance::at_10_percent: return "10%";
            case Significance::none: return "-";
        }
        return "-";
    };
    out << "# correlation of participation order and time\n";
    out << "group\ttasks\tmeasure\tparticipants\tpearson_r\tsignificance\n";
    for (const auto& c : report.correlations) {
        out << c.group << '\t' << (c.trivial ? "trivial" : "non_trivial") << '\t' << c.measure
            << '\t' << c.participants << '\t'
            << (c.r ? detail::format_fixed(*c.r, 6) : std::string("undefined")) << '\t'
            << flag(c.significance) << '\n';
    }
    out << "# mean cosine similarity of queries per task\n";
    out << "task\tcomparison\tpairs\tfirst_query\tall_queries\n";
    for (const auto& s : report.similarities) {
        out << s.task_id << '\t' << s.comparison << '\t' << s.pairs << '\t'
            << detail::format_fixed(s.first_query, 6) << '\t'
            << detail::format_fixed(s.all_queries, 6) << '\n';
    }
}

}  // namespace swarm
