#include "swarm/querylog.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

struct Civil {
    long long year;
    unsigned month;
    unsigned day;
};

constexpr Civil civil_from_days(long long z) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

bool is_leap(long long y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(long long y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : lengths[m - 1];
}

int digits(std::string_view text, std::size_t pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return -1;
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

long long parse_day(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(Errc::parse, "malformed date '" + std::string(text) + "'");
    }
    int y = digits(text, 0, 4), m = digits(text, 5, 2), d = digits(text, 8, 2);
    if (y < 0 || m < 1 || m > 12 || d < 1 ||
        d > static_cast<int>(days_in_month(y, static_cast<unsigned>(m)))) {
        throw Error(Errc::parse, "malformed date '" + std::string(text) + "'");
    }
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string pad2(unsigned v) {
    return v < 10 ? "0" + std::to_string(v) : std::to_string(v);
}

bool looks_like_date(std::string_view s) {
    return s.size() == 10 && s[4] == '-' && s[7] == '-';
}

}  // namespace

Timestamp parse_date(std::string_view text) { return parse_day(text) * 86400; }

Timestamp parse_timestamp(std::string_view text) {
    if (text.size() != 19 || text[10] != ' ' || text[13] != ':' || text[16] != ':') {
        throw Error(Errc::parse, "malformed timestamp '" + std::string(text) + "'");
    }
    long long day = parse_day(text.substr(0, 10));
    int hh = digits(text, 11, 2), mm = digits(text, 14, 2), ss = digits(text, 17, 2);
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) {
        throw Error(Errc::parse, "malformed timestamp '" + std::string(text) + "'");
    }
    return day * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(Timestamp ts) {
    long long days = ts >= 0 ? ts / 86400 : (ts - 86399) / 86400;
    long long secs = ts - days * 86400;
    auto c = civil_from_days(days);
    std::string year = std::to_string(c.year);
    while (year.size() < 4) year.insert(year.begin(), '0');
    return year + "-" + pad2(c.month) + "-" + pad2(c.day) + " " +
           pad2(static_cast<unsigned>(secs / 3600)) + ":" +
           pad2(static_cast<unsigned>(secs % 3600 / 60)) + ":" +
           pad2(static_cast<unsigned>(secs % 60));
}

std::optional<Interaction> parse_log_line(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = split(line, '\t');
    // Some exports put the date and the time in separate columns.
    if (fields.size() >= 4 && looks_like_date(fields[2]) && fields[3].size() == 8 &&
        fields[3][2] == ':') {
        fields[2] += " " + fields[3];
        fields.erase(fields.begin() + 3);
    }
    if (fields.size() < 3) throw ParseError(line_no, "expected at least 3 tab-separated fields");

    Interaction row;
    row.user_id = fields[0];
    row.query = fields[1];
    if (normalize_query(row.query).empty()) return std::nullopt;
    try {
        row.timestamp = parse_timestamp(fields[2]);
    } catch (const Error& e) {
        throw ParseError(line_no, e.what());
    }
    if (fields.size() >= 4 && !fields[3].empty()) {
        try {
            auto rank = detail::parse_int(fields[3]);
            if (rank < 0 || rank > 1'000'000) throw Error(Errc::parse, "rank out of range");
            row.rank = static_cast<int>(rank);
        } catch (const Error&) {
            throw ParseError(line_no, "non-integer rank '" + fields[3] + "'");
        }
    }
    if (row.rank > 0) {
        if (fields.size() < 5 || fields[4].empty()) {
            throw ParseError(line_no, "clicked rank without a url");
        }
        row.url = DocRef(fields[4]);
    }
    return row;
}

namespace {

template <typename NextLine>
std::vector<Interaction> read_rows(NextLine next_line, LogReadStats* stats) {
    LogReadStats local;
    std::vector<Interaction> rows;
    std::string line;
    std::size_t line_no = 0;
    while (next_line(line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line == aol_header) continue;
        if (line.empty()) continue;
        ++local.rows;
        if (auto row = parse_log_line(line, line_no)) {
            rows.push_back(std::move(*row));
        } else {
            ++local.skipped;
        }
    }
    if (stats) *stats = local;
    return rows;
}

}  // namespace

std::vector<Interaction> read_log(std::istream& in, LogReadStats* stats) {
    return read_rows([&](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
                     stats);
}

std::vector<Interaction> read_log_file(const std::filesystem::path& path, LogReadStats* stats) {
    // gzread passes uncompressed files through unchanged.
    std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
    if (!file) throw Error(Errc::io, "cannot read log " + path.string());
    char buf[1 << 14];
    auto next_line = [&](std::string& line) {
        line.clear();
        while (gzgets(file.get(), buf, sizeof buf) != nullptr) {
            line.append(buf);
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                return true;
            }
        }
        int err = 0;
        gzerror(file.get(), &err);
        if (err != Z_OK && err != Z_STREAM_END) {
            throw Error(Errc::io, "corrupt compressed log " + path.string());
        }
        return !line.empty();
    };
    return read_rows(next_line, stats);
}

std::size_t remove_consecutive_duplicates(std::vector<Interaction>& rows) {
    auto end = std::unique(rows.begin(), rows.end());
    auto removed = static_cast<std::size_t>(rows.end() - end);
    rows.erase(end, rows.end());
    return removed;
}

std::vector<Session> sessionize(std::vector<Interaction> interactions, Timestamp threshold) {
    auto order_key = [](const Interaction& r) {
        return std::tie(r.user_id, r.query, r.timestamp, r.rank);
    };
    std::stable_sort(interactions.begin(), interactions.end(),
                     [&](const Interaction& a, const Interaction& b) {
                         if (order_key(a) != order_key(b)) return order_key(a) < order_key(b);
                         return a.url < b.url;
                     });

    std::vector<Session> sessions;
    const Interaction* previous = nullptr;
    for (const auto& row : interactions) {
        bool same_group = previous && previous->user_id == row.user_id &&
                          previous->query == row.query &&
                          row.timestamp - previous->timestamp < threshold;
        if (!same_group) sessions.push_back({row.user_id, row.query, row.timestamp, {}});
        if (row.rank > 0 && row.url) sessions.back().clicks.push_back({row.rank, *row.url});
        previous = &row;
    }
    std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        return std::tie(a.start_time, a.user_id, a.query) <
               std::tie(b.start_time, b.user_id, b.query);
    });
    return sessions;
}

int span_days(std::span<const Session> sessions) {
    if (sessions.empty()) return 0;
    auto [lo, hi] = std::minmax_element(
        sessions.begin(), sessions.end(),
        [](const Session& a, const Session& b) { return a.start_time < b.start_time; });
    auto day = [](Timestamp t) { return t >= 0 ? t / 86400 : (t - 86399) / 86400; };
    return static_cast<int>(day(hi->start_time) - day(lo->start_time) + 1);
}

DatasetSubset filter_dataset(std::span<const Session> sessions, int span, int page_size) {
    if (span < 1) throw Error(Errc::invalid_argument, "span_days must be >= 1");
    struct Counts {
        long total = 0;
        long first_page_only = 0;
        long beyond_first_page = 0;
    };
    std::map<QueryKey, Counts> per_query;
    for (const auto& s : sessions) {
        auto& c = per_query[QueryKey(s.query)];
        ++c.total;
        if (s.clicks.empty()) continue;
        bool beyond = std::any_of(s.clicks.begin(), s.clicks.end(),
                                  [&](const Click& k) { return k.rank > page_size; });
        ++(beyond ? c.beyond_first_page : c.first_page_only);
    }
    DatasetSubset subset;
    for (const auto& [query, c] : per_query) {
        if (c.total >= span) subset.frequent.insert(query);
        if (2 * c.first_page_only > c.total) subset.easy.insert(query);
        if (2 * c.beyond_first_page > c.total) subset.difficult.insert(query);
    }
    subset.all = subset.frequent;
    subset.all.insert(subset.easy.begin(), subset.easy.end());
    subset.all.insert(subset.difficult.begin(), subset.difficult.end());
    return subset;
}

std::pair<std::vector<Session>, std::vector<Session>> partition(std::span<const Session> sessions,
                                                                Timestamp split) {
    std::pair<std::vector<Session>, std::vector<Session>> out;
    for (const auto& s : sessions) (s.start_time < split ? out.first : out.second).push_back(s);
    return out;
}

std::string to_json_line(const Session& session) {
    nlohmann::ordered_json j;
    j["user_id"] = session.user_id;
    j["query"] = session.query;
    j["start_time"] = session.start_time;
    auto clicks = nlohmann::ordered_json::array();
    for (const auto& c : session.clicks) {
        nlohmann::ordered_json click;
        click["rank"] = c.rank;
        click["url"] = c.url.url();
        clicks.push_back(std::move(click));
    }
    j["clicks"] = std::move(clicks);
    return j.dump();
}

Session session_from_json(std::string_view line) {
    try {
        auto j = nlohmann::json::parse(line);
        Session s;
        s.user_id = j.at("user_id").get<std::string>();
        s.query = j.at("query").get<std::string>();
        s.start_time = j.at("start_time").get<Timestamp>();
        for (const auto& c : j.at("clicks")) {
            int rank = c.at("rank").get<int>();
            if (rank < 1) throw Error(Errc::parse, "click rank must be >= 1");
            s.clicks.push_back({rank, DocRef(c.at("url").get<std::string>())});
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse, std::string("bad session record: ") + e.what());
    }
}

void write_sessions(std::ostream& out, std::span<const Session> sessions) {
    for (const auto& s : sessions) out << to_json_line(s) << '\n';
}

std::vector<Session> read_sessions(std::istream& in) {
    std::vector<Session> sessions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            sessions.push_back(session_from_json(line));
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return sessions;
}

std::vector<Session> read_sessions_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read sessions " + path.string());
    return read_sessions(in);
}

}  // namespace swarm
