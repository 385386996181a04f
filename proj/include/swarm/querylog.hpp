#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarm/pheromone.hpp"

namespace swarm {

/// One row of an AOL-format log.
struct Interaction {
    std::string user_id;
    std::string query;
    Timestamp timestamp = 0;
    /// 0 means the query was issued without a click.
    int rank = 0;
    std::optional<DocRef> url;

    bool operator==(const Interaction&) const = default;
};

struct Click {
    int rank = 0;
    DocRef url;

    bool operator==(const Click&) const = default;
};

/// One query of one user plus the clicks that followed it.
struct Session {
    std::string user_id;
    std::string query;
    Timestamp start_time = 0;
    std::vector<Click> clicks;

    bool operator==(const Session&) const = default;
};

struct DatasetSubset {
    std::set<QueryKey> frequent;
    std::set<QueryKey> easy;
    std::set<QueryKey> difficult;
    std::set<QueryKey> all;
};

inline constexpr Timestamp session_gap_seconds = 1800;
inline constexpr int results_per_page = 10;
inline constexpr std::string_view aol_header = "AnonID\tQuery\tQueryTime\tItemRank\tClickURL";

/// "YYYY-MM-DD HH:MM:SS", interpreted as UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);
/// Epoch seconds of 00:00:00 UTC on the given day, e.g. "2006-04-01".
Timestamp parse_date(std::string_view text);

/// Parses user, query, timestamp, [rank], [url]; extra trailing columns are
/// ignored. Returns nullopt for rows with a blank query (skip the record).
/// Throws ParseError carrying `line_no` for malformed rows.
std::optional<Interaction> parse_log_line(std::string_view line, std::size_t line_no = 1);

struct LogReadStats {
    std::size_t rows = 0;
    std::size_t skipped = 0;
    std::size_t duplicates_removed = 0;
};

/// Reads plain or gzip-compressed AOL TSV. A first line equal to the AOL
/// header is skipped.
std::vector<Interaction> read_log(std::istream& in, LogReadStats* stats = nullptr);
std::vector<Interaction> read_log_file(const std::filesystem::path& path,
                                       LogReadStats* stats = nullptr);

/// Drops rows identical to the row immediately before them.
std::size_t remove_consecutive_duplicates(std::vector<Interaction>& rows);

/// Groups by (user, query); consecutive actions strictly closer than
/// `threshold` share a session. Clicks are ordered by (time, rank, url) and
/// sessions by (start_time, user, query).
std::vector<Session> sessionize(std::vector<Interaction> interactions,
                                Timestamp threshold = session_gap_seconds);

/// Inclusive day count between the earliest and latest session dates.
int span_days(std::span<const Session> sessions);

DatasetSubset filter_dataset(std::span<const Session> sessions, int span_days,
                             int page_size = results_per_page);

/// Sessions with start_time < split go to the first list, the rest to the second.
std::pair<std::vector<Session>, std::vector<Session>> partition(std::span<const Session> sessions,
                                                                Timestamp split);

std::string to_json_line(const Session& session);
Session session_from_json(std::string_view line);
void write_sessions(std::ostream& out, std::span<const Session> sessions);
std::vector<Session> read_sessions(std::istream& in);
std::vector<Session> read_sessions_file(const std::filesystem::path& path);

}  // namespace swarm
