#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarm/pheromone.hpp"

namespace swarm {

/// Binary gains of the judged prefix of a result list.
struct CondensedList {
    std::vector<std::uint8_t> gains;

    bool operator==(const CondensedList&) const = default;
};

struct NdcgConfig {
    /// Logarithm base of the rank discount; ranks below it are not discounted.
    double base = 2.0;
    std::vector<int> cutoffs{1, 3, 10};

    void validate() const;
};

/// Truncates the page after its last clicked rank; clicked ranks gain 1 and
/// the skipped ranks above the last click gain 0. Throws empty_judgments when
/// nothing was clicked.
CondensedList condensed_list(std::span<const DocRef> page, std::span<const int> clicked_ranks);

/// Same list built from ranks alone.
CondensedList condensed_list(std::span<const int> clicked_ranks);

double dcg(const CondensedList& list, int cutoff, const NdcgConfig& cfg = {});

/// DCG over the DCG of the same gains sorted descending. Throws
/// undefined_normalization when every gain is zero.
double ndcg(const CondensedList& list, int cutoff, const NdcgConfig& cfg = {});

struct ScoreRecord {
    std::string query;
    std::string user_id;
    Timestamp session_time = 0;
    int cutoff = 0;
    double value = 0.0;
};

enum class GroupBy { user, query };

/// Mean of all values at `cutoff`.
double micro_average(std::span<const ScoreRecord> records, int cutoff);

/// Mean of per-group means at `cutoff`.
double macro_average(std::span<const ScoreRecord> records, GroupBy group_by, int cutoff);

}  // namespace swarm
