#include "swarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "swarm/error.hpp"

namespace swarm {

void NdcgConfig::validate() const {
    if (!(base >= 2.0)) throw Error(Errc::invalid_argument, "discount base must be >= 2");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] < 1 || (i > 0 && cutoffs[i] <= cutoffs[i - 1])) {
            throw Error(Errc::invalid_cutoff, "cutoffs must be positive and ascending");
        }
    }
}

CondensedList condensed_list(std::span<const int> clicked_ranks) {
    if (clicked_ranks.empty()) throw Error(Errc::empty_judgments, "no clicked results");
    std::set<int> clicked(clicked_ranks.begin(), clicked_ranks.end());
    if (*clicked.begin() < 1) throw Error(Errc::invalid_argument, "ranks are 1-based");
    CondensedList list;
    list.gains.assign(static_cast<std::size_t>(*clicked.rbegin()), 0);
    for (int rank : clicked) list.gains[static_cast<std::size_t>(rank - 1)] = 1;
    return list;
}

CondensedList condensed_list(std::span<const DocRef> page, std::span<const int> clicked_ranks) {
    for (int rank : clicked_ranks) {
        if (rank > static_cast<int>(page.size())) {
            throw Error(Errc::invalid_argument, "clicked rank beyond the page");
        }
    }
    return condensed_list(clicked_ranks);
}

double dcg(const CondensedList& list, int cutoff, const NdcgConfig& cfg) {
    if (cutoff < 1) throw Error(Errc::invalid_cutoff, "cutoff must be >= 1");
    const double log_base = std::log(cfg.base);
    const auto n = std::min(static_cast<std::size_t>(cutoff), list.gains.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (list.gains[i] == 0) continue;
        const double rank = static_cast<double>(i + 1);
        sum += rank < cfg.base ? list.gains[i] : list.gains[i] / (std::log(rank) / log_base);
    }
    return sum;
}

double ndcg(const CondensedList& list, int cutoff, const NdcgConfig& cfg) {
    CondensedList ideal = list;
    std::sort(ideal.gains.begin(), ideal.gains.end(), std::greater<>());
    const double best = dcg(ideal, cutoff, cfg);
    if (best <= 0.0) throw Error(Errc::undefined_normalization, "no relevant document in the list");
    return dcg(list, cutoff, cfg) / best;
}

double micro_average(std::span<const ScoreRecord> records, int cutoff) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.cutoff != cutoff) continue;
        sum += r.value;
        ++n;
    }
    if (n == 0) throw Error(Errc::no_data, "no scores at cutoff " + std::to_string(cutoff));
    return sum / static_cast<double>(n);
}

double macro_average(std::span<const ScoreRecord> records, GroupBy group_by, int cutoff) {
    std::map<std::string, std::pair<double, std::size_t>> groups;
    for (const auto& r : records) {
        if (r.cutoff != cutoff) continue;
        auto& g = groups[group_by == GroupBy::user ? r.user_id : r.query];
        g.first += r.value;
        ++g.second;
    }
    if (groups.empty()) throw Error(Errc::no_data, "no scores at cutoff " + std::to_string(cutoff));
    double sum = 0.0;
    for (const auto& [_, g] : groups) sum += g.first / static_cast<double>(g.second);
    return sum / static_cast<double>(groups.size());
}

}  // namespace swarm
