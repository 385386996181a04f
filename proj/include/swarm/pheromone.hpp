#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarm/examination.hpp"
#include "swarm/rng.hpp"

namespace swarm {

/// Epoch seconds.
using Timestamp = std::int64_t;

enum class Flavor { naive, ranking_bias, elaborate };

std::string_view to_string(Flavor flavor);
Flavor parse_flavor(std::string_view text);

struct DecayConfig {
    static constexpr double one_day = 86400.0;
    static constexpr double one_week = 604800.0;

    /// Half-life in seconds: the time for a trail to lose half its weight.
    double half_life = one_day;
    /// Entries whose evaporated weight falls below this are dropped by prune().
    double epsilon = 1e-6;

    void validate() const;
};

/// Normalized query text. Construction from a blank string throws invalid_query.
class QueryKey {
  public:
    explicit QueryKey(std::string_view raw);

    const std::string& text() const noexcept { return text_; }

    auto operator<=>(const QueryKey&) const = default;

  private:
    std::string text_;
};

/// Document identifier. Placeholders stand for results whose identity the log
/// does not record; they can be skipped but never clicked or deposited on.
class DocRef {
  public:
    explicit DocRef(std::string url);

    static DocRef placeholder(int rank);

    const std::string& url() const noexcept { return url_; }
    bool is_placeholder() const noexcept { return placeholder_; }

    bool operator==(const DocRef&) const = default;
    auto operator<=>(const DocRef&) const = default;

  private:
    DocRef(std::string url, bool placeholder) : url_(std::move(url)), placeholder_(placeholder) {}

    std::string url_;
    bool placeholder_ = false;
};

struct PheromoneEntry {
    double weight = 0.0;
    Timestamp last_touch = 0;
    /// Only set for Elaborate trails (query, document, position).
    std::optional<int> position;

    bool operator==(const PheromoneEntry&) const = default;
};

/// weight * (1/2)^((now - last_touch) / half_life). Throws clock_skew when
/// now precedes the last touch.
double evaporated_weight(const PheromoneEntry& entry, Timestamp now, const DecayConfig& cfg);

constexpr double increment_naive(int /*rank*/ = 1) noexcept { return 1.0; }

/// Reciprocal of the examination probability of `position` given the last
/// clicked position (0 when nothing was clicked before).
double increment_ranking_bias(int position, int last_clicked, const ExaminationTable& table);

struct RankedDoc {
    DocRef doc;
    int position = 0;

    bool operator==(const RankedDoc&) const = default;
};

/// "Click > Skip above" ideal order: clicked documents in click-rank order,
/// then the skipped documents above the last click. Positions run 1..n.
/// Ranks are 1-based into `page`; throws no_preference for an empty click set.
std::vector<RankedDoc> derive_elaborate_order(std::span<const DocRef> page,
                                              std::span<const int> clicked_ranks);

struct Candidate {
    DocRef doc;
    /// Evaporated weight summed over keys (and positions, for Elaborate).
    double weight = 0.0;
    /// Weight-averaged trail position; 0 for flavors without positions.
    double mean_position = 0.0;
};

/// Trails for every (query key, document[, position]). Readers share a lock;
/// writers are serialized, so a reader sees an entry either before or after a
/// deposit and never in between.
class PheromoneStore {
  public:
    PheromoneStore(Flavor flavor, DecayConfig decay);

    PheromoneStore(const PheromoneStore& other);
    PheromoneStore& operator=(const PheromoneStore& other);
    PheromoneStore(PheromoneStore&& other) noexcept;
    PheromoneStore& operator=(PheromoneStore&& other) noexcept;

    Flavor flavor() const noexcept { return flavor_; }
    const DecayConfig& decay() const noexcept { return decay_; }

    /// Evaporates the existing entry to `now`, then adds `increment`.
    PheromoneEntry deposit(const QueryKey& key, const DocRef& doc, std::optional<int> position,
                           double increment, Timestamp now);

    std::optional<PheromoneEntry> find(const QueryKey& key, const DocRef& doc,
                                       std::optional<int> position = std::nullopt) const;

    /// Removes entries whose evaporated weight at `now` is below epsilon.
    std::size_t prune(Timestamp now);

    /// Documents with positive evaporated weight under any of `keys`, in url order.
    std::vector<Candidate> candidates(std::span<const QueryKey> keys, Timestamp now) const;

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::size_t approx_bytes() const;

    /// TSV snapshot: query_key, url, position or "-", weight, last_touch.
    void save(std::ostream& out) const;
    static PheromoneStore load(std::istream& in, Flavor flavor, DecayConfig decay);

  private:
    using TrailId = std::pair<std::string, int>;  // url, position (0 = none)
    using QueryTrails = std::map<TrailId, PheromoneEntry>;

    void check_position(const std::optional<int>& position) const;

    Flavor flavor_;
    DecayConfig decay_;
    std::map<std::string, QueryTrails> trails_;
    mutable std::shared_mutex mutex_;
};

/// Weighted sampling without replacement over the candidates of `keys`.
/// Returns at most k documents; empty for unknown queries.
std::vector<DocRef> recommend(const PheromoneStore& store, std::span<const QueryKey> keys, int k,
                              Timestamp now, Rng& rng);

/// Same draw, over an explicit candidate list (kept in the given order).
std::vector<DocRef> sample_without_replacement(std::vector<Candidate> candidates, int k,
                                               Flavor flavor, Rng& rng);

enum class KeyMode { exact, ngram };

std::string_view to_string(KeyMode mode);
KeyMode parse_key_mode(std::string_view text);

/// exact: the normalized query. ngram: every contiguous token n-gram.
/// Result is sorted and duplicate-free.
std::vector<QueryKey> expand_query_keys(std::string_view query, KeyMode mode);

}  // namespace swarm
