#include "swarm/pheromone.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/text.hpp"

namespace swarm {

std::string_view to_string(Flavor flavor) {
    switch (flavor) {
        case Flavor::naive: return "naive";
        case Flavor::ranking_bias: return "ranking_bias";
        case Flavor::elaborate: return "elaborate";
    }
    return "naive";
}

Flavor parse_flavor(std::string_view text) {
    auto t = normalize_query(text);
    if (t == "naive") return Flavor::naive;
    if (t == "ranking_bias" || t == "ranking-bias" || t == "rankingbias") return Flavor::ranking_bias;
    if (t == "elaborate") return Flavor::elaborate;
    throw Error(Errc::invalid_argument, "unknown flavor '" + std::string(text) + "'");
}

void DecayConfig::validate() const {
    if (!(half_life > 0.0) || !std::isfinite(half_life)) {
        throw Error(Errc::invalid_argument, "half-life must be a positive number of seconds");
    }
    if (!(epsilon >= 0.0)) throw Error(Errc::invalid_argument, "epsilon must be >= 0");
}

QueryKey::QueryKey(std::string_view raw) : text_(normalize_query(raw)) {
    if (text_.empty()) throw Error(Errc::invalid_query, "blank query");
}

DocRef::DocRef(std::string url) : url_(std::move(url)) {
    if (url_.empty()) throw Error(Errc::invalid_argument, "empty document url");
}

DocRef DocRef::placeholder(int rank) {
    return DocRef("#unjudged-" + std::to_string(rank), true);
}

double evaporated_weight(const PheromoneEntry& entry, Timestamp now, const DecayConfig& cfg) {
    if (now < entry.last_touch) {
        throw Error(Errc::clock_skew, "evaluation time " + std::to_string(now) +
                                          " precedes last touch " +
                                          std::to_string(entry.last_touch));
    }
    if (now == entry.last_touch) return entry.weight;
    double elapsed = static_cast<double>(now - entry.last_touch);
    return entry.weight * std::exp2(-elapsed / cfg.half_life);
}

double increment_ranking_bias(int position, int last_clicked, const ExaminationTable& table) {
    if (position < 1 || last_clicked < 0 || last_clicked >= position) {
        throw Error(Errc::invalid_argument, "ranking-bias increment needs 0 <= last_clicked < position");
    }
    return 1.0 / table.at(position, last_clicked);
}

std::vector<RankedDoc> derive_elaborate_order(std::span<const DocRef> page,
                                              std::span<const int> clicked_ranks) {
    if (clicked_ranks.empty()) {
        throw Error(Errc::no_preference, "no clicks, no preference can be derived");
    }
    std::set<int> clicked(clicked_ranks.begin(), clicked_ranks.end());
    for (int rank : clicked) {
        if (rank < 1 || rank > static_cast<int>(page.size())) {
            throw Error(Errc::invalid_argument, "clicked rank " + std::to_string(rank) + " outside page");
        }
    }
    int last = *clicked.rbegin();

    std::vector<RankedDoc> order;
    order.reserve(static_cast<std::size_t>(last));
    for (int rank : clicked) order.push_back({page[static_cast<std::size_t>(rank - 1)], 0});
    for (int rank = 1; rank < last; ++rank) {
        if (!clicked.contains(rank)) order.push_back({page[static_cast<std::size_t>(rank - 1)], 0});
    }
    for (std::size_t i = 0; i < order.size(); ++i) order[i].position = static_cast<int>(i + 1);
    return order;
}

PheromoneStore::PheromoneStore(Flavor flavor, DecayConfig decay) : flavor_(flavor), decay_(decay) {
    decay_.validate();
}

PheromoneStore::PheromoneStore(const PheromoneStore& other)
    : flavor_(other.flavor_), decay_(other.decay_) {
    std::shared_lock lock(other.mutex_);
    trails_ = other.trails_;
}

PheromoneStore& PheromoneStore::operator=(const PheromoneStore& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_);
    std::shared_lock other_lock(other.mutex_);
    flavor_ = other.flavor_;
    decay_ = other.decay_;
    trails_ = other.trails_;
    return *this;
}

PheromoneStore::PheromoneStore(PheromoneStore&& other) noexcept
    : flavor_(other.flavor_), decay_(other.decay_), trails_(std::move(other.trails_)) {}

PheromoneStore& PheromoneStore::operator=(PheromoneStore&& other) noexcept {
    if (this == &other) return *this;
    flavor_ = other.flavor_;
    decay_ = other.decay_;
    trails_ = std::move(other.trails_);
    return *this;
}

void PheromoneStore::check_position(const std::optional<int>& position) const {
    bool wants_position = flavor_ == Flavor::elaborate;
    if (position.has_value() != wants_position) {
        throw Error(Errc::flavor_key, wants_position
                                          ? "elaborate trails are keyed by position"
                                          : std::string(to_string(flavor_)) +
                                                " trails carry no position");
    }
    if (position && *position < 1) throw Error(Errc::flavor_key, "positions are 1-based");
}

PheromoneEntry PheromoneStore::deposit(const QueryKey& key, const DocRef& doc,
                                       std::optional<int> position, double increment,
                                       Timestamp now) {
    if (!(increment > 0.0) || !std::isfinite(increment)) {
        throw Error(Errc::invalid_increment, "deposit increment must be positive");
    }
    check_position(position);
    if (doc.is_placeholder()) {
        throw Error(Errc::invalid_argument, "cannot deposit on an unjudged placeholder");
    }

    std::unique_lock lock(mutex_);
    auto& docs = trails_[key.text()];
    auto [it, inserted] = docs.try_emplace(TrailId{doc.url(), position.value_or(0)});
    auto& entry = it->second;
    double base = inserted ? 0.0 : evaporated_weight(entry, now, decay_);
    entry.weight = base + increment;
    entry.last_touch = now;
    entry.position = position;
    return entry;
}

std::optional<PheromoneEntry> PheromoneStore::find(const QueryKey& key, const DocRef& doc,
                                                   std::optional<int> position) const {
    std::shared_lock lock(mutex_);
    auto q = trails_.find(key.text());
    if (q == trails_.end()) return std::nullopt;
    auto it = q->second.find({doc.url(), position.value_or(0)});
    if (it == q->second.end()) return std::nullopt;
    return it->second;
}

std::size_t PheromoneStore::prune(Timestamp now) {
    std::unique_lock lock(mutex_);
    std::size_t removed = 0;
    for (auto q = trails_.begin(); q != trails_.end();) {
        auto& docs = q->second;
        for (auto it = docs.begin(); it != docs.end();) {
            if (evaporated_weight(it->second, now, decay_) < decay_.epsilon) {
                it = docs.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
        q = docs.empty() ? trails_.erase(q) : std::next(q);
    }
    return removed;
}

std::vector<Candidate> PheromoneStore::candidates(std::span<const QueryKey> keys,
                                                  Timestamp now) const {
    struct Accum {
        double weight = 0.0;
        double position_mass = 0.0;
    };
    std::map<std::string, Accum> summed;
    {
        std::shared_lock lock(mutex_);
        for (const auto& key : keys) {
            auto q = trails_.find(key.text());
            if (q == trails_.end()) continue;
            for (const auto& [id, entry] : q->second) {
                double w = evaporated_weight(entry, now, decay_);
                if (!(w > 0.0)) continue;
                auto& acc = summed[id.first];
                acc.weight += w;
                acc.position_mass += w * id.second;
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(summed.size());
    for (auto& [url, acc] : summed) {
        out.push_back({DocRef(url), acc.weight, acc.position_mass / acc.weight});
    }
    return out;
}

std::size_t PheromoneStore::size() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, docs] : trails_) n += docs.size();
    return n;
}

std::size_t PheromoneStore::approx_bytes() const {
    std::shared_lock lock(mutex_);
    // Node overhead of std::map is roughly four pointers plus the payload.
    constexpr std::size_t node = 4 * sizeof(void*);
    std::size_t bytes = sizeof(*this);
    for (const auto& [query, docs] : trails_) {
        bytes += node + sizeof(std::string) + sizeof(QueryTrails) + query.capacity();
        for (const auto& [id, entry] : docs) {
            bytes += node + sizeof(TrailId) + sizeof(PheromoneEntry) + id.first.capacity();
        }
    }
    return bytes;
}

void PheromoneStore::save(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    for (const auto& [query, docs] : trails_) {
        for (const auto& [id, entry] : docs) {
            out << query << '\t' << id.first << '\t'
                << (id.second == 0 ? std::string("-") : std::to_string(id.second)) << '\t'
                << detail::format_double(entry.weight) << '\t' << entry.last_touch << '\n';
        }
    }
}

PheromoneStore PheromoneStore::load(std::istream& in, Flavor flavor, DecayConfig decay) {
    PheromoneStore store(flavor, decay);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 5) throw ParseError(line_no, "expected 5 tab-separated fields");
        std::optional<int> position;
        PheromoneEntry entry;
        try {
            if (fields[2] != "-") position = static_cast<int>(detail::parse_int(fields[2]));
            entry.weight = detail::parse_double(fields[3]);
            entry.last_touch = detail::parse_int(fields[4]);
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty key or url");
        if (!(entry.weight >= 0.0)) throw ParseError(line_no, "negative weight");
        store.check_position(position);
        entry.position = position;
        // Keys are stored verbatim so a load/save round trip is byte-identical.
        store.trails_[fields[0]][{fields[1], position.value_or(0)}] = entry;
    }
    return store;
}

std::vector<DocRef> sample_without_replacement(std::vector<Candidate> pool, int k, Flavor flavor,
                                               Rng& rng) {
    if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
    std::vector<Candidate> picked;
    while (static_cast<int>(picked.size()) < k && !pool.empty()) {
        double total = 0.0;
        for (const auto& c : pool) total += c.weight;
        double target = rng.uniform() * total;
        std::size_t chosen = pool.size() - 1;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            cumulative += pool[i].weight;
            if (target < cumulative) {
                chosen = i;
                break;
            }
        }
        picked.push_back(std::move(pool[chosen]));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    if (flavor == Flavor::elaborate) {
        // Selection is by summed weight; presentation prefers lower trail positions.
        std::stable_sort(picked.begin(), picked.end(), [](const Candidate& a, const Candidate& b) {
            return a.mean_position < b.mean_position;
        });
    }
    std::vector<DocRef> out;
    out.reserve(picked.size());
    for (auto& c : picked) out.push_back(std::move(c.doc));
    return out;
}

std::vector<DocRef> recommend(const PheromoneStore& store, std::span<const QueryKey> keys, int k,
                              Timestamp now, Rng& rng) {
    if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
    return sample_without_replacement(store.candidates(keys, now), k, store.flavor(), rng);
}

std::string_view to_string(KeyMode mode) {
    return mode == KeyMode::exact ? "exact" : "ngram";
}

KeyMode parse_key_mode(std::string_view text) {
    auto t = normalize_query(text);
    if (t == "exact") return KeyMode::exact;
    if (t == "ngram") return KeyMode::ngram;
    throw Error(Errc::invalid_argument, "unknown key mode '" + std::string(text) + "'");
}

std::vector<QueryKey> expand_query_keys(std::string_view query, KeyMode mode) {
    auto tokens = tokenize(query);
    if (tokens.empty()) throw Error(Errc::invalid_query, "blank query");
    std::set<std::string> grams;
    if (mode == KeyMode::exact) {
        grams.insert(join(tokens, " "));
    } else {
        for (std::size_t n = 1; n <= tokens.size(); ++n) {
            for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
                std::vector<std::string> slice(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                               tokens.begin() + static_cast<std::ptrdiff_t>(start + n));
                grams.insert(join(slice, " "));
            }
        }
    }
    std::vector<QueryKey> keys;
    keys.reserve(grams.size());
    for (const auto& g : grams) keys.emplace_back(g);
    return keys;
}

}  // namespace swarm
