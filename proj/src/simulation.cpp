#include "swarm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "format.hpp"
#include "swarm/error.hpp"
#include "swarm/rng.hpp"
#include "swarm/text.hpp"

namespace swarm {

// ---------------------------------------------------------------------------
// Run configuration

void RunConfig::validate() const {
    if (!(half_life > 0.0)) throw Error(Errc::invalid_argument, "delta must be positive");
    if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
    if (iterations < 1) throw Error(Errc::invalid_argument, "iterations must be >= 1");
    ndcg.validate();
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = std::string_view(line);
        while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
        while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
        if (text.empty() || text.front() == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        auto key = normalize_query(text.substr(0, eq));
        auto value = normalize_query(text.substr(eq + 1));
        try {
            if (key == "name") {
                cfg.name = std::string(text.substr(eq + 1));
                cfg.name.erase(0, cfg.name.find_first_not_of(' '));
            } else if (key == "flavor") {
                cfg.flavor = parse_flavor(value);
            } else if (key == "delta" || key == "half_life") {
                cfg.half_life = detail::parse_double(value);
            } else if (key == "k") {
                cfg.k = static_cast<int>(detail::parse_int(value));
            } else if (key == "split") {
                cfg.split = value.find('-') != std::string::npos ? parse_date(value)
                                                                 : detail::parse_int(value);
            } else if (key == "iterations") {
                cfg.iterations = static_cast<int>(detail::parse_int(value));
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value));
            } else if (key == "key_mode") {
                cfg.key_mode = parse_key_mode(value);
            } else if (key == "cutoffs") {
                cfg.ndcg.cutoffs.clear();
                for (const auto& c : swarm::split(value, ',')) {
                    cfg.ndcg.cutoffs.push_back(static_cast<int>(detail::parse_int(normalize_query(c))));
                }
            } else if (key == "ndcg_base") {
                cfg.ndcg.base = detail::parse_double(value);
            } else {
                throw Error(Errc::parse, "unknown key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read run config " + path.string());
    return parse(in);
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "name=" << name << '\n'
        << "flavor=" << to_string(flavor) << '\n'
        << "delta=" << detail::format_double(half_life) << '\n'
        << "k=" << k << '\n'
        << "split=" << split << '\n'
        << "iterations=" << iterations << '\n'
        << "seed=" << seed << '\n'
        << "key_mode=" << to_string(key_mode) << '\n';
    out << "cutoffs=";
    for (std::size_t i = 0; i < ndcg.cutoffs.size(); ++i) out << (i ? "," : "") << ndcg.cutoffs[i];
    out << '\n' << "ndcg_base=" << detail::format_double(ndcg.base) << '\n';
    return out.str();
}

std::vector<RunConfig> preset_run_matrix(std::uint64_t seed) {
    std::vector<RunConfig> runs;
    const std::pair<const char*, const char*> splits[] = {{"2006-04-01", "train-mar"},
                                                          {"2006-05-01", "train-mar-apr"}};
    for (auto flavor : {Flavor::naive, Flavor::ranking_bias, Flavor::elaborate}) {
        for (double delta : {DecayConfig::one_day, DecayConfig::one_week}) {
            for (int k : {1, 3}) {
                for (const auto& [date, label] : splits) {
                    RunConfig cfg;
                    cfg.flavor = flavor;
                    cfg.half_life = delta;
                    cfg.k = k;
                    cfg.split = parse_date(date);
                    cfg.seed = seed;
                    cfg.name = std::string(to_string(flavor)) + "_" +
                               (delta == DecayConfig::one_day ? "day" : "week") + "_k" +
                               std::to_string(k) + "_" + label;
                    runs.push_back(std::move(cfg));
                }
            }
        }
    }
    return runs;
}

// ---------------------------------------------------------------------------
// Training

std::vector<DocRef> reconstruct_page(const Session& session) {
    int depth = results_per_page;
    for (const auto& c : session.clicks) depth = std::max(depth, c.rank);
    std::vector<DocRef> page;
    page.reserve(static_cast<std::size_t>(depth));
    for (int rank = 1; rank <= depth; ++rank) page.push_back(DocRef::placeholder(rank));
    for (const auto& c : session.clicks) page[static_cast<std::size_t>(c.rank - 1)] = c.url;
    return page;
}

void train(PheromoneStore& store, std::span<const Session> sessions, const ExaminationTable& table,
           KeyMode key_mode) {
    for (std::size_t i = 1; i < sessions.size(); ++i) {
        if (sessions[i].start_time < sessions[i - 1].start_time) {
            throw Error(Errc::ordering, "training sessions must be in chronological order");
        }
    }
    for (const auto& session : sessions) {
        if (session.clicks.empty()) continue;
        const auto keys = expand_query_keys(session.query, key_mode);
        const Timestamp now = session.start_time;
        auto deposit_all = [&](const DocRef& doc, std::optional<int> position, double increment) {
            for (const auto& key : keys) store.deposit(key, doc, position, increment, now);
        };

        switch (store.flavor()) {
            case Flavor::naive:
                for (const auto& c : session.clicks) deposit_all(c.url, std::nullopt, increment_naive(c.rank));
                break;
            case Flavor::ranking_bias: {
                std::vector<int> earlier;
                for (const auto& c : session.clicks) {
                    // Last click above this one; clicks further down do not count.
                    int last = 0;
                    for (int r : earlier) {
                        if (r < c.rank) last = std::max(last, r);
                    }
                    deposit_all(c.url, std::nullopt, increment_ranking_bias(c.rank, last, table));
                    earlier.push_back(c.rank);
                }
                break;
            }
            case Flavor::elaborate: {
                const auto page = reconstruct_page(session);
                std::vector<int> ranks;
                for (const auto& c : session.clicks) ranks.push_back(c.rank);
                for (const auto& [doc, position] : derive_elaborate_order(page, ranks)) {
                    if (!doc.is_placeholder()) deposit_all(doc, position, 1.0);
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Injection and alleged clicks

std::vector<DocRef> inject_recommendations(std::span<const DocRef> page,
                                           std::span<const DocRef> recs) {
    std::vector<DocRef> out(recs.begin(), recs.end());
    out.reserve(page.size() + recs.size());
    for (const auto& doc : page) {
        if (std::find(recs.begin(), recs.end(), doc) == recs.end()) out.push_back(doc);
    }
    return out;
}

std::vector<int> alleged_clicks(std::span<const Click> original_clicks,
                                std::span<const DocRef> injected_page) {
    int depth = 0;
    std::set<std::string> clicked;
    for (const auto& c : original_clicks) {
        depth = std::max(depth, c.rank);
        clicked.insert(c.url.url());
    }
    std::vector<int> ranks;
    const auto limit = std::min(static_cast<std::size_t>(depth), injected_page.size());
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& doc = injected_page[i];
        if (!doc.is_placeholder() && clicked.contains(doc.url())) ranks.push_back(static_cast<int>(i + 1));
    }
    return ranks;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

std::vector<double> ndcg_at_cutoffs(std::span<const int> ranks, const NdcgConfig& cfg) {
    std::vector<double> values(cfg.cutoffs.size(), 0.0);
    if (ranks.empty()) return values;
    const auto list = condensed_list(ranks);
    for (std::size_t i = 0; i < cfg.cutoffs.size(); ++i) values[i] = ndcg(list, cfg.cutoffs[i], cfg);
    return values;
}

SessionOutcome simulate_session(const PheromoneStore& store, const Session& session,
                                std::size_t index, const RunConfig& cfg,
                                const SimulationOptions& options) {
    SessionOutcome out;
    out.session_index = index;
    out.user_id = session.user_id;
    out.query = session.query;
    out.start_time = session.start_time;
    out.cutoffs = cfg.ndcg.cutoffs;

    std::vector<int> original_ranks;
    for (const auto& c : session.clicks) original_ranks.push_back(c.rank);
    out.baseline = ndcg_at_cutoffs(original_ranks, cfg.ndcg);
    out.simulated.assign(cfg.ndcg.cutoffs.size(), 0.0);

    const auto page = reconstruct_page(session);
    const auto keys = expand_query_keys(session.query, cfg.key_mode);
    const auto pool = store.candidates(keys, session.start_time);

    out.iterations.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int it = 0; it < cfg.iterations; ++it) {
        Rng rng(derive_seed(cfg.seed, index, static_cast<std::uint64_t>(it)));
        SimOutcome sim;
        sim.iteration = it;
        sim.recommended = pool.empty() ? std::vector<DocRef>{}
                                       : sample_without_replacement(pool, cfg.k, store.flavor(), rng);
        auto injected = inject_recommendations(page, sim.recommended);
        sim.alleged_ranks = alleged_clicks(session.clicks, injected);
        sim.ndcg = ndcg_at_cutoffs(sim.alleged_ranks, cfg.ndcg);
        for (std::size_t c = 0; c < sim.ndcg.size(); ++c) out.simulated[c] += sim.ndcg[c];
        if (options.record_pages) sim.injected_page = std::move(injected);
        out.iterations.push_back(std::move(sim));
    }
    for (auto& v : out.simulated) v /= static_cast<double>(cfg.iterations);
    return out;
}

std::vector<std::size_t> scorable(std::span<const Session> sessions) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        if (!sessions[i].clicks.empty()) idx.push_back(i);
    }
    return idx;
}

}  // namespace

std::vector<SessionOutcome> run_monte_carlo_serial(const PheromoneStore& store,
                                                   std::span<const Session> test_sessions,
                                                   const RunConfig& cfg,
                                                   const SimulationOptions& options) {
    cfg.validate();
    const auto idx = scorable(test_sessions);
    std::vector<SessionOutcome> outcomes;
    outcomes.reserve(idx.size());
    for (auto i : idx) outcomes.push_back(simulate_session(store, test_sessions[i], i, cfg, options));
    return outcomes;
}

std::vector<SessionOutcome> run_monte_carlo(const PheromoneStore& store,
                                            std::span<const Session> test_sessions,
                                            const RunConfig& cfg,
                                            const SimulationOptions& options) {
    cfg.validate();
    const auto idx = scorable(test_sessions);
    std::vector<SessionOutcome> outcomes(idx.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(idx.size());

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        try {
            const auto i = idx[static_cast<std::size_t>(j)];
            outcomes[static_cast<std::size_t>(j)] =
                simulate_session(store, test_sessions[i], i, cfg, options);
        } catch (...) {
#pragma omp critical(swarm_mc_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

// ---------------------------------------------------------------------------
// Reports

std::string_view to_string(Dataset dataset) {
    switch (dataset) {
        case Dataset::whole: return "whole";
        case Dataset::navigational: return "navigational";
        case Dataset::non_navigational: return "non_navigational";
    }
    return "whole";
}

std::string_view to_string(Averaging averaging) {
    switch (averaging) {
        case Averaging::micro: return "micro";
        case Averaging::macro_user: return "macro_user";
        case Averaging::macro_query: return "macro_query";
    }
    return "micro";
}

DeltaClass classify_delta(double delta_pct) {
    const double magnitude = std::abs(delta_pct);
    if (magnitude > 10.0) return DeltaClass::material;
    if (magnitude >= 5.0) return DeltaClass::noticeable;
    return DeltaClass::negligible;
}

const ReportRow* Report::find(Dataset dataset, Averaging averaging, int cutoff) const {
    for (const auto& row : rows) {
        if (row.dataset == dataset && row.averaging == averaging && row.cutoff == cutoff) return &row;
    }
    return nullptr;
}

namespace {

std::optional<double> average(std::span<const ScoreRecord> records, Averaging averaging, int cutoff) {
    if (records.empty()) return std::nullopt;
    switch (averaging) {
        case Averaging::micro: return micro_average(records, cutoff);
        case Averaging::macro_user: return macro_average(records, GroupBy::user, cutoff);
        case Averaging::macro_query: return macro_average(records, GroupBy::query, cutoff);
    }
    return std::nullopt;
}

bool in_dataset(Dataset dataset, Intent intent) {
    switch (dataset) {
        case Dataset::whole: return true;
        case Dataset::navigational: return intent == Intent::navigational;
        case Dataset::non_navigational: return intent == Intent::non_navigational;
    }
    return true;
}

}  // namespace

Report summarize(const std::map<Flavor, std::vector<SessionOutcome>>& outcomes,
                 const IntentLabeler& labeler) {
    const std::vector<SessionOutcome>* reference = nullptr;
    for (const auto& [_, list] : outcomes) {
        if (!list.empty()) {
            reference = &list;
            break;
        }
    }
    if (!reference) throw Error(Errc::no_data, "no simulation outcomes to summarize");
    const auto& cutoffs = reference->front().cutoffs;

    std::unordered_map<std::string, Intent> labels;
    auto label_of = [&](const std::string& query) {
        auto it = labels.find(query);
        if (it == labels.end()) it = labels.emplace(query, labeler(query)).first;
        return it->second;
    };

    auto records_for = [&](const std::vector<SessionOutcome>& list, Dataset dataset, bool baseline) {
        std::vector<ScoreRecord> records;
        for (const auto& o : list) {
            if (!in_dataset(dataset, label_of(o.query))) continue;
            for (std::size_t c = 0; c < o.cutoffs.size(); ++c) {
                records.push_back({o.query, o.user_id, o.start_time, o.cutoffs[c],
                                   baseline ? o.baseline[c] : o.simulated[c]});
            }
        }
        return records;
    };

    Report report;
    for (auto dataset : {Dataset::whole, Dataset::navigational, Dataset::non_navigational}) {
        const auto base_records = records_for(*reference, dataset, true);
        std::array<std::vector<ScoreRecord>, 3> flavor_records;
        for (const auto& [flavor, list] : outcomes) {
            flavor_records[static_cast<std::size_t>(flavor)] = records_for(list, dataset, false);
        }
        for (auto averaging : {Averaging::micro, Averaging::macro_user, Averaging::macro_query}) {
            for (int cutoff : cutoffs) {
                ReportRow row;
                row.dataset = dataset;
                row.averaging = averaging;
                row.cutoff = cutoff;
                row.baseline = average(base_records, averaging, cutoff);
                for (const auto& [flavor, _] : outcomes) {
                    const auto f = static_cast<std::size_t>(flavor);
                    row.value[f] = average(flavor_records[f], averaging, cutoff);
                    if (row.value[f] && row.baseline && *row.baseline > 0.0) {
                        row.delta_pct[f] = (*row.value[f] - *row.baseline) / *row.baseline * 100.0;
                    }
                }
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

void write_report(std::ostream& out, const Report& report) {
    out << "dataset\taveraging\tcutoff\tbaseline\tnaive\tnaive_delta_pct\tranking_bias\t"
           "rb_delta_pct\telaborate\telab_delta_pct\n";
    auto value = [](const std::optional<double>& v) {
        return v ? detail::format_fixed(*v, 6) : std::string("-");
    };
    auto delta = [](const std::optional<double>& d) {
        if (!d) return std::string("-");
        auto text = detail::format_fixed(*d, 2);
        // Classify what is printed so "10.00" never carries the above-10% mark.
        switch (classify_delta(std::round(*d * 100.0) / 100.0)) {
            case DeltaClass::material: return text + "**";
            case DeltaClass::noticeable: return text + "*";
            case DeltaClass::negligible: return text;
        }
        return text;
    };
    for (const auto& row : report.rows) {
        out << to_string(row.dataset) << '\t' << to_string(row.averaging) << '\t' << row.cutoff
            << '\t' << value(row.baseline);
        for (std::size_t f = 0; f < 3; ++f) out << '\t' << value(row.value[f]) << '\t' << delta(row.delta_pct[f]);
        out << '\n';
    }
}

void write_outcomes(std::ostream& out, std::span<const SessionOutcome> outcomes) {
    for (const auto& o : outcomes) {
        nlohmann::ordered_json j;
        j["session_index"] = o.session_index;
        j["user_id"] = o.user_id;
        j["query"] = o.query;
        j["start_time"] = o.start_time;
        j["cutoffs"] = o.cutoffs;
        j["baseline"] = o.baseline;
        j["simulated"] = o.simulated;
        auto iterations = nlohmann::ordered_json::array();
        for (const auto& it : o.iterations) {
            nlohmann::ordered_json ji;
            ji["iteration"] = it.iteration;
            auto recs = nlohmann::ordered_json::array();
            for (const auto& d : it.recommended) recs.push_back(d.url());
            ji["recommended"] = std::move(recs);
            ji["alleged"] = it.alleged_ranks;
            ji["ndcg"] = it.ndcg;
            if (!it.injected_page.empty()) {
                auto page = nlohmann::ordered_json::array();
                for (const auto& d : it.injected_page) page.push_back(d.is_placeholder() ? "" : d.url());
                ji["page"] = std::move(page);
            }
            iterations.push_back(std::move(ji));
        }
        j["iterations"] = std::move(iterations);
        out << j.dump() << '\n';
    }
}

std::vector<SessionOutcome> read_outcomes(std::istream& in) {
    std::vector<SessionOutcome> outcomes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            SessionOutcome o;
            o.session_index = j.at("session_index").get<std::size_t>();
            o.user_id = j.at("user_id").get<std::string>();
            o.query = j.at("query").get<std::string>();
            o.start_time = j.at("start_time").get<Timestamp>();
            o.cutoffs = j.at("cutoffs").get<std::vector<int>>();
            o.baseline = j.at("baseline").get<std::vector<double>>();
            o.simulated = j.at("simulated").get<std::vector<double>>();
            if (o.baseline.size() != o.cutoffs.size() || o.simulated.size() != o.cutoffs.size()) {
                throw Error(Errc::parse, "score arrays do not match cutoffs");
            }
            for (const auto& ji : j.at("iterations")) {
                SimOutcome it;
                it.iteration = ji.at("iteration").get<int>();
                for (const auto& url : ji.at("recommended")) it.recommended.emplace_back(url.get<std::string>());
                it.alleged_ranks = ji.at("alleged").get<std::vector<int>>();
                it.ndcg = ji.at("ndcg").get<std::vector<double>>();
                o.iterations.push_back(std::move(it));
            }
            outcomes.push_back(std::move(o));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Synthetic logs

std::vector<Interaction> gen_synthetic_log(int n_users, std::span<const DocRef> page,
                                           int relevant_rank, const ExaminationTable& table,
                                           std::uint64_t seed, const SyntheticClickModel& model) {
    if (relevant_rank < 1 || relevant_rank > static_cast<int>(page.size())) {
        throw Error(Errc::invalid_argument, "relevant rank outside the page");
    }
    if (n_users < 0) throw Error(Errc::invalid_argument, "user count must be >= 0");
    Rng rng(seed);
    std::vector<Interaction> rows;
    for (int u = 0; u < n_users; ++u) {
        const std::string user = std::to_string(100000 + u);
        const Timestamp t = model.start + static_cast<Timestamp>(u) * model.spacing;
        rows.push_back({user, model.query, t, 0, std::nullopt});
        int last = 0;
        int clicks = 0;
        for (int rank = 1; rank <= static_cast<int>(page.size()); ++rank) {
            const double examine = table.at(rank, last);
            if (!(rng.uniform() < examine)) continue;
            const double attractiveness = rank == relevant_rank ? 1.0
                                          : rank == 1           ? model.top_attractiveness
                                                                : model.distractor_attractiveness;
            if (rng.uniform() < attractiveness) {
                ++clicks;
                rows.push_back({user, model.query, t + 10 * clicks, rank,
                                page[static_cast<std::size_t>(rank - 1)]});
                last = rank;
            }
        }
    }
    return rows;
}

void write_log(std::ostream& out, std::span<const Interaction> rows) {
    for (const auto& r : rows) {
        out << r.user_id << '\t' << r.query << '\t' << format_timestamp(r.timestamp) << '\t'
            << r.rank << '\t' << (r.url ? r.url->url() : std::string()) << '\n';
    }
}

}  // namespace swarm
