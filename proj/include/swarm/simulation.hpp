#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarm/examination.hpp"
#include "swarm/intent.hpp"
#include "swarm/metrics.hpp"
#include "swarm/pheromone.hpp"
#include "swarm/querylog.hpp"

namespace swarm {

/// One offline run: flavor, half-life, recommendation count, train/test split.
struct RunConfig {
    std::string name = "run";
    Flavor flavor = Flavor::naive;
    double half_life = DecayConfig::one_day;
    int k = 1;
    /// Sessions starting before this instant train the store; the rest are tested.
    Timestamp split = 0;
    int iterations = 10;
    std::uint64_t seed = 1;
    KeyMode key_mode = KeyMode::exact;
    NdcgConfig ndcg;

    void validate() const;

    DecayConfig decay() const { return {half_life, 1e-6}; }

    /// key=value lines; unknown keys are rejected. `split` accepts epoch
    /// seconds or a YYYY-MM-DD date.
    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);
    std::string to_text() const;
};

/// The documented run matrix: 3 flavors x 2 half-lives x k in {1, 3} x 2 splits.
std::vector<RunConfig> preset_run_matrix(std::uint64_t seed = 1);

/// Page reconstructed from a session: ranks 1..max(10, deepest click), clicked
/// URLs at their ranks and placeholders elsewhere.
std::vector<DocRef> reconstruct_page(const Session& session);

/// Replays sessions in time order, depositing per the store's flavor. Throws
/// an ordering error when sessions are not chronological.
void train(PheromoneStore& store, std::span<const Session> sessions, const ExaminationTable& table,
           KeyMode key_mode = KeyMode::exact);

/// Places recommendations at the top; a recommendation already on the page
/// is moved up rather than duplicated.
std::vector<DocRef> inject_recommendations(std::span<const DocRef> page,
                                           std::span<const DocRef> recs);

/// Ranks the user would click on the reordered page: an originally clicked
/// document is clicked wherever it lands within the depth the user reached
/// (the deepest original click). Nothing else is clicked.
std::vector<int> alleged_clicks(std::span<const Click> original_clicks,
                                std::span<const DocRef> injected_page);

struct SimOutcome {
    int iteration = 0;
    std::vector<DocRef> recommended;
    /// Empty unless the run asked to record pages.
    std::vector<DocRef> injected_page;
    std::vector<int> alleged_ranks;
    /// Per cutoff; 0 when no alleged click survives the reordering.
    std::vector<double> ndcg;
};

struct SessionOutcome {
    std::size_t session_index = 0;
    std::string user_id;
    std::string query;
    Timestamp start_time = 0;
    std::vector<int> cutoffs;
    std::vector<double> baseline;
    /// Mean over iterations, per cutoff.
    std::vector<double> simulated;
    std::vector<SimOutcome> iterations;
};

struct SimulationOptions {
    bool record_pages = false;
};

/// Frozen-store Monte Carlo over the test sessions (sessions without clicks are
/// skipped). Iteration seeds derive from (run seed, session index, iteration),
/// so the result does not depend on scheduling. Parallel over sessions.
std::vector<SessionOutcome> run_monte_carlo(const PheromoneStore& store,
                                            std::span<const Session> test_sessions,
                                            const RunConfig& cfg,
                                            const SimulationOptions& options = {});

/// Single-threaded reference for run_monte_carlo.
std::vector<SessionOutcome> run_monte_carlo_serial(const PheromoneStore& store,
                                                   std::span<const Session> test_sessions,
                                                   const RunConfig& cfg,
                                                   const SimulationOptions& options = {});

enum class Dataset { whole, navigational, non_navigational };
enum class Averaging { micro, macro_user, macro_query };
enum class DeltaClass { negligible, noticeable, material };

std::string_view to_string(Dataset dataset);
std::string_view to_string(Averaging averaging);

/// Under 5% negligible, 5-10% noticeable, above 10% material.
DeltaClass classify_delta(double delta_pct);

struct ReportRow {
    Dataset dataset = Dataset::whole;
    Averaging averaging = Averaging::micro;
    int cutoff = 1;
    std::optional<double> baseline;
    /// Indexed by Flavor.
    std::array<std::optional<double>, 3> value;
    std::array<std::optional<double>, 3> delta_pct;
};

struct Report {
    std::vector<ReportRow> rows;

    const ReportRow* find(Dataset dataset, Averaging averaging, int cutoff) const;
};

using IntentLabeler = std::function<Intent(const std::string& query)>;

/// Nine tables (dataset x averaging) of cutoff rows, one value column per
/// flavor present in `outcomes`. Throws no_data when no outcomes are given.
Report summarize(const std::map<Flavor, std::vector<SessionOutcome>>& outcomes,
                 const IntentLabeler& labeler);

/// TSV: dataset, averaging, cutoff, baseline, then value and delta per flavor.
/// Deltas carry "*" when noticeable and "**" when material; absent values are "-".
void write_report(std::ostream& out, const Report& report);

void write_outcomes(std::ostream& out, std::span<const SessionOutcome> outcomes);
std::vector<SessionOutcome> read_outcomes(std::istream& in);

/// Click model for synthetic users on top of the examination table.
struct SyntheticClickModel {
    std::string query = "synthetic query";
    Timestamp start = 1141171200;  // 2006-03-01 00:00:00 UTC
    Timestamp spacing = 900;
    /// Click probability of the top result when examined (if not the relevant one).
    double top_attractiveness = 1.0;
    /// Click probability of the other non-relevant results when examined.
    double distractor_attractiveness = 0.03;
};

/// Users browse `page` top-down: each result is examined with
/// p(position, last click) and clicked per its attractiveness; the relevant
/// document is always clicked when examined. Emits AOL rows, one user at a time.
std::vector<Interaction> gen_synthetic_log(int n_users, std::span<const DocRef> page,
                                           int relevant_rank, const ExaminationTable& table,
                                           std::uint64_t seed,
                                           const SyntheticClickModel& model = {});

void write_log(std::ostream& out, std::span<const Interaction> rows);

}  // namespace swarm
