#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace swarm {

/// Cosine of the term-frequency vectors of two query lists.
double cosine_similarity(std::span<const std::string> queries_a,
                         std::span<const std::string> queries_b);

/// Sample Pearson correlation. Throws undefined_correlation for zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

/// Two-sided p-value of r under the null of zero correlation (t with n-2 dof).
double pearson_p_value(double r, std::size_t n);

enum class Significance { none, at_10_percent, at_5_percent };

Significance pearson_significance(double r, std::size_t n);

/// One row of the controlled-experiment CSV.
struct ExperimentRecord {
    int participant_order = 0;
    std::string group;  // "control" or "experimental"
    std::string task_id;
    bool trivial = false;
    double time_seconds = 0.0;
    std::vector<std::string> queries;
};

/// CSV with header: order,group,task,trivial,seconds,queries (queries joined by '|').
std::vector<ExperimentRecord> read_experiment_csv(std::istream& in);

struct CorrelationCell {
    std::string group;
    bool trivial = false;
    std::string measure;  // "total" or "average"
    std::size_t participants = 0;
    std::optional<double> r;  // empty when the correlation is undefined
    Significance significance = Significance::none;
};

struct SimilarityCell {
    std::string task_id;
    std::string comparison;  // "control", "experimental" or "cross"
    double first_query = 0.0;
    double all_queries = 0.0;
    std::size_t pairs = 0;
};

struct ExperimentReport {
    std::vector<CorrelationCell> correlations;
    std::vector<SimilarityCell> similarities;
};

/// Order-vs-time correlations per group and task class, and within/cross
/// group query similarity per task. Throws no_data with fewer than three
/// participants in a group.
ExperimentReport analyze_experiment(std::span<const ExperimentRecord> records);

void write_experiment_report(std::ostream& out, const ExperimentReport& report);

}  // namespace swarm
