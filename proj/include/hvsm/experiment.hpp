#pragma once

#include "hvsm/baselines.hpp"
#include "hvsm/dataset.hpp"
#include "hvsm/effort_eval.hpp"
#include "hvsm/history.hpp"
#include "hvsm/rnn.hpp"
#include "hvsm/stats.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hvsm::experiment {

enum class MetricSet { Code, CodeAndProcess };

struct ProjectConfig {
    ProjectManifest manifest;
    std::string train_version;
    std::string test_version;
};

struct ExperimentConfig {
    std::vector<ProjectConfig> projects;
    /// HVSM window; empty means every version up to the anchor.
    std::optional<std::size_t> len;
    MetricSet metric_set = MetricSet::Code;
    Schema code_metrics = promise_code_metrics();
    MetricsCsvOptions csv;
    /// "rnn" plus any of "lr", "nb", "knn", "nn".
    std::vector<std::string> techniques = {"rnn", "lr", "nb", "knn", "nn"};
    rnn::Hyperparams rnn;
    baselines::Options baselines;
    std::size_t repeats = 10;
    std::uint64_t seed = 1;
    /// Scott-Knott over every (project, repeat) value instead of per-project means.
    bool sk_pool_runs = false;
    /// Worker threads; 0 picks the hardware concurrency.
    std::size_t threads = 0;
    std::filesystem::path output_dir = "hvsm-out";

    void validate() const;
};

/// Reads the YAML experiment file. Relative CSV paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir);

inline constexpr std::array<std::string_view, 6> kMetricNames = {"ce_0.1", "ce_0.2", "ce_0.5", "ce_1.0", "acc", "auc"};

double metric_value(const eval::CeReport& r, std::size_t metric);

struct HvsmSummary {
    std::string anchor;
    std::vector<std::string> version_sequence;
    double mean_length = 0.0;
    std::size_t files = 0;
    std::size_t developing = 0;
    double developing_percent = 0.0;
};

struct TechniqueRuns {
    std::string technique;
    std::vector<eval::CeReport> runs; ///< one per repeat; deterministic techniques are replicated
    eval::CeCurve curve;              ///< from the first run
};

struct ProjectResult {
    std::string project;
    std::string train_version;
    std::string test_version;
    HvsmSummary train;
    HvsmSummary test;
    std::vector<TechniqueRuns> techniques;
    std::optional<std::string> error;

    const TechniqueRuns* find(std::string_view technique) const;
};

struct MetricAggregate {
    /// technique -> mean over successful projects of the per-project run means
    std::map<std::string, double> mean;
    std::map<std::string, double> average_rank;
    stats::SkGrouping sk;
    /// baseline -> counts of the reference technique against it
    std::map<std::string, stats::WtlCounts> wtl;
    /// baseline -> project -> verdict
    std::map<std::string, std::map<std::string, stats::WtlResult>> wtl_detail;
};

struct ExperimentReport {
    std::vector<std::string> techniques;
    std::string reference;
    std::size_t repeats = 0;
    std::vector<ProjectResult> projects;
    std::map<std::string, MetricAggregate> aggregates; ///< keyed by metric name
};

/// technique -> average of its per-project ranks (1 = highest value; ties share the mean rank).
/// Input is project -> technique -> value; every project must list the same techniques.
std::map<std::string, double> average_rank(const std::map<std::string, std::map<std::string, double>>& table);

/// Mean of one metric over a technique's runs.
double run_mean(const TechniqueRuns& t, std::size_t metric);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Same as run_experiment with histories already loaded (aligned with cfg.projects).
ExperimentReport run_on_histories(const ExperimentConfig& cfg, const std::vector<ProjectHistory>& histories);

/// Recomputes every aggregate from the per-run values.
void aggregate(ExperimentReport& report, bool sk_pool_runs = false);

/// Writes report.json, summary.csv, ce_curves/, sk_groups.txt and win_tie_loss.csv.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

} // namespace hvsm::experiment
