#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotraj/analysis.hpp"
#include "neurotraj/evaluator.hpp"
#include "neurotraj/genome.hpp"
#include "neurotraj/objectives.hpp"
#include "neurotraj/trajectory.hpp"

namespace neurotraj {

enum class Algorithm { kNsga2, kMoead };

std::string_view to_token(Algorithm a);
Algorithm algorithm_from_token(std::string_view token);

struct DatasetParams {
  double duration_s = 600.0;
  double lane_change_rate = 0.1;
  double mean_speed = 26.0;
  std::size_t tau = kDefaultTau;
  SplitRatio ratio;

  friend bool operator==(const DatasetParams&, const DatasetParams&) = default;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kNsga2;
  std::vector<ObjectiveId> objective_ids{ObjectiveId::kRmse, ObjectiveId::kL2LateralVelocity,
                                         ObjectiveId::kL3LongitudinalVelocity};
  /// NSGA-II population; for MOEA/D the lattice resolution is chosen to match it.
  std::size_t population = 25;
  std::size_t generations = 20;
  std::size_t runs = 12;
  std::uint64_t base_seed = 1;
  DatasetParams dataset;
  SurrogateConfig surrogate;
  ObjectiveOptions objective_options;
  double crossover_rate = 1.0;
  double mutation_rate = 0.5;
  std::size_t tournament_size = 3;
  std::size_t neighborhood_size = 7;
  std::optional<std::size_t> archive_cap;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Missing fields keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& doc);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct Preset {
  std::string name;
  std::string description;
  std::string source;  ///< experiment number and batch this preset mirrors
  ExperimentConfig config;
};

/// exp1..exp13.
const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);

/// max(1, round(value * scale)).
std::size_t scaled_count(std::size_t value, double scale);
ExperimentConfig scale_config(ExperimentConfig cfg, double scale);

/// Subproblem count MOEA/D will actually use for this config.
std::size_t effective_population(const ExperimentConfig& cfg);

/// Shared dataset for every run of an experiment (seeded by base_seed).
Dataset build_dataset(const ExperimentConfig& cfg);

struct IndividualRecord {
  Genome genome;
  ObjectiveVector objectives;
  ObjectiveVector test_objectives;
  Skills skills;
  double rmse_validation = 0.0;
  double rmse_test = 0.0;
  std::optional<std::size_t> rank;
  std::optional<double> crowding;
  std::optional<std::size_t> subproblem;
  std::optional<ValidityReport> validity;

  nlohmann::ordered_json to_json() const;
  static IndividualRecord from_json(const nlohmann::json& doc, const std::vector<ObjectiveId>& ids);
};

struct GenerationSnapshot {
  std::size_t generation = 0;
  std::vector<IndividualRecord> population;
  std::vector<double> ideal;               ///< MOEA/D only
  std::vector<IndividualRecord> archive;   ///< MOEA/D only

  /// Objective rows of the snapshot's front: rank-0 members (NSGA-II) or the archive (MOEA/D).
  std::vector<std::vector<double>> front(Algorithm algorithm) const;

  nlohmann::ordered_json to_json() const;
  static GenerationSnapshot from_json(const nlohmann::json& doc, const std::vector<ObjectiveId>& ids);
};

struct RunRecord {
  std::size_t run_index = 0;
  std::uint64_t run_seed = 0;
  Algorithm algorithm = Algorithm::kNsga2;
  std::vector<ObjectiveId> objective_ids;
  std::size_t population_size = 0;
  GenerationSnapshot initial;
  std::vector<GenerationSnapshot> snapshots;  ///< one per generation, 1-based
  std::vector<IndividualRecord> final_front;  ///< with validity reports
  double wall_time_s = 0.0;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

struct RunOptions {
  std::size_t jobs = 1;
};

/// Runs `cfg.runs` independent executions with seeds base_seed + run index. A failing run
/// records its error and does not stop the others.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Same, with a caller-supplied evaluator in place of the surrogate built from `cfg`.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator,
                                      const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Summaries

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> std;
  std::size_t n = 0;
  std::vector<double> per_run_means;
};

struct MetricComparison {
  std::optional<double> permutation_p;
  std::optional<double> ranksum_p;
  bool significant = false;
};

struct SummaryOptions {
  double alpha = 0.05;
  std::size_t comparisons = 2;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0x5eed;
};

inline const std::vector<std::string> kSummaryMetrics{"rmse_val_all", "rmse_test_all", "rmse_val_valid",
                                                      "rmse_test_valid"};

struct SummaryReport {
  std::size_t total_models = 0;
  std::size_t valid_models = 0;
  std::size_t failed_runs = 0;
  std::map<std::string, MetricSummary> metrics;
  std::optional<double> alpha;
  std::optional<std::size_t> comparisons;
  std::optional<double> adjusted_alpha;
  std::map<std::string, MetricComparison> comparison;

  std::string fraction() const;  ///< "26/300"
  long percentage() const;       ///< round(100 * valid / total)
  std::string label() const;     ///< "26/300, 9%"
  nlohmann::ordered_json to_json() const;
};

SummaryReport summarize(const std::vector<RunRecord>& records, const std::vector<RunRecord>* against = nullptr,
                        const SummaryOptions& options = {});

// ---------------------------------------------------------------------------
// Persistence: config.json, run_<k>.jsonl, final_front_<k>.csv, summary.json

void write_config(const ExperimentConfig& cfg, const std::filesystem::path& directory);
void write_run(const RunRecord& record, const std::filesystem::path& directory);
void write_summary(const SummaryReport& summary, const std::filesystem::path& directory);
void write_experiment(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                      const std::filesystem::path& directory);

std::string final_front_csv(const RunRecord& record);

struct LoadedExperiment {
  ExperimentConfig config;
  std::vector<RunRecord> records;
};

/// Throws MalformedDataError when records are missing or unparsable.
LoadedExperiment load_experiment(const std::filesystem::path& directory);

}  // namespace neurotraj
