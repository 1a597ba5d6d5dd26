#include "neurotraj/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "neurotraj/errors.hpp"
#include "neurotraj/moead.hpp"
#include "neurotraj/nsga2.hpp"

namespace neurotraj {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig preset_config(Algorithm algorithm, std::vector<ObjectiveId> ids, std::size_t population,
                               std::size_t generations) {
  ExperimentConfig cfg;
  cfg.algorithm = algorithm;
  cfg.objective_ids = std::move(ids);
  cfg.population = population;
  cfg.generations = generations;
  cfg.runs = 12;
  return cfg;
}

ordered_json values_json(const std::vector<double>& v) { return ordered_json(v); }

ObjectiveVector objective_vector_from(const nlohmann::json& doc, const std::vector<ObjectiveId>& ids) {
  auto values = doc.get<std::vector<double>>();
  if (values.size() != ids.size()) throw MalformedDataError("objective vector length does not match objective ids");
  return {ids, std::move(values)};
}

IndividualRecord record_of(const Individual& ind) {
  IndividualRecord r;
  r.genome = ind.genome;
  r.objectives = ind.objectives;
  if (ind.evaluation) {
    r.test_objectives = ind.evaluation->test_objectives;
    r.skills = ind.evaluation->skills;
    r.rmse_validation = ind.evaluation->rmse_validation;
    r.rmse_test = ind.evaluation->rmse_test;
  }
  return r;
}

IndividualRecord final_record_of(const Individual& ind) {
  auto r = record_of(ind);
  if (ind.evaluation) r.validity = classify_validity(ind.evaluation->predicted_test);
  return r;
}

GenerationSnapshot snapshot_of(const Nsga2& engine, std::size_t generation) {
  GenerationSnapshot snap;
  snap.generation = generation;
  for (const auto& ind : engine.population()) {
    auto r = record_of(ind);
    r.rank = ind.rank;
    r.crowding = ind.crowding;
    snap.population.push_back(std::move(r));
  }
  return snap;
}

GenerationSnapshot snapshot_of(const Moead& engine, std::size_t generation) {
  GenerationSnapshot snap;
  snap.generation = generation;
  const auto& state = engine.state();
  for (std::size_t i = 0; i < state.population.size(); ++i) {
    auto r = record_of(state.population[i]);
    r.subproblem = i;
    snap.population.push_back(std::move(r));
  }
  snap.ideal = state.ideal;
  for (const auto& ind : state.archive) snap.archive.push_back(record_of(ind));
  return snap;
}

RunRecord execute_run(const ExperimentConfig& cfg, const Evaluator& evaluator, std::size_t run_index) {
  RunRecord record;
  record.run_index = run_index;
  record.run_seed = cfg.base_seed + run_index;
  record.algorithm = cfg.algorithm;
  record.objective_ids = cfg.objective_ids;

  const auto started = std::chrono::steady_clock::now();
  try {
    Rng rng(record.run_seed);
    const VariationOperators ops{cfg.crossover_rate, cfg.mutation_rate};
    if (cfg.algorithm == Algorithm::kNsga2) {
      Nsga2 engine({cfg.population, cfg.tournament_size, ops}, evaluator);
      record.population_size = cfg.population;
      engine.initialize(rng);
      record.initial = snapshot_of(engine, 0);
      for (std::size_t g = 1; g <= cfg.generations; ++g) {
        engine.step(rng);
        record.snapshots.push_back(snapshot_of(engine, g));
      }
      for (const auto& ind : engine.population()) {
        if (ind.rank == 0) record.final_front.push_back(final_record_of(ind));
      }
    } else {
      MoeadConfig mc;
      mc.resolution = resolution_for_population(cfg.objective_ids.size(), cfg.population);
      mc.neighborhood_size = cfg.neighborhood_size;
      mc.operators = ops;
      mc.archive_cap = cfg.archive_cap;
      Moead engine(mc, evaluator);
      record.population_size = engine.lattice().size();
      engine.initialize(rng);
      record.initial = snapshot_of(engine, 0);
      for (std::size_t g = 1; g <= cfg.generations; ++g) {
        engine.step(rng);
        record.snapshots.push_back(snapshot_of(engine, g));
      }
      for (const auto& ind : engine.state().archive) record.final_front.push_back(final_record_of(ind));
    }
  } catch (const std::exception& e) {
    record.error = "run " + std::to_string(run_index) + " (seed " + std::to_string(record.run_seed) + "): " + e.what();
  }
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct MetricSamples {
  std::vector<double> pooled;
  std::vector<double> per_run_means;
};

std::map<std::string, MetricSamples> collect_metrics(const std::vector<RunRecord>& records) {
  std::map<std::string, MetricSamples> out;
  for (const auto& name : kSummaryMetrics) out[name];
  for (const auto& run : records) {
    if (!run.ok()) continue;
    std::map<std::string, std::vector<double>> in_run;
    for (const auto& ind : run.final_front) {
      in_run["rmse_val_all"].push_back(ind.rmse_validation);
      in_run["rmse_test_all"].push_back(ind.rmse_test);
      if (ind.validity && ind.validity->valid) {
        in_run["rmse_val_valid"].push_back(ind.rmse_validation);
        in_run["rmse_test_valid"].push_back(ind.rmse_test);
      }
    }
    for (auto& [name, values] : in_run) {
      if (values.empty()) continue;
      auto& samples = out[name];
      samples.pooled.insert(samples.pooled.end(), values.begin(), values.end());
      samples.per_run_means.push_back(mean_of(values));
    }
  }
  return out;
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::vector<std::filesystem::path> run_files(const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> files;
  for (std::size_t k = 0;; ++k) {
    auto p = directory / ("run_" + std::to_string(k) + ".jsonl");
    if (!std::filesystem::exists(p)) break;
    files.push_back(std::move(p));
  }
  return files;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

}  // namespace

std::string_view to_token(Algorithm a) { return a == Algorithm::kNsga2 ? "nsga2" : "moead"; }

Algorithm algorithm_from_token(std::string_view token) {
  if (token == "nsga2") return Algorithm::kNsga2;
  if (token == "moead") return Algorithm::kMoead;
  throw ConfigError("unknown algorithm '" + std::string(token) + "' (expected nsga2 or moead)");
}

void ExperimentConfig::validate() const {
  validate_objective_ids(objective_ids);
  if (algorithm == Algorithm::kMoead && objective_ids.size() != 2 && objective_ids.size() != 3) {
    throw ConfigError("MOEA/D supports 2 or 3 objectives");
  }
  if (population < 2) throw ConfigError("population must be at least 2");
  if (generations < 1) throw ConfigError("generations must be at least 1");
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("crossover rate must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation rate must lie in [0, 1]");
  if (tournament_size < 1) throw ConfigError("tournament size must be at least 1");
  if (neighborhood_size < 2) throw ConfigError("neighbourhood size must be at least 2");
  if (dataset.tau < 3) throw ConfigError("tau must be at least 3");
  ScenarioConfig sc;
  sc.duration_s = dataset.duration_s;
  sc.lane_change_rate = dataset.lane_change_rate;
  sc.mean_speed = dataset.mean_speed;
  sc.validate();
  surrogate.validate();
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json ids = ordered_json::array();
  for (auto id : objective_ids) ids.push_back(std::string(to_token(id)));
  ordered_json doc;
  doc["algorithm"] = std::string(to_token(algorithm));
  doc["objectives"] = std::move(ids);
  doc["population"] = population;
  doc["generations"] = generations;
  doc["runs"] = runs;
  doc["base_seed"] = base_seed;
  doc["dataset"] = {{"duration_s", dataset.duration_s},
                    {"lane_change_rate", dataset.lane_change_rate},
                    {"mean_speed", dataset.mean_speed},
                    {"tau", dataset.tau},
                    {"ratios", {dataset.ratio.train, dataset.ratio.validation, dataset.ratio.test}}};
  doc["surrogate"] = surrogate.to_json();
  doc["signed_lateral_velocity"] = objective_options.signed_lateral_velocity;
  doc["crossover_rate"] = crossover_rate;
  doc["mutation_rate"] = mutation_rate;
  doc["tournament_size"] = tournament_size;
  doc["neighborhood_size"] = neighborhood_size;
  doc["archive_cap"] = archive_cap ? ordered_json(*archive_cap) : ordered_json(nullptr);
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (doc.contains("algorithm")) cfg.algorithm = algorithm_from_token(doc.at("algorithm").get<std::string>());
    if (doc.contains("objectives")) {
      cfg.objective_ids.clear();
      for (const auto& t : doc.at("objectives")) cfg.objective_ids.push_back(objective_from_token(t.get<std::string>()));
    }
    cfg.population = doc.value("population", cfg.population);
    cfg.generations = doc.value("generations", cfg.generations);
    cfg.runs = doc.value("runs", cfg.runs);
    cfg.base_seed = doc.value("base_seed", cfg.base_seed);
    if (doc.contains("dataset")) {
      const auto& d = doc.at("dataset");
      cfg.dataset.duration_s = d.value("duration_s", cfg.dataset.duration_s);
      cfg.dataset.lane_change_rate = d.value("lane_change_rate", cfg.dataset.lane_change_rate);
      cfg.dataset.mean_speed = d.value("mean_speed", cfg.dataset.mean_speed);
      cfg.dataset.tau = d.value("tau", cfg.dataset.tau);
      if (d.contains("ratios")) {
        const auto& r = d.at("ratios");
        cfg.dataset.ratio = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
      }
    }
    if (doc.contains("surrogate")) cfg.surrogate = SurrogateConfig::from_json(doc.at("surrogate"));
    cfg.objective_options.signed_lateral_velocity =
        doc.value("signed_lateral_velocity", cfg.objective_options.signed_lateral_velocity);
    cfg.crossover_rate = doc.value("crossover_rate", cfg.crossover_rate);
    cfg.mutation_rate = doc.value("mutation_rate", cfg.mutation_rate);
    cfg.tournament_size = doc.value("tournament_size", cfg.tournament_size);
    cfg.neighborhood_size = doc.value("neighborhood_size", cfg.neighborhood_size);
    if (doc.contains("archive_cap") && !doc.at("archive_cap").is_null()) {
      cfg.archive_cap = doc.at("archive_cap").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

const std::vector<Preset>& presets() {
  using enum ObjectiveId;
  static const std::vector<Preset> catalog = [] {
    const auto nsga2 = Algorithm::kNsga2;
    const auto moead = Algorithm::kMoead;
    std::vector<Preset> p;
    // Batch 1: NSGA-II only, population 25 for 20 generations.
    p.push_back({"exp1", "NSGA-II on (rmse, l2, l3)", "Experiment 1, batch 1",
                 preset_config(nsga2, {kRmse, kL2LateralVelocity, kL3LongitudinalVelocity}, 25, 20)});
    p.push_back({"exp2", "NSGA-II on (signloss, l2, l3)", "Experiment 2, batch 1",
                 preset_config(nsga2, {kSignLoss, kL2LateralVelocity, kL3LongitudinalVelocity}, 25, 20)});
    p.push_back({"exp3", "NSGA-II on (rmse, l1, l3)", "Experiment 3, batch 1",
                 preset_config(nsga2, {kRmse, kL1DistanceFeedback, kL3LongitudinalVelocity}, 25, 20)});
    p.push_back({"exp4", "NSGA-II on (signloss, l1, l3)", "Experiment 4, batch 1",
                 preset_config(nsga2, {kSignLoss, kL1DistanceFeedback, kL3LongitudinalVelocity}, 25, 20)});
    p.push_back({"exp5", "NSGA-II on (l1, l2, l3), no ground-truth objective", "Experiment 5, batch 1",
                 preset_config(nsga2, {kL1DistanceFeedback, kL2LateralVelocity, kL3LongitudinalVelocity}, 25, 20)});
    // Batch 2: both engines, population 45 for 15 generations.
    p.push_back({"exp6", "NSGA-II on (rmse, l2, l3)", "Experiment 6, batch 2",
                 preset_config(nsga2, {kRmse, kL2LateralVelocity, kL3LongitudinalVelocity}, 45, 15)});
    p.push_back({"exp7", "MOEA/D on (rmse, l2, l3)", "Experiment 7, batch 2",
                 preset_config(moead, {kRmse, kL2LateralVelocity, kL3LongitudinalVelocity}, 45, 15)});
    p.push_back({"exp8", "NSGA-II on (rmse, l1, l3)", "Experiment 8, batch 2",
                 preset_config(nsga2, {kRmse, kL1DistanceFeedback, kL3LongitudinalVelocity}, 45, 15)});
    p.push_back({"exp9", "MOEA/D on (rmse, l1, l3)", "Experiment 9, batch 2",
                 preset_config(moead, {kRmse, kL1DistanceFeedback, kL3LongitudinalVelocity}, 45, 15)});
    // Batch 3: bi-objective; sizing reuses batch 2.
    p.push_back({"exp10", "NSGA-II on (rmse, l2)", "Experiment 10, batch 3",
                 preset_config(nsga2, {kRmse, kL2LateralVelocity}, 45, 15)});
    p.push_back({"exp11", "MOEA/D on (rmse, l2)", "Experiment 11, batch 3",
                 preset_config(moead, {kRmse, kL2LateralVelocity}, 45, 15)});
    p.push_back({"exp12", "NSGA-II on (rmse, l1)", "Experiment 12, batch 3",
                 preset_config(nsga2, {kRmse, kL1DistanceFeedback}, 45, 15)});
    p.push_back({"exp13", "MOEA/D on (rmse, l1)", "Experiment 13, batch 3",
                 preset_config(moead, {kRmse, kL1DistanceFeedback}, 45, 15)});
    return p;
  }();
  return catalog;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected exp1..exp13)");
}

std::size_t scaled_count(std::size_t value, double scale) {
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  const auto scaled = std::llround(static_cast<double>(value) * scale);
  return static_cast<std::size_t>(std::max<long long>(1, scaled));
}

ExperimentConfig scale_config(ExperimentConfig cfg, double scale) {
  cfg.population = std::max<std::size_t>(2, scaled_count(cfg.population, scale));
  cfg.generations = scaled_count(cfg.generations, scale);
  cfg.runs = scaled_count(cfg.runs, scale);
  return cfg;
}

std::size_t effective_population(const ExperimentConfig& cfg) {
  if (cfg.algorithm == Algorithm::kNsga2) return cfg.population;
  const auto m = cfg.objective_ids.size();
  return lattice_size(m, resolution_for_population(m, cfg.population));
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  ScenarioConfig sc;
  sc.duration_s = cfg.dataset.duration_s;
  sc.lane_change_rate = cfg.dataset.lane_change_rate;
  sc.mean_speed = cfg.dataset.mean_speed;
  sc.seed = cfg.base_seed;
  return window_and_split(generate_scenario(sc), cfg.dataset.tau, cfg.dataset.ratio, cfg.base_seed);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  auto data = std::make_shared<const Dataset>(build_dataset(cfg));
  const SurrogateEvaluator evaluator(data, cfg.objective_ids, cfg.surrogate, cfg.objective_options);
  return run_experiment(cfg, evaluator, options);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator,
                                      const RunOptions& options) {
  cfg.validate();
  if (evaluator.objective_ids() != cfg.objective_ids) throw ConfigError("evaluator objectives differ from the config");
  std::vector<RunRecord> records(cfg.runs);
  const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, cfg.runs);
  if (workers == 1) {
    for (std::size_t k = 0; k < cfg.runs; ++k) records[k] = execute_run(cfg, evaluator, k);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < cfg.runs; k = next++) records[k] = execute_run(cfg, evaluator, k);
    });
  }
  pool.clear();
  return records;
}

// ---------------------------------------------------------------------------

ordered_json IndividualRecord::to_json() const {
  ordered_json doc;
  doc["genome"] = std::vector<int>(genome.indices.begin(), genome.indices.end());
  doc["objectives"] = values_json(objectives.values);
  doc["test_objectives"] = values_json(test_objectives.values);
  doc["skills"] = {skills.accuracy, skills.smoothness, skills.speed};
  doc["rmse_val"] = rmse_validation;
  doc["rmse_test"] = rmse_test;
  if (rank) doc["rank"] = *rank;
  if (crowding) doc["crowding"] = std::isinf(*crowding) ? ordered_json("inf") : ordered_json(*crowding);
  if (subproblem) doc["subproblem"] = *subproblem;
  if (validity) doc["validity"] = validity->to_json();
  return doc;
}

IndividualRecord IndividualRecord::from_json(const nlohmann::json& doc, const std::vector<ObjectiveId>& ids) {
  IndividualRecord r;
  const auto genes = doc.at("genome").get<std::vector<int>>();
  if (genes.size() != kLocusCount) throw MalformedDataError("genome must have 13 loci");
  for (std::size_t i = 0; i < kLocusCount; ++i) r.genome[i] = static_cast<std::uint8_t>(genes[i]);
  if (!is_valid(r.genome)) throw MalformedDataError("genome out of bounds: " + to_string(r.genome));
  r.objectives = objective_vector_from(doc.at("objectives"), ids);
  r.test_objectives = objective_vector_from(doc.at("test_objectives"), ids);
  const auto skills = doc.at("skills").get<std::vector<double>>();
  if (skills.size() != 3) throw MalformedDataError("skills must have 3 entries");
  r.skills = {skills[0], skills[1], skills[2]};
  r.rmse_validation = doc.at("rmse_val").get<double>();
  r.rmse_test = doc.at("rmse_test").get<double>();
  if (doc.contains("rank")) r.rank = doc.at("rank").get<std::size_t>();
  if (doc.contains("crowding")) {
    const auto& c = doc.at("crowding");
    r.crowding = c.is_string() ? std::numeric_limits<double>::infinity() : c.get<double>();
  }
  if (doc.contains("subproblem")) r.subproblem = doc.at("subproblem").get<std::size_t>();
  if (doc.contains("validity")) {
    const auto& v = doc.at("validity");
    ValidityReport report;
    report.valid = v.at("valid").get<bool>();
    report.spread_ok = v.at("spread_ok").get<bool>();
    report.symmetry_ok = v.at("symmetry_ok").get<bool>();
    report.final_position_ok = v.at("final_position_ok").get<bool>();
    report.max_abs_x = v.at("max_abs_x").get<double>();
    report.mean_final_x = v.at("mean_final_x").get<double>();
    report.mean_final_y = v.at("mean_final_y").get<double>();
    r.validity = report;
  }
  return r;
}

std::vector<std::vector<double>> GenerationSnapshot::front(Algorithm algorithm) const {
  std::vector<std::vector<double>> rows;
  if (algorithm == Algorithm::kMoead) {
    for (const auto& r : archive) rows.push_back(r.objectives.values);
    return rows;
  }
  for (const auto& r : population) {
    if (r.rank.value_or(0) == 0) rows.push_back(r.objectives.values);
  }
  return rows;
}

ordered_json GenerationSnapshot::to_json() const {
  ordered_json doc;
  doc["generation"] = generation;
  doc["population"] = ordered_json::array();
  for (const auto& r : population) doc["population"].push_back(r.to_json());
  if (!ideal.empty()) {
    doc["ideal"] = values_json(ideal);
    doc["archive"] = ordered_json::array();
    for (const auto& r : archive) doc["archive"].push_back(r.to_json());
  }
  return doc;
}

GenerationSnapshot GenerationSnapshot::from_json(const nlohmann::json& doc, const std::vector<ObjectiveId>& ids) {
  GenerationSnapshot snap;
  snap.generation = doc.at("generation").get<std::size_t>();
  for (const auto& r : doc.at("population")) snap.population.push_back(IndividualRecord::from_json(r, ids));
  if (doc.contains("ideal")) snap.ideal = doc.at("ideal").get<std::vector<double>>();
  if (doc.contains("archive")) {
    for (const auto& r : doc.at("archive")) snap.archive.push_back(IndividualRecord::from_json(r, ids));
  }
  return snap;
}

// ---------------------------------------------------------------------------

std::string SummaryReport::fraction() const {
  return std::to_string(valid_models) + "/" + std::to_string(total_models);
}

long SummaryReport::percentage() const {
  if (total_models == 0) return 0;
  return std::lround(100.0 * static_cast<double>(valid_models) / static_cast<double>(total_models));
}

std::string SummaryReport::label() const { return fraction() + ", " + std::to_string(percentage()) + "%"; }

ordered_json SummaryReport::to_json() const {
  ordered_json doc;
  doc["total_models"] = total_models;
  doc["valid_models"] = valid_models;
  doc["fraction"] = fraction();
  doc["percentage"] = percentage();
  doc["label"] = label();
  doc["failed_runs"] = failed_runs;
  ordered_json m = ordered_json::object();
  for (const auto& name : kSummaryMetrics) {
    const auto it = metrics.find(name);
    if (it == metrics.end()) continue;
    m[name] = {{"mean", optional_json(it->second.mean)},
               {"std", optional_json(it->second.std)},
               {"n", it->second.n},
               {"per_run_means", it->second.per_run_means}};
  }
  doc["metrics"] = std::move(m);
  if (adjusted_alpha) {
    ordered_json c;
    c["alpha"] = optional_json(alpha);
    c["comparisons"] = comparisons.value_or(1);
    c["bonferroni_alpha"] = *adjusted_alpha;
    ordered_json per = ordered_json::object();
    for (const auto& name : kSummaryMetrics) {
      const auto it = comparison.find(name);
      if (it == comparison.end()) continue;
      per[name] = {{"permutation_p", optional_json(it->second.permutation_p)},
                   {"ranksum_p", optional_json(it->second.ranksum_p)},
                   {"significant", it->second.significant}};
    }
    c["metrics"] = std::move(per);
    doc["comparison"] = std::move(c);
  }
  return doc;
}

SummaryReport summarize(const std::vector<RunRecord>& records, const std::vector<RunRecord>* against,
                        const SummaryOptions& options) {
  if (records.empty()) throw ContractError("summary needs at least one run record");
  SummaryReport report;
  for (const auto& run : records) {
    if (!run.ok()) {
      ++report.failed_runs;
      continue;
    }
    for (const auto& ind : run.final_front) {
      ++report.total_models;
      if (ind.validity && ind.validity->valid) ++report.valid_models;
    }
  }

  const auto samples = collect_metrics(records);
  for (const auto& [name, s] : samples) {
    MetricSummary ms;
    ms.n = s.pooled.size();
    ms.per_run_means = s.per_run_means;
    if (!s.pooled.empty()) {
      ms.mean = mean_of(s.pooled);
      ms.std = std_of(s.pooled);
    }
    report.metrics[name] = std::move(ms);
  }

  if (against != nullptr) {
    report.alpha = options.alpha;
    report.comparisons = options.comparisons;
    report.adjusted_alpha = bonferroni(options.alpha, options.comparisons);
    const auto other = collect_metrics(*against);
    for (const auto& name : kSummaryMetrics) {
      const auto& a = samples.at(name).per_run_means;
      const auto& b = other.at(name).per_run_means;
      MetricComparison mc;
      if (!a.empty() && !b.empty()) {
        mc.permutation_p = permutation_test(a, b, options.resamples, options.seed);
        mc.ranksum_p = ranksum_test(a, b);
        mc.significant = *mc.permutation_p < *report.adjusted_alpha && *mc.ranksum_p < *report.adjusted_alpha;
      }
      report.comparison[name] = mc;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

void write_config(const ExperimentConfig& cfg, const std::filesystem::path& directory) {
  write_text(directory / "config.json", cfg.to_json().dump(2) + "\n");
}

std::string final_front_csv(const RunRecord& record) {
  std::ostringstream os;
  os << "index";
  for (std::size_t i = 1; i <= kLocusCount; ++i) os << ",g" << i;
  for (auto id : record.objective_ids) os << ',' << to_token(id);
  for (auto id : record.objective_ids) os << ",test_" << to_token(id);
  os << ",rmse_val,rmse_test,s_acc,s_smooth,s_speed,valid,spread_ok,symmetry_ok,final_position_ok,"
        "max_abs_x,mean_final_x,mean_final_y\n";
  for (std::size_t k = 0; k < record.final_front.size(); ++k) {
    const auto& r = record.final_front[k];
    os << k;
    for (auto g : r.genome.indices) os << ',' << static_cast<int>(g);
    for (double v : r.objectives.values) os << ',' << format_double(v);
    for (double v : r.test_objectives.values) os << ',' << format_double(v);
    os << ',' << format_double(r.rmse_validation) << ',' << format_double(r.rmse_test) << ','
       << format_double(r.skills.accuracy) << ',' << format_double(r.skills.smoothness) << ','
       << format_double(r.skills.speed);
    const ValidityReport v = r.validity.value_or(ValidityReport{});
    os << ',' << int(v.valid) << ',' << int(v.spread_ok) << ',' << int(v.symmetry_ok) << ','
       << int(v.final_position_ok) << ',' << format_double(v.max_abs_x) << ',' << format_double(v.mean_final_x)
       << ',' << format_double(v.mean_final_y) << '\n';
  }
  return os.str();
}

void write_run(const RunRecord& record, const std::filesystem::path& directory) {
  std::ostringstream os;
  ordered_json header;
  header["kind"] = "run";
  header["run"] = record.run_index;
  header["run_seed"] = record.run_seed;
  header["algorithm"] = std::string(to_token(record.algorithm));
  header["objectives"] = ordered_json::array();
  for (auto id : record.objective_ids) header["objectives"].push_back(std::string(to_token(id)));
  header["population_size"] = record.population_size;
  os << header.dump() << '\n';
  if (record.ok()) {
    auto initial = record.initial.to_json();
    initial["kind"] = "initial";
    os << initial.dump() << '\n';
    for (const auto& snap : record.snapshots) {
      auto line = snap.to_json();
      line["kind"] = "generation";
      os << line.dump() << '\n';
    }
  }
  ordered_json final_line;
  final_line["kind"] = "final";
  final_line["final_front"] = ordered_json::array();
  for (const auto& r : record.final_front) final_line["final_front"].push_back(r.to_json());
  final_line["wall_time_s"] = record.wall_time_s;
  final_line["error"] = record.error ? ordered_json(*record.error) : ordered_json(nullptr);
  os << final_line.dump() << '\n';

  const auto k = std::to_string(record.run_index);
  write_text(directory / ("run_" + k + ".jsonl"), os.str());
  write_text(directory / ("final_front_" + k + ".csv"), final_front_csv(record));
}

void write_summary(const SummaryReport& summary, const std::filesystem::path& directory) {
  write_text(directory / "summary.json", summary.to_json().dump(2) + "\n");
}

void write_experiment(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                      const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  // Stale runs from an earlier, larger invocation would be picked up by load_experiment.
  for (const auto& stale : run_files(directory)) {
    std::filesystem::remove(stale);
  }
  write_config(cfg, directory);
  for (const auto& r : records) write_run(r, directory);
  write_summary(summarize(records), directory);
}

LoadedExperiment load_experiment(const std::filesystem::path& directory) {
  LoadedExperiment loaded;
  std::ifstream cfg_in(directory / "config.json");
  if (!cfg_in) throw MalformedDataError("missing config.json in " + directory.string());
  try {
    loaded.config = ExperimentConfig::from_json(nlohmann::json::parse(cfg_in));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDataError(std::string("bad config.json: ") + e.what());
  } catch (const ConfigError& e) {
    throw MalformedDataError(std::string("bad config.json: ") + e.what());
  }

  const auto files = run_files(directory);
  if (files.empty()) throw MalformedDataError("no run records in " + directory.string());
  for (const auto& file : files) {
    std::ifstream in(file);
    RunRecord record;
    bool saw_header = false;
    bool saw_final = false;
    std::string line;
    std::size_t line_no = 0;
    try {
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto doc = nlohmann::json::parse(line);
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "run") {
          record.run_index = doc.at("run").get<std::size_t>();
          record.run_seed = doc.at("run_seed").get<std::uint64_t>();
          record.algorithm = algorithm_from_token(doc.at("algorithm").get<std::string>());
          for (const auto& t : doc.at("objectives")) record.objective_ids.push_back(objective_from_token(t.get<std::string>()));
          record.population_size = doc.at("population_size").get<std::size_t>();
          saw_header = true;
        } else if (!saw_header) {
          throw MalformedDataError("record line before run header");
        } else if (kind == "initial") {
          record.initial = GenerationSnapshot::from_json(doc, record.objective_ids);
        } else if (kind == "generation") {
          record.snapshots.push_back(GenerationSnapshot::from_json(doc, record.objective_ids));
        } else if (kind == "final") {
          for (const auto& r : doc.at("final_front")) {
            record.final_front.push_back(IndividualRecord::from_json(r, record.objective_ids));
          }
          record.wall_time_s = doc.at("wall_time_s").get<double>();
          if (!doc.at("error").is_null()) record.error = doc.at("error").get<std::string>();
          saw_final = true;
        } else {
          throw MalformedDataError("unknown record kind '" + kind + "'");
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw MalformedDataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw MalformedDataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!saw_header || !saw_final) throw MalformedDataError("truncated run record " + file.string());
    loaded.records.push_back(std::move(record));
  }
  return loaded;
}

}  // namespace neurotraj
