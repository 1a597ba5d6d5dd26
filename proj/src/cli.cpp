#include "neurotraj/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"
#include "neurotraj/experiment.hpp"
#include "neurotraj/trajectory.hpp"

namespace neurotraj {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

SplitRatio parse_ratio(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad --ratio component '" + item + "'");
    }
  }
  if (parts.size() != 3) throw ConfigError("--ratio needs three comma-separated values");
  return {parts[0], parts[1], parts[2]};
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("NEUROTRAJ_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const auto value = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("NEUROTRAJ_SEED is not an unsigned integer: ") + raw);
  return value;
}

// --- generate ---------------------------------------------------------------

struct GenerateFlags {
  std::string out;
  double duration = 600.0;
  std::uint64_t seed = 7;
  std::size_t tau = kDefaultTau;
  std::string ratio = "0.6,0.2,0.2";
  double lane_change_rate = ScenarioConfig{}.lane_change_rate;
  double mean_speed = ScenarioConfig{}.mean_speed;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  ScenarioConfig sc;
  sc.duration_s = f.duration;
  sc.seed = f.seed;
  sc.lane_change_rate = f.lane_change_rate;
  sc.mean_speed = f.mean_speed;
  const auto ratio = parse_ratio(f.ratio);
  const auto data = window_and_split(generate_scenario(sc), f.tau, ratio, f.seed);
  fs::create_directories(f.out);
  write_dataset(data, f.out);
  out << "wrote " << (fs::path(f.out) / "dataset.csv").string() << " and "
      << (fs::path(f.out) / "manifest.json").string() << " (" << data.train.size() << " train, "
      << data.validation.size() << " val, " << data.test.size() << " test pairs)\n";
  return kExitOk;
}

// --- run --------------------------------------------------------------------

struct RunFlags {
  std::string preset;
  std::string config;
  std::string out;
  double scale = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> generations;
  std::optional<std::size_t> population;
  std::size_t jobs = 1;
};

ExperimentConfig resolve_config(const RunFlags& f) {
  ExperimentConfig cfg;
  if (!f.preset.empty()) {
    cfg = find_preset(f.preset).config;
  } else {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot read config file " + f.config);
    try {
      cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
  }
  cfg = scale_config(cfg, f.scale);
  if (f.runs) cfg.runs = *f.runs;
  if (f.generations) cfg.generations = *f.generations;
  if (f.population) cfg.population = *f.population;
  if (f.seed) {
    cfg.base_seed = *f.seed;
  } else if (auto s = env_seed()) {
    cfg.base_seed = *s;
  }
  cfg.validate();
  return cfg;
}

int cmd_run(const RunFlags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(f);
  out << "running " << to_token(cfg.algorithm) << " on " << join_tokens(cfg.objective_ids) << ": population "
      << effective_population(cfg) << ", " << cfg.generations << " generations, " << cfg.runs << " runs, seed "
      << cfg.base_seed << '\n';
  const auto records = run_experiment(cfg, {f.jobs});
  write_experiment(cfg, records, f.out);
  bool failed = false;
  for (const auto& r : records) {
    if (!r.ok()) {
      err << "error: " << *r.error << '\n';
      failed = true;
    }
  }
  const auto summary = summarize(records);
  out << "valid models " << summary.label() << "; results in " << f.out << '\n';
  return failed ? kExitEngine : kExitOk;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeFlags {
  std::vector<std::string> dirs;
  std::string out;
  std::size_t comparisons = 2;
  double alpha = 0.05;
  std::size_t resamples = 10000;
  std::size_t kde_points = 20;
};

std::vector<std::string> objective_header(const std::vector<ObjectiveId>& ids) {
  std::vector<std::string> names;
  for (auto id : ids) names.emplace_back(to_token(id));
  return names;
}

void collect_fronts(const LoadedExperiment& exp, std::vector<std::vector<double>>& all) {
  for (const auto& run : exp.records) {
    if (!run.ok()) continue;
    for (const auto& p : run.initial.front(run.algorithm)) all.push_back(p);
    for (const auto& snap : run.snapshots) {
      for (const auto& p : snap.front(run.algorithm)) all.push_back(p);
    }
  }
}

std::string hypervolume_csv(const LoadedExperiment& exp, const std::vector<double>& ref) {
  std::ostringstream os;
  os << "generation,run,value\n";
  if (ref.empty()) return os.str();
  for (std::size_t g = 1; g <= exp.config.generations; ++g) {
    for (const auto& run : exp.records) {
      if (!run.ok() || run.snapshots.size() < g) continue;
      os << g << ',' << run.run_index << ',' << format_double(hypervolume(run.snapshots[g - 1].front(run.algorithm), ref))
         << '\n';
    }
  }
  return os.str();
}

std::string kde_csv(const LoadedExperiment& exp, std::size_t per_dim, std::ostream& err) {
  std::vector<std::vector<double>> samples;
  for (const auto& run : exp.records) {
    for (const auto& r : run.final_front) samples.push_back(r.objectives.values);
  }
  std::ostringstream os;
  const auto names = objective_header(exp.config.objective_ids);
  for (const auto& n : names) os << n << ',';
  os << "density\n";
  try {
    const auto grid = kde_grid(samples, per_dim);
    const auto density = kde_density(samples, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (double v : grid[i]) os << format_double(v) << ',';
      os << format_double(density[i]) << '\n';
    }
  } catch (const std::logic_error& e) {
    // too few or degenerate samples
    err << "warning: kde_front.csv left empty: " << e.what() << '\n';
  }
  return os.str();
}

ordered_json correlations_json(const LoadedExperiment& exp, std::size_t resamples) {
  const auto& ids = exp.config.objective_ids;
  std::vector<std::vector<double>> columns(ids.size());
  for (const auto& run : exp.records) {
    if (!run.ok() || run.snapshots.empty()) continue;
    for (const auto& r : run.snapshots.back().population) {
      for (std::size_t k = 0; k < ids.size(); ++k) columns[k].push_back(r.objectives.values[k]);
    }
  }
  ordered_json doc;
  doc["objectives"] = objective_header(ids);
  doc["n"] = columns.empty() ? 0 : columns.front().size();
  doc["pairs"] = ordered_json::array();
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      ordered_json entry;
      entry["a"] = std::string(to_token(ids[a]));
      entry["b"] = std::string(to_token(ids[b]));
      try {
        const auto r = spearman(columns[a], columns[b], resamples);
        entry["rho"] = r.coefficient;
        entry["p_value"] = r.p_value;
      } catch (const std::exception& e) {
        entry["rho"] = nullptr;
        entry["p_value"] = nullptr;
        entry["note"] = e.what();
      }
      doc["pairs"].push_back(std::move(entry));
    }
  }
  return doc;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out, std::ostream& err) {
  const auto first = load_experiment(f.dirs.at(0));
  std::optional<LoadedExperiment> second;
  if (f.dirs.size() > 1) second = load_experiment(f.dirs.at(1));
  const fs::path dest = f.out.empty() ? fs::path(f.dirs.at(0)) : fs::path(f.out);
  fs::create_directories(dest);

  SummaryOptions opts;
  opts.alpha = f.alpha;
  opts.comparisons = f.comparisons;
  opts.resamples = f.resamples;
  const auto summary = summarize(first.records, second ? &second->records : nullptr, opts);
  write_summary(summary, dest);
  // one reference for every compared experiment on the same objectives
  const bool shared = second && second->config.objective_ids == first.config.objective_ids;
  std::vector<std::vector<double>> all;
  collect_fronts(first, all);
  if (shared) collect_fronts(*second, all);
  const std::vector<double> ref = all.empty() ? std::vector<double>{} : reference_point(all);
  ordered_json ref_doc;
  ref_doc["objectives"] = objective_header(first.config.objective_ids);
  ref_doc["margin"] = 0.1;
  ref_doc["reference"] = ref;
  ref_doc["experiments"] = ordered_json::array({f.dirs.at(0)});
  if (shared) ref_doc["experiments"].push_back(f.dirs.at(1));
  write_text(dest / "hypervolume_reference.json", ref_doc.dump(2) + "\n");
  write_text(dest / "hypervolume.csv", hypervolume_csv(first, ref));
  if (shared) {
    write_text(dest / "hypervolume_compared.csv", hypervolume_csv(*second, ref));
  } else if (second) {
    err << "warning: objectives differ, no shared hypervolume for " << f.dirs.at(1) << '\n';
  }
  write_text(dest / "kde_front.csv", kde_csv(first, f.kde_points, err));
  write_text(dest / "correlations.json", correlations_json(first, f.resamples).dump(2) + "\n");

  out << "valid models " << summary.label() << '\n';
  if (summary.adjusted_alpha) {
    out << "bonferroni threshold " << *summary.adjusted_alpha << '\n';
    for (const auto& [name, c] : summary.comparison) {
      out << "  " << name << ": ";
      if (c.permutation_p) {
        out << "permutation p=" << *c.permutation_p << ", rank-sum p=" << *c.ranksum_p
            << (c.significant ? " (significant)" : "");
      } else {
        out << "absent";
      }
      out << '\n';
    }
  }
  out << "wrote summary.json, hypervolume.csv, hypervolume_reference.json, kde_front.csv, correlations.json to " << dest.string() << '\n';
  return kExitOk;
}

int cmd_presets(std::ostream& out) {
  for (const auto& p : presets()) {
    const auto& c = p.config;
    out << p.name << "  " << to_token(c.algorithm) << "  " << join_tokens(c.objective_ids) << "  pop " << c.population
        << "  gens " << c.generations << "  runs " << c.runs << "  [" << p.source << "]  " << p.description << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary hyperparameter search for trajectory predictors", "neurotraj"};
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic highway dataset");
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--duration", gen.duration, "Scenario length in seconds");
  generate->add_option("--seed", gen.seed, "Scenario and split seed");
  generate->add_option("--tau", gen.tau, "Window length in samples");
  generate->add_option("--ratio", gen.ratio, "train,val,test fractions");
  generate->add_option("--lane-change-rate", gen.lane_change_rate, "Expected lane changes per second");
  generate->add_option("--mean-speed", gen.mean_speed, "Mean speed in m/s");

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run an experiment");
  auto* preset_opt = run->add_option("--preset", rf.preset, "Preset name (exp1..exp13)");
  auto* config_opt = run->add_option("--config", rf.config, "Experiment config JSON");
  preset_opt->excludes(config_opt);
  run->add_option("--out", rf.out, "Experiment directory")->required();
  run->add_option("--scale", rf.scale, "Shrinks population, generations and runs");
  run->add_option("--seed", rf.seed, "Base seed (overrides NEUROTRAJ_SEED and the config)");
  run->add_option("--runs", rf.runs, "Independent run count");
  run->add_option("--generations", rf.generations, "Generation count");
  run->add_option("--population", rf.population, "Population size");
  run->add_option("--jobs", rf.jobs, "Runs executed concurrently")->check(CLI::PositiveNumber);

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "Summarize one experiment or compare two");
  analyze->add_option("dirs", af.dirs, "Experiment directories")->required()->expected(1, 2);
  analyze->add_option("--out", af.out, "Output directory (defaults to the first experiment)");
  analyze->add_option("--comparisons", af.comparisons, "Bonferroni denominator")->check(CLI::PositiveNumber);
  analyze->add_option("--alpha", af.alpha, "Significance level");
  analyze->add_option("--resamples", af.resamples, "Permutation resamples")->check(CLI::PositiveNumber);
  analyze->add_option("--kde-points", af.kde_points, "KDE grid points per objective")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("presets", "List the experiment presets");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (run->parsed()) {
      if (rf.preset.empty() == rf.config.empty()) {
        err << "error: run needs exactly one of --preset or --config\n\n" << run->help();
        return kExitUsage;
      }
      return cmd_run(rf, out, err);
    }
    if (analyze->parsed()) return cmd_analyze(af, out, err);
    if (list->parsed()) return cmd_presets(out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MalformedDataError& e) {
    err << "error: malformed data: " << e.what() << '\n';
    return kExitMalformed;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace neurotraj
