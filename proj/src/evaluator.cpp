#include "neurotraj/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neurotraj/errors.hpp"
#include "neurotraj/random.hpp"

namespace neurotraj {

namespace {

// Keeps predicted step speeds strictly inside the legal band after rounding.
constexpr double kPredictionMargin = 1e-9;

enum SkillTag : std::uint64_t { kAccuracyTag = 0xacc, kSmoothTag = 0x5e007, kSpeedTag = 0x5eed };

double allele_weight(const SurrogateConfig& cfg, std::size_t locus, std::size_t allele, SkillTag tag) {
  return unit_interval(hash_values({cfg.quality_seed, locus, allele, tag}));
}

double max_weight(const SurrogateConfig& cfg, std::size_t locus, SkillTag tag, bool want_max) {
  const auto& table = AlleleTable::standard();
  double best = want_max ? -1.0 : 2.0;
  for (std::size_t a = 0; a < table.allele_count(locus); ++a) {
    const double w = allele_weight(cfg, locus, a, tag);
    best = want_max ? std::max(best, w) : std::min(best, w);
  }
  return best;
}

// Sum of subset weights plus one pairwise product, min-max normalised over every genome.
double skill_value(const Genome& g, const SurrogateConfig& cfg, const std::vector<std::size_t>& loci,
                   std::array<std::size_t, 2> pair, SkillTag tag) {
  const auto& table = AlleleTable::standard();
  double raw = 0.0;
  for (auto l : loci) raw += allele_weight(cfg, l, g[l], tag);
  raw += allele_weight(cfg, pair[0], g[pair[0]], tag) * allele_weight(cfg, pair[1], g[pair[1]], tag);

  // Loci outside the interacting pair are independent, so the extremes split into a
  // per-locus part and a small enumeration over the pair's allele combinations.
  double lo = 0.0;
  double hi = 0.0;
  for (auto l : loci) {
    if (l == pair[0] || l == pair[1]) continue;
    lo += max_weight(cfg, l, tag, false);
    hi += max_weight(cfg, l, tag, true);
  }
  double pair_lo = std::numeric_limits<double>::infinity();
  double pair_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < table.allele_count(pair[0]); ++a) {
    for (std::size_t b = 0; b < table.allele_count(pair[1]); ++b) {
      const double wa = allele_weight(cfg, pair[0], a, tag);
      const double wb = allele_weight(cfg, pair[1], b, tag);
      const double v = wa + wb + wa * wb;
      pair_lo = std::min(pair_lo, v);
      pair_hi = std::max(pair_hi, v);
    }
  }
  lo += pair_lo;
  hi += pair_hi;
  if (hi <= lo) return 0.5;
  return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

double symmetric_draw(Rng& rng) { return 2.0 * uniform_real(rng) - 1.0; }

}  // namespace

void SurrogateConfig::validate() const {
  if (!(lateral_noise_max > 0.0 && heading_jitter_max > 0.0 && speed_span > 0.0)) {
    throw ConfigError("surrogate noise scales must be positive");
  }
  if (speed_span > 0.2) throw ConfigError("surrogate speed_span must not exceed 0.2");
  if (heading_jitter_max >= 1.5) throw ConfigError("surrogate heading jitter must stay below pi/2");
}

nlohmann::ordered_json SurrogateConfig::to_json() const {
  return {{"quality_seed", quality_seed},
          {"lateral_noise_max", lateral_noise_max},
          {"heading_jitter_max", heading_jitter_max},
          {"speed_span", speed_span},
          {"momentum_affects_accuracy", momentum_affects_accuracy}};
}

SurrogateConfig SurrogateConfig::from_json(const nlohmann::json& doc) {
  SurrogateConfig cfg;
  cfg.quality_seed = doc.value("quality_seed", cfg.quality_seed);
  cfg.lateral_noise_max = doc.value("lateral_noise_max", cfg.lateral_noise_max);
  cfg.heading_jitter_max = doc.value("heading_jitter_max", cfg.heading_jitter_max);
  cfg.speed_span = doc.value("speed_span", cfg.speed_span);
  cfg.momentum_affects_accuracy = doc.value("momentum_affects_accuracy", cfg.momentum_affects_accuracy);
  cfg.validate();
  return cfg;
}

SkillLayout skill_layout(const SurrogateConfig& cfg) {
  SkillLayout layout;
  // batch size, epochs, loss, optimiser -> accuracy; LSTM loci -> smoothness;
  // fully connected head sizes and dropout -> speed.
  layout.accuracy = {0, 1, 3, 4};
  if (cfg.momentum_affects_accuracy) layout.accuracy.insert(layout.accuracy.begin() + 2, 2);
  layout.smoothness = {5, 6, 7};
  layout.speed = {8, 9, 10, 11, 12};
  layout.interactions = {{{0, 4}, {5, 7}, {8, 10}}};
  return layout;
}

Skills skill_scores(const Genome& g, const SurrogateConfig& cfg) {
  const auto layout = skill_layout(cfg);
  return {skill_value(g, cfg, layout.accuracy, layout.interactions[0], kAccuracyTag),
          skill_value(g, cfg, layout.smoothness, layout.interactions[1], kSmoothTag),
          skill_value(g, cfg, layout.speed, layout.interactions[2], kSpeedTag)};
}

std::vector<TrajectorySequence> predict(const std::vector<TrajectoryPair>& pairs, const Skills& skills,
                                        const Genome& g, const SurrogateConfig& cfg) {
  const double lateral = cfg.lateral_noise_max * (1.0 - skills.accuracy);
  const double jitter = cfg.heading_jitter_max * (1.0 - skills.smoothness);
  const double scale = 1.0 + cfg.speed_span * (2.0 * skills.speed - 1.0);
  const std::uint64_t genome_key = g.hash();

  std::vector<TrajectorySequence> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto& truth = pair.target;
    Rng rng(hash_values({cfg.quality_seed, genome_key, pair.id}));
    TrajectorySequence pred(truth.size());
    if (truth.empty()) {
      out.push_back(std::move(pred));
      continue;
    }
    double drift = 0.0;
    pred[0] = {truth[0].x + lateral * symmetric_draw(rng), truth[0].y, truth[0].t};
    for (std::size_t i = 1; i < truth.size(); ++i) {
      const double dt = truth[i].t - truth[i - 1].t;
      double step = (truth[i].y - truth[i - 1].y) * scale;
      const double v = step / dt;
      if (v < kVMin + kPredictionMargin || v > kVMax - kPredictionMargin) {
        step = std::clamp(v, kVMin + kPredictionMargin, kVMax - kPredictionMargin) * dt;
      }
      drift += step * std::tan(jitter * symmetric_draw(rng));
      pred[i] = {truth[i].x + drift + lateral * symmetric_draw(rng), pred[i - 1].y + step, truth[i].t};
    }
    out.push_back(std::move(pred));
  }
  return out;
}

EvaluationResult evaluate(const Genome& g, const Dataset& data, const std::vector<ObjectiveId>& ids,
                          const SurrogateConfig& cfg, const ObjectiveOptions& options) {
  if (data.validation.empty() || data.test.empty()) throw ContractError("evaluation needs validation and test pairs");
  if (!is_valid(g)) throw ContractError("genome out of bounds: " + to_string(g));

  EvaluationResult result;
  result.skills = skill_scores(g, cfg);

  const auto targets = [](const std::vector<TrajectoryPair>& pairs) {
    std::vector<TrajectorySequence> seqs;
    seqs.reserve(pairs.size());
    for (const auto& p : pairs) seqs.push_back(p.target);
    return seqs;
  };

  const auto predicted_val = predict(data.validation, result.skills, g, cfg);
  const auto actual_val = targets(data.validation);
  result.objectives = assemble(ids, predicted_val, actual_val, options);
  result.rmse_validation = rmse(predicted_val, actual_val);

  result.predicted_test = predict(data.test, result.skills, g, cfg);
  const auto actual_test = targets(data.test);
  result.test_objectives = assemble(ids, result.predicted_test, actual_test, options);
  result.rmse_test = rmse(result.predicted_test, actual_test);
  return result;
}

SurrogateEvaluator::SurrogateEvaluator(std::shared_ptr<const Dataset> data, std::vector<ObjectiveId> ids,
                                       SurrogateConfig cfg, ObjectiveOptions options)
    : data_(std::move(data)), ids_(std::move(ids)), cfg_(cfg), options_(options) {
  if (!data_) throw ContractError("surrogate evaluator needs a dataset");
  validate_objective_ids(ids_);
  cfg_.validate();
}

EvaluationResult SurrogateEvaluator::evaluate(const Genome& g) const {
  return neurotraj::evaluate(g, *data_, ids_, cfg_, options_);
}

}  // namespace neurotraj
