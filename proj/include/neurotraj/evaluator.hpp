#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotraj/genome.hpp"
#include "neurotraj/objectives.hpp"
#include "neurotraj/trajectory.hpp"

namespace neurotraj {

/// Surrogate training outcome of one hyperparameter configuration, each in [0, 1].
struct Skills {
  double accuracy = 0.0;    ///< drives lateral position noise
  double smoothness = 0.0;  ///< drives heading jitter
  double speed = 0.0;       ///< drives longitudinal speed scaling (0.5 is neutral)

  friend bool operator==(const Skills&, const Skills&) = default;
};

struct SurrogateConfig {
  std::uint64_t quality_seed = 0;
  double lateral_noise_max = 1.5;   ///< m, at accuracy 0
  double heading_jitter_max = 0.05; ///< rad per step, at smoothness 0
  double speed_span = 0.15;         ///< speed scale ranges over 1 +/- speed_span
  /// Let the momentum locus feed the accuracy skill. Off: momentum is inert.
  bool momentum_affects_accuracy = false;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static SurrogateConfig from_json(const nlohmann::json& doc);

  friend bool operator==(const SurrogateConfig&, const SurrogateConfig&) = default;
};

/// 0-based locus subsets feeding each skill, and the locus pair of each epistatic term.
struct SkillLayout {
  std::vector<std::size_t> accuracy;
  std::vector<std::size_t> smoothness;
  std::vector<std::size_t> speed;
  std::array<std::array<std::size_t, 2>, 3> interactions;
};

SkillLayout skill_layout(const SurrogateConfig& cfg);

Skills skill_scores(const Genome& g, const SurrogateConfig& cfg);

struct EvaluationResult {
  ObjectiveVector objectives;       ///< on the validation split; drives the search
  ObjectiveVector test_objectives;  ///< on the test split; analysis only
  std::vector<TrajectorySequence> predicted_test;
  Skills skills;
  double rmse_validation = 0.0;
  double rmse_test = 0.0;
};

/// Predicted target windows for `pairs` under the given skills.
std::vector<TrajectorySequence> predict(const std::vector<TrajectoryPair>& pairs, const Skills& skills,
                                        const Genome& g, const SurrogateConfig& cfg);

EvaluationResult evaluate(const Genome& g, const Dataset& data, const std::vector<ObjectiveId>& ids,
                          const SurrogateConfig& cfg, const ObjectiveOptions& options = {});

/// Genome -> objectives contract consumed by the search engines.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluationResult evaluate(const Genome& g) const = 0;
  virtual const std::vector<ObjectiveId>& objective_ids() const = 0;
};

class SurrogateEvaluator final : public Evaluator {
 public:
  SurrogateEvaluator(std::shared_ptr<const Dataset> data, std::vector<ObjectiveId> ids, SurrogateConfig cfg,
                     ObjectiveOptions options = {});

  EvaluationResult evaluate(const Genome& g) const override;
  const std::vector<ObjectiveId>& objective_ids() const override { return ids_; }
  const Dataset& dataset() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::vector<ObjectiveId> ids_;
  SurrogateConfig cfg_;
  ObjectiveOptions options_;
};

}  // namespace neurotraj
