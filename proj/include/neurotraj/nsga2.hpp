#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "neurotraj/evaluator.hpp"
#include "neurotraj/genome.hpp"
#include "neurotraj/objectives.hpp"
#include "neurotraj/random.hpp"

namespace neurotraj {

struct Individual {
  Genome genome;
  ObjectiveVector objectives;
  std::size_t rank = 0;
  double crowding = 0.0;
  /// Full evaluation outcome (test-split objectives, predicted trajectories, skills).
  std::shared_ptr<const EvaluationResult> evaluation;
};

Individual make_individual(const Genome& g, const Evaluator& evaluator);

/// Pareto dominance for minimization: no worse everywhere, strictly better somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Fronts as index lists into the sorted population, F_0 first.
struct FrontSet {
  std::vector<std::vector<std::size_t>> fronts;
};

/// Fast non-dominated sorting over raw objective rows.
std::vector<std::vector<std::size_t>> nondominated_fronts(const std::vector<std::vector<double>>& points);

/// Sorts `pop` into fronts and writes each individual's rank.
FrontSet nondominated_sort(std::span<Individual> pop);

/// Range-normalised crowding distance over the members of one front.
std::vector<double> crowding_distances(const std::vector<std::vector<double>>& front_points);
void crowding_distance(std::span<Individual> pop, const std::vector<std::size_t>& front);

/// Index of the tournament winner among `k` uniform draws with replacement.
std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng);

/// Indices of the population members that are mutually non-dominated (F_0).
std::vector<std::size_t> first_front(std::span<const Individual> pop);

/// Elitist survival: whole fronts in rank order, the overflowing front by descending
/// crowding distance (stable, so equal crowding keeps merge order).
std::vector<Individual> select_survivors(std::vector<Individual> merged, std::size_t n);

struct Nsga2Config {
  std::size_t population_size = 25;
  std::size_t tournament_size = 3;
  VariationOperators operators;
};

class Nsga2 {
 public:
  Nsga2(Nsga2Config config, const Evaluator& evaluator);

  void initialize(Rng& rng);
  void initialize(std::vector<Individual> population);

  /// Tournament -> crossover -> mutation -> evaluation, then elitist (mu + lambda)
  /// survival by front and descending crowding distance.
  void step(Rng& rng);

  const std::vector<Individual>& population() const noexcept { return population_; }
  const Nsga2Config& config() const noexcept { return config_; }

 private:
  void assign_rank_and_crowding(std::span<Individual> pop) const;

  Nsga2Config config_;
  const Evaluator* evaluator_;
  std::vector<Individual> population_;
};

}  // namespace neurotraj
