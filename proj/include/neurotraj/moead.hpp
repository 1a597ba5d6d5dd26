#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "neurotraj/evaluator.hpp"
#include "neurotraj/nsga2.hpp"
#include "neurotraj/random.hpp"

namespace neurotraj {

struct WeightLattice {
  std::size_t resolution = 0;  ///< H
  std::vector<std::vector<double>> weights;

  std::size_t size() const noexcept { return weights.size(); }
};

/// Every m-tuple of multiples of 1/H summing to 1, lexicographic. m must be 2 or 3.
WeightLattice simplex_lattice(std::size_t objectives, std::size_t resolution);

/// Lattice size for (m, H): H + 1 for m = 2, (H + 1)(H + 2) / 2 for m = 3.
std::size_t lattice_size(std::size_t objectives, std::size_t resolution);

/// Resolution whose lattice size is closest to `population` (ties go to the larger lattice).
std::size_t resolution_for_population(std::size_t objectives, std::size_t population);

/// B(i): the T nearest weight vectors to weight i (self included), ties by lower index.
using Neighborhood = std::vector<std::vector<std::size_t>>;
Neighborhood build_neighborhoods(const WeightLattice& lattice, std::size_t t);

/// max_j weight_j * |f_j - z_j|
double tchebycheff(std::span<const double> f, std::span<const double> weight, std::span<const double> ideal);

/// Componentwise minimum of `ideal` and `f`.
std::vector<double> update_ideal(std::span<const double> ideal, std::span<const double> f);

/// Adds `candidate` unless an archive member dominates it, then drops members it dominates.
/// Returns whether the candidate entered the archive.
bool archive_insert(std::vector<Individual>& archive, const Individual& candidate);

struct MoeadState {
  std::vector<Individual> population;  ///< one solution per subproblem
  std::vector<double> ideal;
  std::vector<Individual> archive;
};

struct MoeadConfig {
  std::size_t resolution = 8;
  std::size_t neighborhood_size = 7;
  VariationOperators operators;
  /// Optional soft cap on archive size (oldest entries evicted first). Off by default.
  std::optional<std::size_t> archive_cap;
};

/// Observes each neighbour replacement: (subproblem j, g(old), g(new), ideal at the time).
using ReplacementObserver = std::function<void(std::size_t, double, double, std::span<const double>)>;

class Moead {
 public:
  Moead(MoeadConfig config, const Evaluator& evaluator);

  void initialize(Rng& rng);
  void initialize(std::vector<Individual> population);

  /// One pass over all subproblems in index order.
  void step(Rng& rng, const ReplacementObserver& observer = {});

  const MoeadState& state() const noexcept { return state_; }
  MoeadState& mutable_state() noexcept { return state_; }
  const WeightLattice& lattice() const noexcept { return lattice_; }
  const Neighborhood& neighborhoods() const noexcept { return neighborhoods_; }
  const MoeadConfig& config() const noexcept { return config_; }

 private:
  MoeadConfig config_;
  const Evaluator* evaluator_;
  WeightLattice lattice_;
  Neighborhood neighborhoods_;
  MoeadState state_;
};

}  // namespace neurotraj
