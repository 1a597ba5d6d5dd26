#include "neurotraj/moead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "neurotraj/errors.hpp"

namespace neurotraj {

std::size_t lattice_size(std::size_t objectives, std::size_t resolution) {
  if (objectives == 2) return resolution + 1;
  if (objectives == 3) return (resolution + 1) * (resolution + 2) / 2;
  throw ConfigError("weight lattices support 2 or 3 objectives, got " + std::to_string(objectives));
}

std::size_t resolution_for_population(std::size_t objectives, std::size_t population) {
  if (objectives == 2) return population > 1 ? population - 1 : 1;
  if (objectives != 3) throw ConfigError("weight lattices support 2 or 3 objectives");
  std::size_t best = 1;
  for (std::size_t h = 1;; ++h) {
    const auto size = lattice_size(3, h);
    const auto gap = [&](std::size_t s) { return s > population ? s - population : population - s; };
    if (gap(size) <= gap(lattice_size(3, best))) best = h;
    if (size >= population) break;
  }
  return best;
}

WeightLattice simplex_lattice(std::size_t objectives, std::size_t resolution) {
  if (objectives != 2 && objectives != 3) {
    throw ConfigError("weight lattices support 2 or 3 objectives, got " + std::to_string(objectives));
  }
  if (resolution < 1) throw ConfigError("lattice resolution H must be at least 1");
  WeightLattice lattice;
  lattice.resolution = resolution;
  const auto h = static_cast<double>(resolution);
  if (objectives == 2) {
    for (std::size_t a = 0; a <= resolution; ++a) {
      lattice.weights.push_back({static_cast<double>(a) / h, static_cast<double>(resolution - a) / h});
    }
  } else {
    for (std::size_t a = 0; a <= resolution; ++a) {
      for (std::size_t b = 0; a + b <= resolution; ++b) {
        lattice.weights.push_back(
            {static_cast<double>(a) / h, static_cast<double>(b) / h, static_cast<double>(resolution - a - b) / h});
      }
    }
  }
  return lattice;
}

Neighborhood build_neighborhoods(const WeightLattice& lattice, std::size_t t) {
  const std::size_t n = lattice.size();
  if (t < 1 || t > n) throw ConfigError("neighbourhood size must lie in [1, N]");
  Neighborhood out(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < lattice.weights[i].size(); ++k) {
        const double d = lattice.weights[i][k] - lattice.weights[j][k];
        d2 += d * d;
      }
      dist[j] = {d2, j};
    }
    std::sort(dist.begin(), dist.end());
    out[i].reserve(t);
    for (std::size_t k = 0; k < t; ++k) out[i].push_back(dist[k].second);
  }
  return out;
}

double tchebycheff(std::span<const double> f, std::span<const double> weight, std::span<const double> ideal) {
  if (f.size() != weight.size() || f.size() != ideal.size()) throw ContractError("tchebycheff dimension mismatch");
  double g = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) g = std::max(g, weight[j] * std::abs(f[j] - ideal[j]));
  return g;
}

std::vector<double> update_ideal(std::span<const double> ideal, std::span<const double> f) {
  if (ideal.size() != f.size()) throw ContractError("ideal point dimension mismatch");
  std::vector<double> out(ideal.begin(), ideal.end());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = std::min(out[j], f[j]);
  return out;
}

bool archive_insert(std::vector<Individual>& archive, const Individual& candidate) {
  for (const auto& member : archive) {
    if (dominates(member.objectives, candidate.objectives)) return false;
    // Re-inserting a model the archive already holds is a no-op.
    if (member.genome == candidate.genome && member.objectives == candidate.objectives) return false;
  }
  std::erase_if(archive, [&](const Individual& m) { return dominates(candidate.objectives, m.objectives); });
  archive.push_back(candidate);
  return true;
}

Moead::Moead(MoeadConfig config, const Evaluator& evaluator) : config_(config), evaluator_(&evaluator) {
  lattice_ = simplex_lattice(evaluator.objective_ids().size(), config_.resolution);
  neighborhoods_ = build_neighborhoods(lattice_, std::min(config_.neighborhood_size, lattice_.size()));
}

void Moead::initialize(Rng& rng) {
  std::vector<Individual> pop;
  pop.reserve(lattice_.size());
  for (std::size_t i = 0; i < lattice_.size(); ++i) pop.push_back(make_individual(random_genome(rng), *evaluator_));
  initialize(std::move(pop));
}

void Moead::initialize(std::vector<Individual> population) {
  if (population.size() != lattice_.size()) throw ContractError("initial population must match the lattice size");
  state_ = MoeadState{};
  state_.population = std::move(population);
  state_.ideal = state_.population.front().objectives.values;
  for (const auto& ind : state_.population) {
    state_.ideal = update_ideal(state_.ideal, ind.objectives.values);
    archive_insert(state_.archive, ind);
  }
}

void Moead::step(Rng& rng, const ReplacementObserver& observer) {
  const std::size_t n = lattice_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& hood = neighborhoods_[i];
    const std::size_t k = hood[uniform_index(rng, hood.size())];
    std::size_t l = k;
    if (hood.size() > 1) {
      while (l == k) l = hood[uniform_index(rng, hood.size())];
    }
    auto [child, unused] = config_.operators.breed(state_.population[k].genome, state_.population[l].genome, rng);

    Individual y;
    try {
      y = make_individual(child, *evaluator_);
    } catch (const std::exception& e) {
      throw std::runtime_error("MOEA/D child of subproblem " + std::to_string(i) + " " + to_string(child) +
                               " failed to evaluate: " + e.what());
    }
    state_.ideal = update_ideal(state_.ideal, y.objectives.values);

    for (auto j : hood) {
      const double g_new = tchebycheff(y.objectives.values, lattice_.weights[j], state_.ideal);
      const double g_old = tchebycheff(state_.population[j].objectives.values, lattice_.weights[j], state_.ideal);
      if (g_new <= g_old) {
        if (observer) observer(j, g_old, g_new, state_.ideal);
        state_.population[j] = y;
      }
    }

    if (archive_insert(state_.archive, y) && config_.archive_cap && state_.archive.size() > *config_.archive_cap) {
      state_.archive.erase(state_.archive.begin(),
                           state_.archive.begin() + static_cast<std::ptrdiff_t>(state_.archive.size() - *config_.archive_cap));
    }
  }
}

}  // namespace neurotraj
