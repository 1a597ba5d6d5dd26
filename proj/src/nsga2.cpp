#include "neurotraj/nsga2.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "neurotraj/errors.hpp"

namespace neurotraj {

Individual make_individual(const Genome& g, const Evaluator& evaluator) {
  auto result = std::make_shared<EvaluationResult>(evaluator.evaluate(g));
  Individual ind;
  ind.genome = g;
  ind.objectives = result->objectives;
  ind.evaluation = std::move(result);
  return ind;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("objective vectors differ in dimension");
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (a.ids != b.ids) throw ContractError("objective vectors carry different objective ids");
  return dominates(std::span<const double>(a.values), std::span<const double>(b.values));
}

std::vector<std::vector<std::size_t>> nondominated_fronts(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated_by_me[p].push_back(q);
        ++domination_count[q];
      } else if (dominates(points[q], points[p])) {
        dominated_by_me[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto p : current) {
      for (auto q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

FrontSet nondominated_sort(std::span<Individual> pop) {
  if (pop.empty()) throw ContractError("cannot sort an empty population");
  std::vector<std::vector<double>> points;
  points.reserve(pop.size());
  for (const auto& ind : pop) {
    if (ind.objectives.ids != pop.front().objectives.ids) throw ContractError("inconsistent objective ids");
    points.push_back(ind.objectives.values);
  }
  FrontSet set{nondominated_fronts(points)};
  for (std::size_t r = 0; r < set.fronts.size(); ++r) {
    for (auto i : set.fronts[r]) pop[i].rank = r;
  }
  return set;
}

std::vector<double> crowding_distances(const std::vector<std::vector<double>>& front_points) {
  const std::size_t n = front_points.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
    return distance;
  }
  const std::size_t m = front_points.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return front_points[a][obj] < front_points[b][obj]; });
    const double lo = front_points[order.front()][obj];
    const double hi = front_points[order.back()][obj];
    distance[order.front()] = std::numeric_limits<double>::infinity();
    distance[order.back()] = std::numeric_limits<double>::infinity();
    if (hi == lo) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      distance[order[k]] += (front_points[order[k + 1]][obj] - front_points[order[k - 1]][obj]) / (hi - lo);
    }
  }
  return distance;
}

void crowding_distance(std::span<Individual> pop, const std::vector<std::size_t>& front) {
  std::vector<std::vector<double>> points;
  points.reserve(front.size());
  for (auto i : front) points.push_back(pop[i].objectives.values);
  const auto d = crowding_distances(points);
  for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowding = d[k];
}

std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng) {
  if (pop.empty() || k == 0) throw ContractError("tournament needs entrants");
  std::size_t best = uniform_index(rng, pop.size());
  for (std::size_t draw = 1; draw < k; ++draw) {
    const std::size_t c = uniform_index(rng, pop.size());
    const auto& challenger = pop[c];
    const auto& holder = pop[best];
    // Strict comparisons keep the earlier draw on full ties.
    if (challenger.rank < holder.rank || (challenger.rank == holder.rank && challenger.crowding > holder.crowding)) {
      best = c;
    }
  }
  return best;
}

std::vector<std::size_t> first_front(std::span<const Individual> pop) {
  std::vector<std::vector<double>> points;
  points.reserve(pop.size());
  for (const auto& ind : pop) points.push_back(ind.objectives.values);
  auto fronts = nondominated_fronts(points);
  return fronts.empty() ? std::vector<std::size_t>{} : fronts.front();
}

Nsga2::Nsga2(Nsga2Config config, const Evaluator& evaluator) : config_(config), evaluator_(&evaluator) {
  if (config_.population_size < 2) throw ConfigError("NSGA-II population must hold at least 2 individuals");
  if (config_.tournament_size < 1) throw ConfigError("tournament size must be at least 1");
}

void Nsga2::assign_rank_and_crowding(std::span<Individual> pop) const {
  const auto set = nondominated_sort(pop);
  for (const auto& front : set.fronts) crowding_distance(pop, front);
}

std::vector<Individual> select_survivors(std::vector<Individual> merged, std::size_t n) {
  if (n > merged.size()) throw ContractError("cannot select more survivors than candidates");
  const auto set = nondominated_sort(merged);
  std::vector<Individual> next;
  next.reserve(n);
  for (const auto& front : set.fronts) {
    if (next.size() == n) break;
    crowding_distance(merged, front);
    if (next.size() + front.size() <= n) {
      for (auto i : front) next.push_back(merged[i]);
      continue;
    }
    std::vector<std::size_t> by_crowding = front;
    std::stable_sort(by_crowding.begin(), by_crowding.end(),
                     [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
    for (std::size_t k = 0; next.size() < n; ++k) next.push_back(merged[by_crowding[k]]);
  }
  return next;
}

void Nsga2::initialize(Rng& rng) {
  std::vector<Individual> pop;
  pop.reserve(config_.population_size);
  for (std::size_t i = 0; i < config_.population_size; ++i) pop.push_back(make_individual(random_genome(rng), *evaluator_));
  initialize(std::move(pop));
}

void Nsga2::initialize(std::vector<Individual> population) {
  if (population.size() != config_.population_size) throw ContractError("initial population has the wrong size");
  population_ = std::move(population);
  assign_rank_and_crowding(population_);
}

void Nsga2::step(Rng& rng) {
  const std::size_t n = config_.population_size;
  std::vector<Genome> offspring_genomes;
  offspring_genomes.reserve(n + 1);
  while (offspring_genomes.size() < n) {
    const auto& a = population_[tournament_select(population_, config_.tournament_size, rng)];
    const auto& b = population_[tournament_select(population_, config_.tournament_size, rng)];
    auto [c1, c2] = config_.operators.breed(a.genome, b.genome, rng);
    offspring_genomes.push_back(c1);
    if (offspring_genomes.size() < n) offspring_genomes.push_back(c2);
  }

  std::vector<Individual> merged = population_;
  merged.reserve(2 * n);
  for (std::size_t i = 0; i < offspring_genomes.size(); ++i) {
    try {
      merged.push_back(make_individual(offspring_genomes[i], *evaluator_));
    } catch (const std::exception& e) {
      throw std::runtime_error("NSGA-II offspring " + std::to_string(i) + " " + to_string(offspring_genomes[i]) +
                               " failed to evaluate: " + e.what());
    }
  }

  population_ = select_survivors(std::move(merged), n);
}

}  // namespace neurotraj
