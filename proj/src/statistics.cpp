#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"
#include "neurotraj/random.hpp"

namespace neurotraj {

namespace {

constexpr std::size_t kPermutationCutoff = 500;

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double num = 0.0;
  double da = 0.0;
  double db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return std::clamp(num / std::sqrt(da * db), -1.0, 1.0);
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

nlohmann::ordered_json CorrelationResult::to_json() const {
  return {{"coefficient", coefficient}, {"p_value", p_value}, {"n", n}};
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y, std::size_t permutation_resamples,
                           std::uint64_t seed) {
  if (x.size() != y.size()) throw ContractError("spearman inputs differ in length");
  if (x.size() < 3) throw ContractError("spearman needs at least 3 observations");
  if (is_constant(x) || is_constant(y)) throw UndefinedCorrelationError("spearman correlation of a constant series");

  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  CorrelationResult result;
  result.n = x.size();
  result.coefficient = pearson(rx, ry);

  if (result.n < kPermutationCutoff) {
    Rng rng(seed);
    const double observed = std::abs(result.coefficient);
    std::size_t extreme = 0;
    for (std::size_t r = 0; r < permutation_resamples; ++r) {
      shuffle(ry.begin(), ry.end(), rng);
      if (std::abs(pearson(rx, ry)) >= observed - 1e-12) ++extreme;
    }
    result.p_value = static_cast<double>(extreme + 1) / static_cast<double>(permutation_resamples + 1);
  } else {
    const double r = result.coefficient;
    const auto dof = static_cast<double>(result.n - 2);
    if (std::abs(r) >= 1.0) {
      result.p_value = 0.0;
    } else {
      const double t = r * std::sqrt(dof / ((1.0 + r) * (1.0 - r)));
      const boost::math::students_t_distribution<double> dist(dof);
      result.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
    }
  }
  return result;
}

double permutation_test(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                        std::uint64_t seed) {
  if (a.empty() || b.empty()) throw ContractError("permutation test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double observed = std::abs(mean(a) - mean(b));
  // Relative slack so that floating-point reassociation does not hide exact ties.
  const double slack = 1e-12 * std::max(1.0, observed);

  Rng rng(seed);
  const auto na = static_cast<std::ptrdiff_t>(a.size());
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    shuffle(pooled.begin(), pooled.end(), rng);
    const double diff = std::abs(mean(std::span<const double>(pooled.data(), a.size())) -
                                 mean(std::span<const double>(pooled.data() + na, b.size())));
    if (diff >= observed - slack) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(resamples + 1);
}

double ranksum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractError("rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);

  const auto n1 = static_cast<double>(a.size());
  const auto n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

  // Tie correction: sum over tie groups of (t^3 - t).
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (!(variance > 0.0)) return 1.0;
  const double z = (u - n1 * n2 / 2.0) / std::sqrt(variance);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

double bonferroni(double alpha, std::size_t comparisons) {
  if (comparisons < 1) throw ContractError("bonferroni needs at least one comparison");
  return alpha / static_cast<double>(comparisons);
}

}  // namespace neurotraj
