#include <algorithm>
#include <cmath>
#include <numbers>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"

namespace neurotraj {

std::vector<double> scott_bandwidths(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw ContractError("kernel density needs at least 2 samples");
  const std::size_t d = samples.front().size();
  if (d != 2 && d != 3) throw ContractError("kernel density supports 2 or 3 dimensions");
  const auto n = static_cast<double>(samples.size());
  const double factor = std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
  std::vector<double> h(d);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& s : samples) {
      if (s.size() != d) throw ContractError("samples differ in dimension");
      mean += s[k];
    }
    mean /= n;
    double ss = 0.0;
    for (const auto& s : samples) ss += (s[k] - mean) * (s[k] - mean);
    const double sigma = std::sqrt(ss / (n - 1.0));
    if (!(sigma > 0.0)) throw DegenerateBandwidthError("zero variance in dimension " + std::to_string(k));
    h[k] = sigma * factor;
  }
  return h;
}

std::vector<double> kde_density(const std::vector<std::vector<double>>& samples,
                                const std::vector<std::vector<double>>& grid) {
  const auto h = scott_bandwidths(samples);
  const std::size_t d = h.size();
  double norm = 1.0;
  for (double hk : h) norm *= hk * std::sqrt(2.0 * std::numbers::pi);
  norm *= static_cast<double>(samples.size());

  std::vector<double> density;
  density.reserve(grid.size());
  for (const auto& g : grid) {
    if (g.size() != d) throw ContractError("grid point dimension differs from samples");
    double sum = 0.0;
    for (const auto& s : samples) {
      double exponent = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double u = (g[k] - s[k]) / h[k];
        exponent += u * u;
      }
      sum += std::exp(-0.5 * exponent);
    }
    density.push_back(sum / norm);
  }
  return density;
}

std::vector<std::vector<double>> kde_grid(const std::vector<std::vector<double>>& samples, std::size_t per_dimension) {
  const auto h = scott_bandwidths(samples);
  const std::size_t d = h.size();
  if (per_dimension < 2) throw ContractError("grid needs at least 2 points per dimension");
  std::vector<double> lo(samples.front()), hi(samples.front());
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], s[k]);
      hi[k] = std::max(hi[k], s[k]);
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] -= h[k];
    hi[k] += h[k];
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_dimension;
  std::vector<std::vector<double>> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> point(d);
    std::size_t rest = flat;
    // Last dimension varies fastest.
    for (std::size_t k = d; k-- > 0;) {
      const std::size_t idx = rest % per_dimension;
      rest /= per_dimension;
      point[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx) / static_cast<double>(per_dimension - 1);
    }
    grid.push_back(std::move(point));
  }
  return grid;
}

}  // namespace neurotraj
