#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotraj/objectives.hpp"
#include "neurotraj/trajectory.hpp"

namespace neurotraj {

// ---------------------------------------------------------------------------
// Rank correlation and two-sample tests

struct CorrelationResult {
  double coefficient = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;

  nlohmann::ordered_json to_json() const;
};

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rho: Pearson correlation of average ranks. Two-sided p-value from
/// `permutation_resamples` label shuffles when n < 500, else the Student-t approximation.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           std::size_t permutation_resamples = 10000, std::uint64_t seed = 0x5eed);

/// Two-sided permutation test on |mean(a) - mean(b)| with the (count + 1) / (resamples + 1) estimate.
double permutation_test(std::span<const double> a, std::span<const double> b, std::size_t resamples = 10000,
                        std::uint64_t seed = 0x5eed);

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test, normal approximation with tie correction.
double ranksum_test(std::span<const double> a, std::span<const double> b);

double bonferroni(double alpha, std::size_t comparisons);

// ---------------------------------------------------------------------------
// Valid-model classification

struct ValidityReport {
  bool valid = false;
  bool spread_ok = false;
  bool symmetry_ok = false;
  bool final_position_ok = false;
  double max_abs_x = 0.0;
  double mean_final_x = 0.0;
  double mean_final_y = 0.0;  ///< mean displacement of the last point from the first

  nlohmann::ordered_json to_json() const;
  friend bool operator==(const ValidityReport&, const ValidityReport&) = default;
};

struct ValidityThresholds {
  double spread = 2.0;          ///< max |x| must exceed this
  double asymmetry = 1.0;       ///< |mean final x| must not exceed this
  double final_position = 40.0; ///< mean final y displacement must exceed this
};

ValidityReport classify_validity(std::span<const TrajectorySequence> predicted_test,
                                 const ValidityThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Hypervolume

struct HypervolumeReport {
  double value = 0.0;
  std::size_t dropped = 0;  ///< points not dominating the reference point
};

/// Exact Lebesgue measure of the region dominated by `front` and bounded by `ref`
/// (minimization). m = 2 by a sorted sweep, m = 3 by slicing along the last objective.
HypervolumeReport hypervolume_report(const std::vector<std::vector<double>>& front, std::span<const double> ref);
double hypervolume(const std::vector<std::vector<double>>& front, std::span<const double> ref);

/// Componentwise max over every point plus `margin` of the observed range
/// (or of max(|max|, 1) when the range is zero).
std::vector<double> reference_point(const std::vector<std::vector<double>>& points, double margin = 0.1);

// ---------------------------------------------------------------------------
// Kernel density estimation

/// Scott's rule per dimension: sigma_k * n^(-1 / (d + 4)).
std::vector<double> scott_bandwidths(const std::vector<std::vector<double>>& samples);

/// Gaussian product-kernel density of `samples` evaluated at each grid point.
std::vector<double> kde_density(const std::vector<std::vector<double>>& samples,
                                const std::vector<std::vector<double>>& grid);

/// Regular grid over the sample bounding box widened by one bandwidth per side.
std::vector<std::vector<double>> kde_grid(const std::vector<std::vector<double>>& samples, std::size_t per_dimension);

}  // namespace neurotraj
