#include <algorithm>
#include <array>
#include <cmath>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"

namespace neurotraj {

namespace {

// Points given as (x, y) sorted by x ascending; returns the dominated area up to ref.
double sweep_2d(const std::vector<std::array<double, 2>>& sorted, double ref_x, double ref_y) {
  double area = 0.0;
  double frontier_y = ref_y;
  for (const auto& [x, y] : sorted) {
    if (y < frontier_y) {
      area += (ref_x - x) * (frontier_y - y);
      frontier_y = y;
    }
  }
  return area;
}

}  // namespace

HypervolumeReport hypervolume_report(const std::vector<std::vector<double>>& front, std::span<const double> ref) {
  const std::size_t m = ref.size();
  if (m != 2 && m != 3) throw ConfigError("hypervolume supports 2 or 3 objectives");

  HypervolumeReport report;
  std::vector<std::vector<double>> kept;
  kept.reserve(front.size());
  for (const auto& p : front) {
    if (p.size() != m) throw ContractError("front point dimension differs from the reference point");
    bool inside = true;
    for (std::size_t j = 0; j < m; ++j) inside = inside && p[j] < ref[j];
    if (inside) {
      kept.push_back(p);
    } else {
      bool on_boundary = true;
      for (std::size_t j = 0; j < m; ++j) on_boundary = on_boundary && p[j] <= ref[j];
      if (!on_boundary) ++report.dropped;  // points on the boundary add nothing but are legal
    }
  }
  if (kept.empty()) return report;

  if (m == 2) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(kept.size());
    for (const auto& p : kept) pts.push_back({p[0], p[1]});
    std::sort(pts.begin(), pts.end());
    report.value = sweep_2d(pts, ref[0], ref[1]);
    return report;
  }

  // Slice along the third objective: between consecutive z levels the cross-section is
  // the 2D hypervolume of every point at or below the lower level.
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  std::vector<std::array<double, 2>> active;
  double volume = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::array<double, 2> q{kept[i][0], kept[i][1]};
    active.insert(std::upper_bound(active.begin(), active.end(), q), q);
    const double z_next = i + 1 < kept.size() ? kept[i + 1][2] : ref[2];
    const double depth = z_next - kept[i][2];
    if (depth > 0.0) volume += sweep_2d(active, ref[0], ref[1]) * depth;
  }
  report.value = volume;
  return report;
}

double hypervolume(const std::vector<std::vector<double>>& front, std::span<const double> ref) {
  return hypervolume_report(front, ref).value;
}

std::vector<double> reference_point(const std::vector<std::vector<double>>& points, double margin) {
  if (points.empty()) throw ContractError("reference point needs at least one point");
  const std::size_t m = points.front().size();
  std::vector<double> lo(points.front()), hi(points.front());
  for (const auto& p : points) {
    if (p.size() != m) throw ContractError("points differ in dimension");
    for (std::size_t j = 0; j < m; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  std::vector<double> ref(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double range = hi[j] - lo[j];
    ref[j] = hi[j] + margin * (range > 0.0 ? range : std::max(std::abs(hi[j]), 1.0));
  }
  return ref;
}

}  // namespace neurotraj
