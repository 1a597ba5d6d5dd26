#include <algorithm>
#include <cmath>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"

namespace neurotraj {

nlohmann::ordered_json ValidityReport::to_json() const {
  return {{"valid", valid},
          {"spread_ok", spread_ok},
          {"symmetry_ok", symmetry_ok},
          {"final_position_ok", final_position_ok},
          {"max_abs_x", max_abs_x},
          {"mean_final_x", mean_final_x},
          {"mean_final_y", mean_final_y}};
}

ValidityReport classify_validity(std::span<const TrajectorySequence> predicted_test,
                                 const ValidityThresholds& thresholds) {
  if (predicted_test.empty()) throw ContractError("validity needs at least one predicted sequence");
  ValidityReport report;
  double final_x = 0.0;
  double final_y = 0.0;
  std::size_t sequences = 0;
  for (const auto& seq : predicted_test) {
    if (seq.empty()) continue;
    for (const auto& p : seq) report.max_abs_x = std::max(report.max_abs_x, std::abs(p.x));
    final_x += seq.back().x;
    final_y += seq.back().y - seq.front().y;
    ++sequences;
  }
  if (sequences == 0) throw ContractError("validity needs non-empty sequences");
  report.mean_final_x = final_x / static_cast<double>(sequences);
  report.mean_final_y = final_y / static_cast<double>(sequences);

  report.spread_ok = report.max_abs_x > thresholds.spread;
  report.symmetry_ok = std::abs(report.mean_final_x) <= thresholds.asymmetry;
  report.final_position_ok = report.mean_final_y > thresholds.final_position;
  report.valid = report.spread_ok && report.symmetry_ok && report.final_position_ok;
  return report;
}

}  // namespace neurotraj
