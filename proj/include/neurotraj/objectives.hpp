#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurotraj/trajectory.hpp"

namespace neurotraj {

enum class ObjectiveId {
  kL1DistanceFeedback,
  kL2LateralVelocity,
  kL3LongitudinalVelocity,
  kRmse,
  kSignLoss,
};

/// Lowercase tokens used in configs and output headers: l1, l2, l3, rmse, signloss.
std::string_view to_token(ObjectiveId id);
ObjectiveId objective_from_token(std::string_view token);
std::vector<ObjectiveId> parse_objective_list(std::string_view comma_separated);
std::string join_tokens(const std::vector<ObjectiveId>& ids, std::string_view separator = ",");

/// Throws ConfigError on an empty or duplicated id list.
void validate_objective_ids(const std::vector<ObjectiveId>& ids);

/// Objective values in minimization form, ordered as `ids`.
struct ObjectiveVector {
  std::vector<ObjectiveId> ids;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::optional<double> find(ObjectiveId id) const;

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

struct ObjectiveOptions {
  /// Sum signed angular velocities in l2 instead of magnitudes.
  bool signed_lateral_velocity = false;
};

double l1_distance_feedback(const TrajectorySequence& seq);

/// Heading rate at `p` in rad/s; the heading difference is wrapped into (-pi, pi].
double angular_velocity(const TrajectoryPoint& prev, const TrajectoryPoint& p, const TrajectoryPoint& next);

double l2_lateral_velocity(const TrajectorySequence& seq, const ObjectiveOptions& options = {});

/// Sum of per-step longitudinal speeds, each clamped to [kVMin, kVMax]. Larger is better.
double l3_longitudinal_velocity(const TrajectorySequence& seq);

/// (tau - 1) * kVMax - l3: the non-negative minimization form.
double l3_minimized(const TrajectorySequence& seq);
double l3_raw_from_minimized(double minimized, std::size_t tau);

double rmse(std::span<const TrajectorySequence> predicted, std::span<const TrajectorySequence> actual);
double signloss(std::span<const TrajectorySequence> predicted, std::span<const TrajectorySequence> actual);

ObjectiveVector assemble(const std::vector<ObjectiveId>& ids, std::span<const TrajectorySequence> predicted,
                         std::span<const TrajectorySequence> actual, const ObjectiveOptions& options = {});

}  // namespace neurotraj
