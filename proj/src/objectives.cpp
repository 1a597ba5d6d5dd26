#include "neurotraj/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "neurotraj/errors.hpp"

namespace neurotraj {

namespace {

constexpr double kSignEpsilon = 1e-9;

int sign_class(double v) {
  if (std::abs(v) < kSignEpsilon) return 0;
  return v > 0.0 ? 1 : -1;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

void check_shapes(std::span<const TrajectorySequence> predicted, std::span<const TrajectorySequence> actual) {
  if (predicted.size() != actual.size()) throw ContractError("predicted/actual sequence counts differ");
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != actual[i].size()) throw ContractError("predicted/actual sequence lengths differ");
  }
}

double mean_over(std::span<const TrajectorySequence> seqs, auto&& fn) {
  double sum = 0.0;
  for (const auto& s : seqs) sum += fn(s);
  return sum / static_cast<double>(seqs.size());
}

}  // namespace

std::string_view to_token(ObjectiveId id) {
  switch (id) {
    case ObjectiveId::kL1DistanceFeedback: return "l1";
    case ObjectiveId::kL2LateralVelocity: return "l2";
    case ObjectiveId::kL3LongitudinalVelocity: return "l3";
    case ObjectiveId::kRmse: return "rmse";
    case ObjectiveId::kSignLoss: return "signloss";
  }
  return "?";
}

ObjectiveId objective_from_token(std::string_view token) {
  for (auto id : {ObjectiveId::kL1DistanceFeedback, ObjectiveId::kL2LateralVelocity,
                  ObjectiveId::kL3LongitudinalVelocity, ObjectiveId::kRmse, ObjectiveId::kSignLoss}) {
    if (to_token(id) == token) return id;
  }
  throw ConfigError("unknown objective '" + std::string(token) + "'");
}

std::vector<ObjectiveId> parse_objective_list(std::string_view text) {
  std::vector<ObjectiveId> ids;
  while (!text.empty()) {
    const auto comma = text.find(',');
    ids.push_back(objective_from_token(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  validate_objective_ids(ids);
  return ids;
}

std::string join_tokens(const std::vector<ObjectiveId>& ids, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += separator;
    out += to_token(ids[i]);
  }
  return out;
}

void validate_objective_ids(const std::vector<ObjectiveId>& ids) {
  if (ids.empty()) throw ConfigError("objective list is empty");
  if (std::set<ObjectiveId>(ids.begin(), ids.end()).size() != ids.size()) {
    throw ConfigError("objective list contains duplicates");
  }
}

std::optional<double> ObjectiveVector::find(ObjectiveId id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return values[i];
  }
  return std::nullopt;
}

double l1_distance_feedback(const TrajectorySequence& seq) {
  if (seq.empty()) return 0.0;
  const auto& dest = seq.back();
  double sum = 0.0;
  for (const auto& p : seq) {
    const double dx = p.x - dest.x;
    const double dy = p.y - dest.y;
    sum += dx * dx + dy * dy;
  }
  return sum;
}

double angular_velocity(const TrajectoryPoint& prev, const TrajectoryPoint& p, const TrajectoryPoint& next) {
  const double dt = p.t - prev.t;
  if (!(dt > 0.0) || !(next.t > p.t)) throw DegenerateTimestepError("timestamps must be strictly increasing");
  const double heading_in = std::atan2(p.x - prev.x, p.y - prev.y);
  const double heading_out = std::atan2(next.x - p.x, next.y - p.y);
  return wrap_angle(heading_out - heading_in) / dt;
}

double l2_lateral_velocity(const TrajectorySequence& seq, const ObjectiveOptions& options) {
  if (seq.size() < 3) throw ContractError("l2 needs at least 3 points");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    const double w = angular_velocity(seq[i - 1], seq[i], seq[i + 1]);
    sum += options.signed_lateral_velocity ? w : std::abs(w);
  }
  return sum;
}

double l3_longitudinal_velocity(const TrajectorySequence& seq) {
  if (seq.size() < 2) throw ContractError("l3 needs at least 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const double dt = seq[i + 1].t - seq[i].t;
    if (!(dt > 0.0)) throw DegenerateTimestepError("timestamps must be strictly increasing");
    sum += std::clamp((seq[i + 1].y - seq[i].y) / dt, kVMin, kVMax);
  }
  return sum;
}

double l3_minimized(const TrajectorySequence& seq) {
  return static_cast<double>(seq.size() - 1) * kVMax - l3_longitudinal_velocity(seq);
}

double l3_raw_from_minimized(double minimized, std::size_t tau) {
  return static_cast<double>(tau - 1) * kVMax - minimized;
}

double rmse(std::span<const TrajectorySequence> predicted, std::span<const TrajectorySequence> actual) {
  check_shapes(predicted, actual);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    for (std::size_t i = 0; i < predicted[s].size(); ++i) {
      sum += std::hypot(predicted[s][i].x - actual[s][i].x, predicted[s][i].y - actual[s][i].y);
      ++n;
    }
  }
  if (n == 0) throw ContractError("rmse of an empty evaluation set");
  return sum / static_cast<double>(n);
}

double signloss(std::span<const TrajectorySequence> predicted, std::span<const TrajectorySequence> actual) {
  check_shapes(predicted, actual);
  double numerator = 0.0;
  std::size_t n = 0;
  std::size_t matches = 0;
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    for (std::size_t i = 0; i < predicted[s].size(); ++i) {
      const double xp = predicted[s][i].x;
      const double xa = actual[s][i].x;
      numerator += std::abs(std::abs(xp) - std::abs(xa));
      matches += sign_class(xp) == sign_class(xa) ? 1 : 0;
      ++n;
    }
  }
  if (n == 0) throw ContractError("signloss of an empty evaluation set");
  return (numerator / static_cast<double>(n)) / static_cast<double>(std::max<std::size_t>(1, matches));
}

ObjectiveVector assemble(const std::vector<ObjectiveId>& ids, std::span<const TrajectorySequence> predicted,
                         std::span<const TrajectorySequence> actual, const ObjectiveOptions& options) {
  if (ids.empty()) throw ContractError("objective id list is empty");
  if (predicted.empty()) throw ContractError("empty evaluation set");
  check_shapes(predicted, actual);

  ObjectiveVector out{ids, {}};
  out.values.reserve(ids.size());
  for (auto id : ids) {
    double v = 0.0;
    switch (id) {
      case ObjectiveId::kL1DistanceFeedback:
        v = mean_over(predicted, [](const auto& s) { return l1_distance_feedback(s); });
        break;
      case ObjectiveId::kL2LateralVelocity:
        v = mean_over(predicted, [&](const auto& s) { return l2_lateral_velocity(s, options); });
        break;
      case ObjectiveId::kL3LongitudinalVelocity:
        v = mean_over(predicted, [](const auto& s) { return l3_minimized(s); });
        break;
      case ObjectiveId::kRmse: v = rmse(predicted, actual); break;
      case ObjectiveId::kSignLoss: v = signloss(predicted, actual); break;
    }
    if (!std::isfinite(v)) throw ContractError("objective '" + std::string(to_token(id)) + "' is not finite");
    out.values.push_back(v);
  }
  return out;
}

}  // namespace neurotraj
