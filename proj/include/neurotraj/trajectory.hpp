#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace neurotraj {

/// Longitudinal speed bounds: 80 km/h and 130 km/h in m/s.
inline constexpr double kVMin = 80.0 / 3.6;
inline constexpr double kVMax = 130.0 / 3.6;
inline constexpr double kLaneWidth = 3.5;
inline constexpr std::size_t kDefaultTau = 8;

struct TrajectoryPoint {
  double x = 0.0;  ///< lateral position (m)
  double y = 0.0;  ///< longitudinal position (m)
  double t = 0.0;  ///< timestamp (s)

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

using TrajectorySequence = std::vector<TrajectoryPoint>;

struct ScenarioConfig {
  double duration_s = 600.0;
  double lane_change_rate = 0.05;  ///< expected lane changes per second
  std::uint64_t seed = 7;
  double mean_speed = 29.0;        ///< m/s, long-run level of the speed walk
  double speed_volatility = 0.8;   ///< m/s per sqrt(s)
  double speed_reversion = 0.05;   ///< 1/s pull towards mean_speed
  double min_dt = 0.2;
  double max_dt = 0.3;
  double lane_change_duration = 2.0;
  int lanes = 3;                   ///< odd count of lanes centred on x = 0

  void validate() const;
};

/// Continuous ego path on a straight multi-lane highway.
std::vector<TrajectoryPoint> generate_scenario(const ScenarioConfig& config);

/// Checks the sequence invariants: strictly increasing t, dt in [min_dt, max_dt],
/// longitudinal step speed in [kVMin, kVMax] (with `tolerance` slack).
bool satisfies_sequence_invariants(const TrajectorySequence& seq, double min_dt = 0.2, double max_dt = 0.3,
                                   double tolerance = 1e-9);

struct TrajectoryPair {
  std::size_t id = 0;  ///< index of the first input point in the source path
  TrajectorySequence input;
  TrajectorySequence target;

  friend bool operator==(const TrajectoryPair&, const TrajectoryPair&) = default;
};

struct SplitRatio {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;

  friend bool operator==(const SplitRatio&, const SplitRatio&) = default;
};

struct Dataset {
  std::size_t tau = kDefaultTau;
  SplitRatio ratio;
  std::uint64_t seed = 0;
  std::vector<TrajectoryPair> train;
  std::vector<TrajectoryPair> validation;
  std::vector<TrajectoryPair> test;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// All (input, target) window pairs with stride 1: N - 2*tau + 1 pairs for N points.
std::vector<TrajectoryPair> sliding_pairs(const std::vector<TrajectoryPoint>& path, std::size_t tau,
                                          std::size_t first_point = 0,
                                          std::size_t end_point = static_cast<std::size_t>(-1));

/// Withholds a contiguous test tail, then shuffles and splits the remaining pairs.
///
/// When the test share is non-zero the path is cut at a point boundary: test pairs are
/// windowed from the tail segment and train/validation pairs from the head segment, so
/// no window ever straddles the cut. The split sizes apply to the pairs that fit in the
/// two segments (N - 4*tau + 2 of them).
Dataset window_and_split(const std::vector<TrajectoryPoint>& path, std::size_t tau, const SplitRatio& ratio,
                         std::uint64_t seed);

/// CSV with header `pair_id,role,step,x,y,t`; steps 0..tau-1 are the input window and
/// tau..2*tau-1 the target window.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& file);
nlohmann::ordered_json dataset_manifest(const Dataset& data);
void write_dataset(const Dataset& data, const std::filesystem::path& directory);
Dataset read_dataset(const std::filesystem::path& directory);

}  // namespace neurotraj
