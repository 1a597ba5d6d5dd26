#include "neurotraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "neurotraj/errors.hpp"
#include "neurotraj/random.hpp"

namespace neurotraj {

namespace {

// Speeds are kept this far inside the legal band so that step speeds recomputed from
// rounded positions still satisfy the bounds.
constexpr double kSpeedMargin = 1e-6;

double exponential(Rng& rng, double rate) {
  double u = uniform_real(rng);
  while (u <= 0.0) u = uniform_real(rng);
  return -std::log(u) / rate;
}

// Logistic ramp rescaled to hit exactly 0 at u = 0 and 1 at u = 1.
double lane_change_profile(double u) {
  constexpr double kSteepness = 10.0;
  const auto logistic = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double lo = logistic(-kSteepness / 2);
  const double hi = logistic(kSteepness / 2);
  u = std::clamp(u, 0.0, 1.0);
  return (logistic(kSteepness * (u - 0.5)) - lo) / (hi - lo);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("scenario duration must be positive");
  if (!(lane_change_rate >= 0.0)) throw ConfigError("lane change rate must be non-negative");
  if (!(min_dt > 0.0 && max_dt >= min_dt)) throw ConfigError("sample interval bounds are invalid");
  if (!(mean_speed >= kVMin && mean_speed <= kVMax)) throw ConfigError("mean speed must lie in [v_min, v_max]");
  if (!(speed_volatility >= 0.0 && speed_reversion >= 0.0)) throw ConfigError("speed walk parameters must be >= 0");
  if (!(lane_change_duration > 0.0)) throw ConfigError("lane change duration must be positive");
  if (lanes < 1 || lanes % 2 == 0) throw ConfigError("lane count must be a positive odd number");
}

std::vector<TrajectoryPoint> generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const int centre_lane = config.lanes / 2;
  const auto lane_x = [&](int lane) { return (lane - centre_lane) * kLaneWidth; };

  int lane = centre_lane;
  double t = 0.0;
  double y = 0.0;
  double speed = config.mean_speed;

  bool manoeuvring = false;
  double manoeuvre_start = 0.0;
  int from_lane = lane;
  int to_lane = lane;
  double next_event = config.lane_change_rate > 0.0 ? exponential(rng, config.lane_change_rate) : INFINITY;

  std::vector<TrajectoryPoint> path;
  path.push_back({lane_x(lane), y, t});

  for (;;) {
    const double dt = uniform_real(rng, config.min_dt, config.max_dt);
    if (t + dt > config.duration_s) break;
    speed += config.speed_reversion * (config.mean_speed - speed) * dt +
             config.speed_volatility * std::sqrt(dt) * standard_normal(rng);
    speed = std::clamp(speed, kVMin + kSpeedMargin, kVMax - kSpeedMargin);
    t += dt;
    y += speed * dt;

    if (!manoeuvring && t >= next_event && config.lanes > 1) {
      from_lane = lane;
      if (lane == 0) {
        to_lane = 1;
      } else if (lane == config.lanes - 1) {
        to_lane = lane - 1;
      } else {
        to_lane = bernoulli(rng, 0.5) ? lane + 1 : lane - 1;
      }
      manoeuvring = true;
      manoeuvre_start = t;
    }

    double x = lane_x(lane);
    if (manoeuvring) {
      const double u = (t - manoeuvre_start) / config.lane_change_duration;
      if (u >= 1.0) {
        lane = to_lane;
        manoeuvring = false;
        x = lane_x(lane);
        next_event = t + exponential(rng, config.lane_change_rate);
      } else {
        x = lane_x(from_lane) + (lane_x(to_lane) - lane_x(from_lane)) * lane_change_profile(u);
      }
    }
    path.push_back({x, y, t});
  }
  return path;
}

bool satisfies_sequence_invariants(const TrajectorySequence& seq, double min_dt, double max_dt, double tolerance) {
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const double dt = seq[i].t - seq[i - 1].t;
    if (!(dt > 0.0)) return false;
    if (dt < min_dt - tolerance || dt > max_dt + tolerance) return false;
    const double v = (seq[i].y - seq[i - 1].y) / dt;
    if (v < kVMin - tolerance || v > kVMax + tolerance) return false;
  }
  return true;
}

std::vector<TrajectoryPair> sliding_pairs(const std::vector<TrajectoryPoint>& path, std::size_t tau,
                                          std::size_t first_point, std::size_t end_point) {
  if (tau == 0) throw ContractError("window length must be positive");
  end_point = std::min(end_point, path.size());
  std::vector<TrajectoryPair> pairs;
  if (end_point < first_point + 2 * tau) return pairs;
  pairs.reserve(end_point - first_point - 2 * tau + 1);
  for (std::size_t start = first_point; start + 2 * tau <= end_point; ++start) {
    TrajectoryPair pair;
    pair.id = start;
    pair.input.assign(path.begin() + static_cast<std::ptrdiff_t>(start),
                      path.begin() + static_cast<std::ptrdiff_t>(start + tau));
    pair.target.assign(path.begin() + static_cast<std::ptrdiff_t>(start + tau),
                       path.begin() + static_cast<std::ptrdiff_t>(start + 2 * tau));
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

Dataset window_and_split(const std::vector<TrajectoryPoint>& path, std::size_t tau, const SplitRatio& ratio,
                         std::uint64_t seed) {
  if (tau == 0) throw ConfigError("window length must be positive");
  if (ratio.train < 0.0 || ratio.validation < 0.0 || ratio.test < 0.0 ||
      std::abs(ratio.train + ratio.validation + ratio.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const std::size_t n_points = path.size();
  if (n_points < 2 * tau) {
    throw InsufficientDataError("path has " + std::to_string(n_points) + " points; need at least " +
                                std::to_string(2 * tau));
  }

  Dataset data;
  data.tau = tau;
  data.ratio = ratio;
  data.seed = seed;

  std::vector<TrajectoryPair> pool;
  std::size_t extractable = 0;
  if (ratio.test > 0.0) {
    if (n_points + 2 < 4 * tau + 2) {
      throw InsufficientDataError("path too short to withhold a test tail");
    }
    extractable = n_points + 2 - 4 * tau;
    const auto n_test =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio.test * static_cast<double>(extractable))));
    if (n_test > extractable) throw InsufficientDataError("path too short to withhold a test tail");
    const std::size_t cut = n_points - (n_test + 2 * tau - 1);
    data.test = sliding_pairs(path, tau, cut, n_points);
    pool = sliding_pairs(path, tau, 0, cut);
  } else {
    pool = sliding_pairs(path, tau);
    extractable = pool.size();
  }

  Rng rng(seed);
  shuffle(pool.begin(), pool.end(), rng);

  const auto n_val = std::min(
      pool.size(), static_cast<std::size_t>(std::llround(ratio.validation * static_cast<double>(extractable))));
  const std::size_t n_train = pool.size() - n_val;
  data.train.assign(std::make_move_iterator(pool.begin()),
                    std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(n_train)));
  data.validation.assign(std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(n_train)),
                         std::make_move_iterator(pool.end()));
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << "pair_id,role,step,x,y,t\n";
  const auto emit = [&](const std::vector<TrajectoryPair>& pairs, const char* role) {
    for (const auto& pair : pairs) {
      std::size_t step = 0;
      for (const auto* seq : {&pair.input, &pair.target}) {
        for (const auto& p : *seq) {
          out << pair.id << ',' << role << ',' << step++ << ',' << format_double(p.x) << ','
              << format_double(p.y) << ',' << format_double(p.t) << '\n';
        }
      }
    }
  };
  emit(data.train, "train");
  emit(data.validation, "val");
  emit(data.test, "test");
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

nlohmann::ordered_json dataset_manifest(const Dataset& data) {
  nlohmann::ordered_json m;
  m["tau"] = data.tau;
  m["ratios"] = {data.ratio.train, data.ratio.validation, data.ratio.test};
  m["seed"] = data.seed;
  m["counts"] = {{"train", data.train.size()}, {"val", data.validation.size()}, {"test", data.test.size()}};
  return m;
}

void write_dataset(const Dataset& data, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  write_dataset_csv(data, directory / "dataset.csv");
  std::ofstream out(directory / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing in " + directory.string());
  out << dataset_manifest(data).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing manifest in " + directory.string());
}

Dataset read_dataset(const std::filesystem::path& directory) {
  std::ifstream manifest_in(directory / "manifest.json");
  if (!manifest_in) throw MalformedDataError("missing manifest.json in " + directory.string());
  Dataset data;
  try {
    const auto m = nlohmann::json::parse(manifest_in);
    data.tau = m.at("tau").get<std::size_t>();
    const auto& r = m.at("ratios");
    data.ratio = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    data.seed = m.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDataError(std::string("bad manifest: ") + e.what());
  }

  std::ifstream in(directory / "dataset.csv");
  if (!in) throw MalformedDataError("missing dataset.csv in " + directory.string());
  std::string line;
  std::getline(in, line);
  if (line != "pair_id,role,step,x,y,t") throw MalformedDataError("unexpected dataset.csv header");

  // Pairs are emitted contiguously; rebuild them in file order.
  std::map<std::string, std::vector<TrajectoryPair>*> roles{
      {"train", &data.train}, {"val", &data.validation}, {"test", &data.test}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id_s, role, step_s, x_s, y_s, t_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, role, ',') || !std::getline(ss, step_s, ',') ||
        !std::getline(ss, x_s, ',') || !std::getline(ss, y_s, ',') || !std::getline(ss, t_s, ',')) {
      throw MalformedDataError("short dataset row: " + line);
    }
    auto it = roles.find(role);
    if (it == roles.end()) throw MalformedDataError("unknown role '" + role + "'");
    std::size_t id = 0;
    std::size_t step = 0;
    TrajectoryPoint p;
    try {
      id = std::stoull(id_s);
      step = std::stoull(step_s);
      p = {std::stod(x_s), std::stod(y_s), std::stod(t_s)};
    } catch (const std::exception&) {
      throw MalformedDataError("non-numeric dataset row: " + line);
    }
    auto& pairs = *it->second;
    if (step == 0) {
      pairs.push_back(TrajectoryPair{id, {}, {}});
    } else if (pairs.empty() || pairs.back().id != id) {
      throw MalformedDataError("dataset rows out of order at: " + line);
    }
    auto& pair = pairs.back();
    if (step != pair.input.size() + pair.target.size()) throw MalformedDataError("step gap at: " + line);
    (step < data.tau ? pair.input : pair.target).push_back(p);
  }
  for (const auto& [name, pairs] : roles) {
    for (const auto& pair : *pairs) {
      if (pair.input.size() != data.tau || pair.target.size() != data.tau) {
        throw MalformedDataError("incomplete " + name + " pair " + std::to_string(pair.id));
      }
    }
  }
  return data;
}

}  // namespace neurotraj
