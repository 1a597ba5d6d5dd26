#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "neurotraj/errors.hpp"
#include "neurotraj/objectives.hpp"
#include "neurotraj/random.hpp"

using namespace neurotraj;
using std::numbers::pi;

namespace {

constexpr double kTol = 1e-9;

TrajectorySequence at_speed(double v, std::size_t tau = 8, double dt = 0.25) {
  TrajectorySequence s;
  for (std::size_t i = 0; i < tau; ++i) s.push_back({0.0, v * dt * double(i), dt * double(i)});
  return s;
}

// A lane change: x follows a smooth S between 0 and 3.5 over the window.
TrajectorySequence s_curve() {
  TrajectorySequence s;
  const double dts[] = {0.0, 0.22, 0.27, 0.25, 0.3, 0.21, 0.26, 0.24};
  double t = 0.0;
  for (int i = 0; i < 8; ++i) {
    t += dts[i];
    const double x = 3.5 / (1.0 + std::exp(-(i - 3.5) * 1.4));
    s.push_back({x, 28.0 * t, t});
  }
  return s;
}

TrajectorySequence random_sequence(Rng& rng, std::size_t tau = 8) {
  TrajectorySequence s;
  double t = 0, y = 0, x = uniform_real(rng, -3, 3);
  for (std::size_t i = 0; i < tau; ++i) {
    s.push_back({x, y, t});
    const double dt = uniform_real(rng, 0.2, 0.3);
    t += dt;
    y += uniform_real(rng, 18, 40) * dt;
    x += uniform_real(rng, -0.4, 0.4);
  }
  return s;
}

// oracle: heading of a step, measured from +y towards +x
double heading(const TrajectoryPoint& a, const TrajectoryPoint& b) { return std::atan2(b.x - a.x, b.y - a.y); }

double wrap(double d) {
  while (d > pi) d -= 2 * pi;
  while (d <= -pi) d += 2 * pi;
  return d;
}

}  // namespace

TEST_CASE("l1 examples") {
  const TrajectorySequence same(5, TrajectoryPoint{1.0, 2.0, 0.0});
  CHECK(l1_distance_feedback(same) == 0.0);
  const TrajectorySequence three = {{0, 0, 0}, {0, 3, 0.25}, {0, 6, 0.5}};
  CHECK(std::abs(l1_distance_feedback(three) - 45.0) < kTol);

  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_sequence(rng);
    auto doubled = s;
    auto shifted = s;
    for (auto& p : doubled) {
      p.x *= 2;
      p.y *= 2;
    }
    for (auto& p : shifted) {
      p.x += 5.5;
      p.y -= 120.0;
    }
    CHECK(std::abs(l1_distance_feedback(doubled) - 4 * l1_distance_feedback(s)) < 1e-9 * l1_distance_feedback(doubled));
    CHECK(std::abs(l1_distance_feedback(shifted) - l1_distance_feedback(s)) < 1e-9 * l1_distance_feedback(s));
    // oracle: direct sum of squared norms to the last point
    double sum = 0;
    for (const auto& p : s) sum += std::pow(p.x - s.back().x, 2) + std::pow(p.y - s.back().y, 2);
    CHECK(std::abs(l1_distance_feedback(s) - sum) < 1e-9 * sum);
  }
}

TEST_CASE("angular velocity examples") {
  CHECK(std::abs(angular_velocity({0, 0, 0}, {1, 2, 0.25}, {2, 4, 0.5})) < kTol);
  // heading 0 (straight along y) then pi/4
  const TrajectoryPoint a{0, 0, 0}, b{0, 1, 0.25}, c{1, 2, 0.5};
  CHECK(std::abs(angular_velocity(a, b, c) - pi) < kTol);
  // heading +3.1 then -3.1: the wrapped change is 2pi - 6.2
  const TrajectoryPoint p0{0, 0, 0};
  const TrajectoryPoint p1{std::sin(3.1), std::cos(3.1), 1.0};
  const TrajectoryPoint p2{p1.x + std::sin(-3.1), p1.y + std::cos(-3.1), 2.0};
  const double w = angular_velocity(p0, p1, p2);
  CHECK(std::abs(w - (2 * pi - 6.2)) < 1e-3);
  CHECK(std::abs(w - 0.083) < 1e-3);
  CHECK_THROWS_AS(angular_velocity({0, 0, 1}, {0, 1, 1}, {0, 2, 2}), DegenerateTimestepError);
}

TEST_CASE("l2 examples") {
  CHECK(std::abs(l2_lateral_velocity(at_speed(30))) < kTol);
  const auto s = s_curve();
  double oracle = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    oracle += std::abs(wrap(heading(s[i], s[i + 1]) - heading(s[i - 1], s[i])) / (s[i].t - s[i - 1].t));
  }
  CHECK(oracle > 0.1);
  CHECK(std::abs(l2_lateral_velocity(s) - oracle) < kTol);
  auto mirrored = s;
  for (auto& p : mirrored) p.x = -p.x;
  CHECK(std::abs(l2_lateral_velocity(mirrored) - l2_lateral_velocity(s)) < kTol);
  // signed mode is the raw sum; mirroring negates it
  const ObjectiveOptions raw{true};
  CHECK(std::abs(l2_lateral_velocity(mirrored, raw) + l2_lateral_velocity(s, raw)) < kTol);
  CHECK(std::abs(l2_lateral_velocity(s, raw)) <= l2_lateral_velocity(s) + kTol);
}

TEST_CASE("l3 examples") {
  CHECK(std::abs(l3_longitudinal_velocity(at_speed(30)) - 210.0) < kTol);
  const TrajectorySequence fast = {{0, 0, 0}, {0, 12.5, 0.25}};
  CHECK(std::abs(l3_longitudinal_velocity(fast) - kVMax) < kTol);
  CHECK(std::abs(kVMax - 36.11) < 0.01);
  TrajectorySequence sideways;
  for (int i = 0; i < 8; ++i) sideways.push_back({0.3 * i, 0.0, 0.25 * i});
  CHECK(std::abs(l3_longitudinal_velocity(sideways) - 7 * kVMin) < kTol);
  CHECK_THROWS_AS(l3_longitudinal_velocity({{0, 0, 0}, {0, 5, 0}}), DegenerateTimestepError);
}

TEST_CASE("l3 minimized examples") {
  CHECK(std::abs(l3_minimized(at_speed(kVMax))) < kTol);
  CHECK(std::abs(l3_minimized(at_speed(kVMin)) - 7 * (kVMax - kVMin)) < kTol);
  CHECK(std::abs(l3_minimized(at_speed(kVMin)) - 97.2) < 0.05);
  CHECK(l3_minimized(at_speed(30)) < l3_minimized(at_speed(29)));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_sequence(rng);
    CHECK(l3_minimized(s) >= 0.0);
    CHECK(std::abs(l3_raw_from_minimized(l3_minimized(s), 8) - l3_longitudinal_velocity(s)) < 1e-9);
  }
}

TEST_CASE("rmse examples") {
  const std::vector<TrajectorySequence> a = {at_speed(30)};
  CHECK(rmse(a, a) == 0.0);
  const std::vector<TrajectorySequence> one = {{{0, 0, 0}}};
  const std::vector<TrajectorySequence> off = {{{3, 4, 0}}};
  CHECK(std::abs(rmse(off, one) - 5.0) < kTol);
  const std::vector<TrajectorySequence> pair_a = {{{0, 0, 0}, {0, 0, 1}}};
  const std::vector<TrajectorySequence> pair_b = {{{0, 0, 0}, {6, 8, 1}}};
  CHECK(std::abs(rmse(pair_b, pair_a) - 5.0) < kTol);
  CHECK(rmse(pair_a, pair_b) == rmse(pair_b, pair_a));
  const std::vector<TrajectorySequence> short_one = {{{0, 0, 0}}};
  CHECK_THROWS_AS(rmse(pair_a, short_one), ContractError);
  const std::vector<TrajectorySequence> two = {at_speed(30), at_speed(30)};
  CHECK_THROWS_AS(rmse(a, two), ContractError);
}

TEST_CASE("signloss examples") {
  const std::vector<TrajectorySequence> a = {s_curve()};
  CHECK(signloss(a, a) == 0.0);
  const std::vector<TrajectorySequence> plus2 = {{{2, 0, 0}}};
  const std::vector<TrajectorySequence> minus2 = {{{-2, 0, 0}}};
  const std::vector<TrajectorySequence> minus3 = {{{-3, 0, 0}}};
  CHECK(signloss(minus2, plus2) == 0.0);
  CHECK(std::abs(signloss(minus3, plus2) - 1.0) < kTol);
  // all five signs match: numerator / 5
  std::vector<TrajectorySequence> truth = {{{1, 0, 0}, {2, 0, 1}, {3, 0, 2}, {4, 0, 3}, {5, 0, 4}}};
  auto pred = truth;
  double numerator = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    pred[0][i].x += 0.1 * double(i + 1);
    numerator += 0.1 * double(i + 1);
  }
  numerator /= 5;
  CHECK(std::abs(signloss(pred, truth) - numerator / 5) < kTol);
  CHECK(signloss(pred, truth) <= numerator);
  // sign(0) is its own class
  const std::vector<TrajectorySequence> zero = {{{0, 0, 0}}};
  const std::vector<TrajectorySequence> tiny = {{{1e-12, 0, 0}}};
  const std::vector<TrajectorySequence> small = {{{0.5, 0, 0}}};
  CHECK(signloss(tiny, zero) < kTol);
  CHECK(std::abs(signloss(small, zero) - 0.5) < kTol);
  CHECK_THROWS_AS(signloss(a, zero), ContractError);
}

TEST_CASE("assemble matches the individual objectives") {
  Rng rng(9);
  std::vector<TrajectorySequence> pred, truth;
  for (int i = 0; i < 20; ++i) {
    pred.push_back(random_sequence(rng));
    truth.push_back(random_sequence(rng));
  }
  const std::vector<ObjectiveId> ids = {ObjectiveId::kRmse, ObjectiveId::kL2LateralVelocity,
                                        ObjectiveId::kL3LongitudinalVelocity};
  const auto v = assemble(ids, pred, truth);
  REQUIRE(v.size() == 3);
  CHECK(v.ids == ids);
  double l2 = 0, l3 = 0;
  for (const auto& s : pred) {
    l2 += l2_lateral_velocity(s);
    l3 += l3_minimized(s);
  }
  CHECK(std::abs(v[0] - rmse(pred, truth)) < kTol);
  CHECK(std::abs(v[1] - l2 / 20) < kTol);
  CHECK(std::abs(v[2] - l3 / 20) < kTol);

  const std::vector<ObjectiveId> all = {ObjectiveId::kL1DistanceFeedback, ObjectiveId::kSignLoss};
  const auto w = assemble(all, pred, truth);
  double l1 = 0;
  for (const auto& s : pred) l1 += l1_distance_feedback(s);
  CHECK(std::abs(w[0] - l1 / 20) < 1e-9 * w[0]);
  CHECK(std::abs(w[1] - signloss(pred, truth)) < kTol);
  CHECK(w.find(ObjectiveId::kSignLoss) == w[1]);
  CHECK_FALSE(w.find(ObjectiveId::kRmse).has_value());

  CHECK(assemble(ids, truth, truth)[0] == 0.0);
  const std::vector<TrajectorySequence> none;
  CHECK_THROWS_AS(assemble(ids, none, none), ContractError);
  for (double x : v.values) CHECK((std::isfinite(x) && x >= 0));
}

TEST_CASE("objective tokens") {
  CHECK(to_token(ObjectiveId::kL1DistanceFeedback) == "l1");
  CHECK(to_token(ObjectiveId::kSignLoss) == "signloss");
  CHECK(objective_from_token("rmse") == ObjectiveId::kRmse);
  CHECK_THROWS_AS(objective_from_token("l4"), ConfigError);
  const auto ids = parse_objective_list("rmse,l2,l3");
  CHECK(join_tokens(ids) == "rmse,l2,l3");
  CHECK_THROWS_AS(parse_objective_list("rmse,rmse"), ConfigError);
  CHECK_THROWS_AS(validate_objective_ids({}), ConfigError);
}
