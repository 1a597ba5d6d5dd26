#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "neurotraj/errors.hpp"
#include "neurotraj/evaluator.hpp"

using namespace neurotraj;

namespace {

const Dataset& small_dataset() {
  static const Dataset d = [] {
    ScenarioConfig sc;
    sc.duration_s = 120;
    sc.lane_change_rate = 0.1;
    return window_and_split(generate_scenario(sc), 8, {0.6, 0.2, 0.2}, 7);
  }();
  return d;
}

const std::vector<ObjectiveId> kIds = {ObjectiveId::kRmse, ObjectiveId::kL2LateralVelocity,
                                       ObjectiveId::kL3LongitudinalVelocity};

bool same_result(const EvaluationResult& a, const EvaluationResult& b) {
  return a.objectives == b.objectives && a.test_objectives == b.test_objectives &&
         a.predicted_test == b.predicted_test && a.skills == b.skills && a.rmse_validation == b.rmse_validation &&
         a.rmse_test == b.rmse_test;
}

}  // namespace

TEST_CASE("skills are deterministic and bounded") {
  const SurrogateConfig cfg;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto g = random_genome(rng);
    const auto s = skill_scores(g, cfg);
    CHECK(s == skill_scores(g, cfg));
    for (double v : {s.accuracy, s.smoothness, s.speed}) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("skill subsets are disjoint and skip momentum") {
  const auto layout = skill_layout({});
  std::vector<std::size_t> all;
  for (const auto* part : {&layout.accuracy, &layout.smoothness, &layout.speed}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(std::find(all.begin(), all.end(), 2) == all.end());
  CHECK(layout.accuracy == std::vector<std::size_t>{0, 1, 3, 4});
  CHECK(layout.smoothness == std::vector<std::size_t>{5, 6, 7});
  CHECK(layout.speed == std::vector<std::size_t>{8, 9, 10, 11, 12});
  SurrogateConfig with_momentum;
  with_momentum.momentum_affects_accuracy = true;
  const auto l2 = skill_layout(with_momentum);
  CHECK(std::find(l2.accuracy.begin(), l2.accuracy.end(), 2) != l2.accuracy.end());
}

TEST_CASE("momentum locus is inert by default") {
  const SurrogateConfig cfg;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    auto g = random_genome(rng);
    const auto base = skill_scores(g, cfg);
    for (std::uint8_t a = 0; a < 4; ++a) {
      g[2] = a;
      CHECK(skill_scores(g, cfg) == base);
    }
  }
}

TEST_CASE("momentum moves only accuracy when enabled") {
  SurrogateConfig cfg;
  cfg.momentum_affects_accuracy = true;
  Rng rng(3);
  bool accuracy_moved = false;
  for (int i = 0; i < 200; ++i) {
    auto g = random_genome(rng);
    const auto base = skill_scores(g, cfg);
    g[2] = static_cast<std::uint8_t>((g[2] + 1) % 4);
    const auto moved = skill_scores(g, cfg);
    CHECK(moved.smoothness == base.smoothness);
    CHECK(moved.speed == base.speed);
    accuracy_moved = accuracy_moved || moved.accuracy != base.accuracy;
  }
  CHECK(accuracy_moved);
}

TEST_CASE("skills span the unit interval over random genomes") {
  const SurrogateConfig cfg;
  Rng rng(4);
  double lo[3] = {1, 1, 1}, hi[3] = {0, 0, 0};
  for (int i = 0; i < 10000; ++i) {
    const auto s = skill_scores(random_genome(rng), cfg);
    const double v[3] = {s.accuracy, s.smoothness, s.speed};
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(lo[k] <= 0.1);
    CHECK(hi[k] >= 0.9);
  }
}

TEST_CASE("perfect skills reproduce the ground truth") {
  const auto& d = small_dataset();
  const Genome g{};
  const auto pred = predict(d.test, {1.0, 1.0, 0.5}, g, {});
  REQUIRE(pred.size() == d.test.size());
  std::vector<TrajectorySequence> truth;
  for (const auto& p : d.test) truth.push_back(p.target);
  CHECK(rmse(pred, truth) < 1e-9);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t k = 0; k < pred[i].size(); ++k) {
      CHECK(pred[i][k].x == truth[i][k].x);
      CHECK(std::abs(pred[i][k].y - truth[i][k].y) < 1e-9);
      CHECK(pred[i][k].t == truth[i][k].t);
    }
  }
}

TEST_CASE("faster skill lowers minimized l3") {
  const auto& d = small_dataset();
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto g = random_genome(rng);
    const double acc = uniform_real(rng), smooth = uniform_real(rng);
    const auto fast = predict(d.validation, {acc, smooth, 1.0}, g, {});
    const auto slow = predict(d.validation, {acc, smooth, 0.0}, g, {});
    double f = 0, s = 0;
    for (const auto& q : fast) f += l3_minimized(q);
    for (const auto& q : slow) s += l3_minimized(q);
    CHECK(f < s);
  }
}

TEST_CASE("predictions satisfy the speed bounds") {
  const auto& d = small_dataset();
  SurrogateConfig cfg;
  cfg.speed_span = 0.2;
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    const auto g = random_genome(rng);
    for (const auto& q : predict(d.test, skill_scores(g, cfg), g, cfg)) CHECK(satisfies_sequence_invariants(q));
  }
}

TEST_CASE("evaluation is deterministic and order independent") {
  auto data = std::make_shared<const Dataset>(small_dataset());
  const SurrogateEvaluator ev(data, kIds, {});
  Rng rng(7);
  std::vector<Genome> genomes;
  for (int i = 0; i < 12; ++i) genomes.push_back(random_genome(rng));
  std::vector<EvaluationResult> forward, backward(genomes.size());
  for (const auto& g : genomes) forward.push_back(ev.evaluate(g));
  for (std::size_t i = genomes.size(); i-- > 0;) backward[i] = ev.evaluate(genomes[i]);
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    CHECK(same_result(forward[i], backward[i]));
    CHECK(forward[i].objectives.ids == kIds);
    CHECK(forward[i].test_objectives.ids == kIds);
    CHECK(forward[i].rmse_validation == forward[i].objectives[0]);
  }
  // a different quality seed gives a different landscape
  SurrogateConfig other;
  other.quality_seed = 1;
  CHECK(skill_scores(genomes[0], other) != skill_scores(genomes[0], {}));
}

TEST_CASE("evaluation contract errors") {
  Dataset empty = small_dataset();
  empty.validation.clear();
  CHECK_THROWS_AS(evaluate(Genome{}, empty, kIds, {}), ContractError);
  SurrogateConfig bad;
  bad.speed_span = 0.25;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.lateral_noise_max = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("surrogate config json round trip") {
  SurrogateConfig cfg;
  cfg.quality_seed = 17;
  cfg.speed_span = 0.1;
  cfg.momentum_affects_accuracy = true;
  CHECK(SurrogateConfig::from_json(nlohmann::json::parse(cfg.to_json().dump())) == cfg);
}
