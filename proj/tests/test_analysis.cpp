#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neurotraj/analysis.hpp"
#include "neurotraj/errors.hpp"
#include "neurotraj/random.hpp"

using namespace neurotraj;

namespace {

std::vector<double> seq(std::initializer_list<double> v) { return v; }

// one sequence that ends at (x_end, y_end) and peaks at |x| = x_peak
TrajectorySequence ending_at(double x_peak, double x_end, double y_end) {
  TrajectorySequence s;
  for (int i = 0; i < 8; ++i) {
    const double u = i / 7.0;
    const double x = i == 7 ? x_end : (i == 4 ? x_peak : x_end * u);
    s.push_back({x, 100.0 + y_end * u, 0.25 * i});
  }
  return s;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// oracle: Kolmogorov-Smirnov distance from U(0,1)
double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double d = 0;
  const double n = double(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max({d, double(i + 1) / n - v[i], v[i] - double(i) / n});
  }
  return d;
}

}  // namespace

TEST_CASE("spearman examples") {
  const auto x = seq({1, 2, 3, 4, 5});
  CHECK(std::abs(spearman(x, x).coefficient - 1.0) < 1e-12);
  const auto neg = seq({-1, -2, -3, -4, -5});
  CHECK(std::abs(spearman(x, neg).coefficient + 1.0) < 1e-12);
  const auto y = seq({1, 3, 2, 5, 4});
  const auto r = spearman(x, y);
  CHECK(std::abs(r.coefficient - 0.8) < 1e-12);
  // sum of squared rank differences: 1 - 6*4 / (5*24)
  CHECK(std::abs(1.0 - 6.0 * 4.0 / (5.0 * 24.0) - 0.8) < 1e-12);
  CHECK(r.n == 5);
  CHECK((r.p_value > 0.0 && r.p_value <= 1.0));
}

TEST_CASE("average ranks share ties") {
  CHECK(average_ranks(seq({10, 20, 20, 5})) == seq({2, 3.5, 3.5, 1}));
  CHECK(average_ranks(seq({1, 1, 1})) == seq({2, 2, 2}));
}

TEST_CASE("spearman is invariant under monotone transforms") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a, b, ta, tb;
    for (int k = 0; k < 30; ++k) {
      a.push_back(uniform_real(rng, 0.1, 5));
      b.push_back(a.back() + uniform_real(rng, -2, 2));
      ta.push_back(std::exp(a.back()));
      tb.push_back(b.back() * 3 - 7);
    }
    const double r1 = spearman(a, b, 10).coefficient;
    const double r2 = spearman(ta, tb, 10).coefficient;
    CHECK(std::abs(r1 - r2) < 1e-12);
    CHECK(std::abs(r1) <= 1.0);
  }
}

TEST_CASE("spearman errors") {
  CHECK_THROWS_AS(spearman(seq({1, 2}), seq({1, 2})), ContractError);
  CHECK_THROWS_AS(spearman(seq({1, 2, 3}), seq({1, 2})), ContractError);
  CHECK_THROWS_AS(spearman(seq({1, 1, 1, 1}), seq({1, 2, 3, 4})), UndefinedCorrelationError);
}

TEST_CASE("spearman p-values") {
  Rng rng(2);
  std::vector<double> a, b, noise;
  for (int k = 0; k < 600; ++k) {
    a.push_back(uniform_real(rng));
    b.push_back(a.back() + 0.3 * standard_normal(rng));
    noise.push_back(uniform_real(rng));
  }
  // large n uses the t approximation
  CHECK(spearman(a, b).p_value < 1e-10);
  CHECK(spearman(a, noise).p_value > 0.001);
  const std::vector<double> a40(a.begin(), a.begin() + 40), b40(b.begin(), b.begin() + 40);
  const auto small = spearman(a40, b40, 2000);
  CHECK(small.p_value == doctest::Approx(1.0 / 2001.0));
  // same seed, same p-value
  CHECK(spearman(a40, b40, 2000).p_value == small.p_value);
}

TEST_CASE("permutation test examples") {
  const auto a = seq({1, 4, 2, 8, 5, 7});
  CHECK(permutation_test(a, a) >= 0.99);
  Rng rng(3);
  std::vector<double> lo, hi;
  for (int i = 0; i < 12; ++i) {
    lo.push_back(uniform_real(rng, -1, 1));
    hi.push_back(100 + uniform_real(rng, -1, 1));
  }
  const double p = permutation_test(lo, hi);
  CHECK(p <= 0.001);
  CHECK(p == doctest::Approx(1.0 / 10001.0));
}

TEST_CASE("null permutation p-values look uniform") {
  Rng rng(4);
  std::vector<double> ps;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) {
      a.push_back(standard_normal(rng));
      b.push_back(standard_normal(rng));
    }
    ps.push_back(permutation_test(a, b, 999, 1000 + trial));
  }
  // critical value at 0.01: 1.628 / sqrt(n)
  CHECK(ks_uniform(ps) < 1.628 / std::sqrt(300.0));
}

TEST_CASE("rank-sum examples") {
  const auto a = seq({3, 1, 4, 1, 5, 9, 2, 6});
  CHECK(ranksum_test(a, a) > 0.99);
  std::vector<double> lo, hi;
  for (int i = 0; i < 12; ++i) {
    lo.push_back(i);
    hi.push_back(50 + i);
  }
  const double p = ranksum_test(lo, hi);
  CHECK(p < 0.001);
  // U = 0: z = 72 / sqrt(12 * 12 * 25 / 12)
  const double z = 72.0 / std::sqrt(300.0);
  CHECK(std::abs(p - 2 * (1 - normal_cdf(z))) < 1e-9);
  CHECK(ranksum_test(lo, hi) == ranksum_test(hi, lo));
}

TEST_CASE("rank-sum with ties matches the tie-corrected formula") {
  const auto a = seq({1, 2, 2, 3, 3, 3});
  const auto b = seq({2, 3, 4, 4, 5});
  // pooled ranks by hand: 1 -> 1; 2 x3 -> 3; 3 x4 -> 6.5; 4 x2 -> 9.5; 5 -> 11
  const double r1 = 1 + 3 + 3 + 6.5 + 6.5 + 6.5;
  const double n1 = 6, n2 = 5, n = 11;
  const double u = r1 - n1 * (n1 + 1) / 2;
  const double ties = (27 - 3) + (64 - 4) + (8 - 2);
  const double var = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)));
  const double zz = (u - n1 * n2 / 2) / std::sqrt(var);
  CHECK(std::abs(ranksum_test(a, b) - 2 * (1 - normal_cdf(std::abs(zz)))) < 1e-12);
}

TEST_CASE("the two tests agree on the fixtures") {
  std::vector<double> lo, hi;
  Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    lo.push_back(uniform_real(rng, 0, 1));
    hi.push_back(uniform_real(rng, 100, 101));
  }
  const double alpha = bonferroni(0.05, 2);
  CHECK((permutation_test(lo, hi) < alpha) == (ranksum_test(lo, hi) < alpha));
  CHECK(permutation_test(lo, hi) < alpha);
  CHECK((permutation_test(lo, lo) < alpha) == (ranksum_test(lo, lo) < alpha));
  CHECK_FALSE(permutation_test(lo, lo) < alpha);
}

TEST_CASE("bonferroni examples") {
  CHECK(bonferroni(0.05, 2) == 0.025);
  CHECK(bonferroni(0.05, 1) == 0.05);
  CHECK(std::abs(bonferroni(0.06, 3) - 0.02) < 1e-15);
  for (double a : {0.05, 0.1, 0.01}) {
    for (std::size_t k : {1u, 2u, 4u, 8u}) CHECK(bonferroni(a, k) * double(k) == a);
  }
  CHECK_THROWS_AS(bonferroni(0.05, 0), ContractError);
}

TEST_CASE("validity fixtures") {
  std::vector<TrajectorySequence> straight;
  for (int i = 0; i < 4; ++i) straight.push_back(ending_at(0, 0, 50));
  const auto r = classify_validity(straight);
  CHECK_FALSE(r.spread_ok);
  CHECK(r.symmetry_ok);
  CHECK(r.final_position_ok);
  CHECK_FALSE(r.valid);

  std::vector<TrajectorySequence> balanced = {ending_at(3.5, 3.5, 45), ending_at(-3.5, -3.5, 45),
                                              ending_at(3.5, 3.5, 45), ending_at(-3.5, -3.5, 45)};
  const auto b = classify_validity(balanced);
  CHECK(b.valid);
  CHECK(b.max_abs_x == 3.5);
  CHECK(std::abs(b.mean_final_y - 45.0) < 1e-12);

  std::vector<TrajectorySequence> drift;
  for (int i = 0; i < 4; ++i) drift.push_back(ending_at(3, 3, 45));
  const auto d = classify_validity(drift);
  CHECK_FALSE(d.symmetry_ok);
  CHECK_FALSE(d.valid);
  CHECK(d.spread_ok);
}

TEST_CASE("validity thresholds are boundary exact") {
  // |x| = 2.0 exactly is not a spread
  std::vector<TrajectorySequence> at_two = {ending_at(2.0, 0.0, 45), ending_at(-2.0, 0.0, 45)};
  CHECK_FALSE(classify_validity(at_two).spread_ok);
  std::vector<TrajectorySequence> past_two = {ending_at(2.0000001, 0.0, 45), ending_at(-2.0, 0.0, 45)};
  CHECK(classify_validity(past_two).spread_ok);
  // mean final x of exactly 1.0 is still symmetric
  std::vector<TrajectorySequence> one = {ending_at(3.5, 1.0, 45), ending_at(-3.5, 1.0, 45)};
  CHECK(classify_validity(one).symmetry_ok);
  std::vector<TrajectorySequence> over = {ending_at(3.5, 1.5, 45), ending_at(-3.5, 0.5000001, 45)};
  CHECK_FALSE(classify_validity(over).symmetry_ok);
  // displacement of exactly 40 m fails, measured from each sequence's start
  std::vector<TrajectorySequence> forty = {ending_at(3.5, 0.0, 40), ending_at(-3.5, 0.0, 40)};
  CHECK_FALSE(classify_validity(forty).final_position_ok);
  std::vector<TrajectorySequence> more = {ending_at(3.5, 0.0, 40.5), ending_at(-3.5, 0.0, 40)};
  CHECK(classify_validity(more).final_position_ok);
  CHECK(classify_validity(more) == classify_validity(more));
  CHECK_THROWS_AS(classify_validity(std::vector<TrajectorySequence>{}), ContractError);
}

TEST_CASE("hypervolume hand examples") {
  const std::vector<double> ref = {3, 3};
  CHECK(hypervolume({{1, 1}}, ref) == 4.0);
  CHECK(hypervolume({{1, 2}, {2, 1}}, ref) == 3.0);
  CHECK(hypervolume({}, ref) == 0.0);
  const auto rep = hypervolume_report({{1, 1}, {4, 0}, {0, 5}}, ref);
  CHECK(rep.value == 4.0);
  CHECK(rep.dropped == 2);
  CHECK(hypervolume({{1, 1, 1}}, std::vector<double>{2, 3, 4}) == 6.0);
  // two overlapping boxes in 3d: 2*2*2 + 2*2*2 - 1*1*2
  CHECK(hypervolume({{0, 1, 0}, {1, 0, 0}}, std::vector<double>{2, 2, 2}) == 6.0);
  CHECK_THROWS_AS(hypervolume({{1, 1, 1, 1}}, std::vector<double>{2, 2, 2, 2}), ConfigError);
}

TEST_CASE("hypervolume against inclusion-exclusion") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + uniform_index(rng, 2);
    const std::size_t n = 1 + uniform_index(rng, 6);
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(m);
      for (auto& v : p) v = uniform_real(rng);
      pts.push_back(p);
    }
    const std::vector<double> ref(m, 1.0);
    double exact = 0;
    for (std::size_t mask = 1; mask < (1u << n); ++mask) {
      double vol = 1;
      for (std::size_t k = 0; k < m; ++k) {
        double lo = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1u << i)) lo = std::max(lo, pts[i][k]);
        }
        vol *= 1.0 - lo;
      }
      exact += (std::popcount(mask) % 2 ? 1 : -1) * vol;
    }
    CHECK(std::abs(hypervolume(pts, ref) - exact) < 1e-12);
  }
}

TEST_CASE("hypervolume is monotone") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> pts;
    const std::vector<double> ref = {1, 1, 1};
    double last = 0;
    for (int i = 0; i < 15; ++i) {
      pts.push_back({uniform_real(rng), uniform_real(rng), uniform_real(rng)});
      const double hv = hypervolume(pts, ref);
      CHECK(hv >= last - 1e-15);
      last = hv;
    }
    // a dominated point adds nothing
    auto worse = pts[0];
    for (auto& v : worse) v = std::min(0.999, v + 0.01);
    auto more = pts;
    more.push_back(worse);
    CHECK(std::abs(hypervolume(more, ref) - last) < 1e-12);
  }
}

TEST_CASE("reference point") {
  const auto r = reference_point({{0, 10}, {10, 0}, {5, 5}});
  CHECK(r == std::vector<double>{11, 11});
  const auto flat = reference_point({{2, -3}, {2, -3}});
  CHECK(std::abs(flat[0] - 2.2) < 1e-12);
  CHECK(std::abs(flat[1] - (-2.7)) < 1e-12);
}

TEST_CASE("kde matches a double-loop kernel sum") {
  Rng rng(8);
  for (std::size_t d : {2u, 3u}) {
    std::vector<std::vector<double>> samples, grid;
    for (int i = 0; i < 50; ++i) {
      std::vector<double> s(d), g(d);
      for (std::size_t k = 0; k < d; ++k) {
        s[k] = standard_normal(rng) * double(k + 1);
        g[k] = uniform_real(rng, -3, 3);
      }
      samples.push_back(s);
      grid.push_back(g);
    }
    std::vector<double> h(d);
    const double n = 50;
    for (std::size_t k = 0; k < d; ++k) {
      double mean = 0, ss = 0;
      for (const auto& s : samples) mean += s[k] / n;
      for (const auto& s : samples) ss += (s[k] - mean) * (s[k] - mean);
      h[k] = std::sqrt(ss / (n - 1)) * std::pow(n, -1.0 / (double(d) + 4));
    }
    const auto bw = scott_bandwidths(samples);
    for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(bw[k] - h[k]) < 1e-12);
    const auto dens = kde_density(samples, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double sum = 0;
      for (const auto& s : samples) {
        double prod = 1;
        for (std::size_t k = 0; k < d; ++k) {
          const double u = (grid[j][k] - s[k]) / h[k];
          prod *= std::exp(-0.5 * u * u) / (h[k] * std::sqrt(2 * std::numbers::pi));
        }
        sum += prod;
      }
      CHECK(std::abs(dens[j] - sum / n) < 1e-9);
      CHECK(dens[j] >= 0.0);
    }
  }
}

TEST_CASE("kde mode and bandwidth scaling") {
  // most of the mass on the centre, a small ring around it
  const double cx = 5, cy = -2;
  std::vector<std::vector<double>> samples(20, std::vector<double>{cx, cy});
  for (int i = 0; i < 8; ++i) {
    const double a = i * std::numbers::pi / 4, r = 0.01;
    samples.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  auto grid = kde_grid(samples, 16);
  CHECK(grid.size() == 256);
  grid.push_back({cx, cy});
  const auto dens = kde_density(samples, grid);
  CHECK(std::max_element(dens.begin(), dens.end()) - dens.begin() == long(grid.size() - 1));

  auto doubled = samples;
  for (auto& s : doubled) {
    for (auto& v : s) v *= 2;
  }
  const auto h1 = scott_bandwidths(samples), h2 = scott_bandwidths(doubled);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(h2[k] - 2 * h1[k]) < 1e-12);
  CHECK(kde_grid(std::vector<std::vector<double>>{{0, 0, 0}, {1, 2, 3}, {2, 1, 0}}, 4).size() == 64);
}

TEST_CASE("kde errors") {
  CHECK_THROWS_AS(kde_density({{1, 2}, {1, 3}}, {{0, 0}}), DegenerateBandwidthError);
  CHECK_THROWS_AS(kde_density({{1, 2}}, {{0, 0}}), ContractError);
}

TEST_CASE("reports serialize") {
  const auto j = CorrelationResult{0.5, 0.01, 20}.to_json();
  CHECK(j["coefficient"] == 0.5);
  CHECK(j["n"] == 20);
  ValidityReport v;
  v.valid = true;
  CHECK(v.to_json()["valid"] == true);
}
