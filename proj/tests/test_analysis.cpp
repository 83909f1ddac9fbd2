#include <cmath>
#include <numbers>

#include <doctest.h>

#include "dipcoal/analysis.hpp"
#include "dipcoal/ancestry.hpp"

using namespace dipcoal;

TEST_CASE("pair-coalescence estimator recovers exact values") {
  Xoshiro256 rng(41);
  const auto est = estimate_cn(FixedCouples{50}, 2000, rng);
  CHECK(est.replicates == 2000);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.value - 0.005) < 5.0 * est.std_error);
  CHECK_THROWS(estimate_cn(WrightFisher{100}, 50, rng));
}

TEST_CASE("scaled pair moment is the deterministic two-point identity") {
  Xoshiro256 rng(42);
  const int n_pop = 500;
  const auto est = estimate_phi(WrightFisher{n_pop}, {2}, 200, rng);
  CHECK(est.value == doctest::Approx(2.0 * (n_pop - 1) / n_pop).epsilon(1e-12));
  CHECK(est.std_error <= 1e-12);
}

TEST_CASE("simultaneous pair mergers vanish for the uniform-pair model") {
  Xoshiro256 rng(43);
  const auto est = estimate_phi(WrightFisher{400}, {2, 2}, 2000, rng);
  CHECK(est.value > 0.0);
  CHECK(est.value < 0.05);  // exact scale is 2/N
  CHECK_THROWS(estimate_phi(WrightFisher{100}, {2, 2, 2, 2}, 200, rng));
  CHECK_THROWS(estimate_phi(WrightFisher{100}, {1}, 200, rng));
}

TEST_CASE("tail scaling limit closed form") {
  // at x = 1/2 the shape factor is 1, leaving 8 / (alpha Beta(2-alpha, alpha))
  const double beta_half = std::numbers::pi / 2.0;  // Beta(1/2, 3/2)
  CHECK(tail_scaling_limit(1.5, 0.5) ==
        doctest::Approx(8.0 / (1.5 * beta_half)).epsilon(1e-12));
  CHECK(tail_scaling_limit(1.5, 0.2) > tail_scaling_limit(1.5, 0.4));
  CHECK_THROWS(tail_scaling_limit(2.5, 0.5));
  CHECK_THROWS(tail_scaling_limit(1.5, 1.5));
}

TEST_CASE("empirical tail curve tracks the limit") {
  Xoshiro256 rng(44);
  const RandomFitness model{2000, ParetoFitness{1.5, 1.0}, 100};
  const auto curve = tail_scaling(model, {0.3}, 4000, rng);
  REQUIRE(curve.points.size() == 1);
  const auto& pt = curve.points[0];
  CHECK(pt.x == 0.3);
  CHECK(pt.limit == doctest::Approx(tail_scaling_limit(1.5, 0.3)));
  CHECK(pt.scaled > 0.0);
  CHECK(std::abs(pt.scaled - pt.limit) <
        std::max(0.35 * pt.limit, 5.0 * pt.std_error));
  CHECK(curve.c_n.value > 0.0);
}

TEST_CASE("transition frequency rows are stochastic and selfing-free") {
  Xoshiro256 rng(45);
  const auto pi = estimate_transition_matrix(WrightFisher{40}, 2, 20000, rng);
  const auto states = enumerate_diploid_states(2);
  REQUIRE(pi.rows() == static_cast<long>(states.size()));
  for (long i = 0; i < pi.rows(); ++i)
    CHECK(pi.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  // row 1 is the paired state, column 2 the merged partition: a single
  // individual's two chromosomes cannot coalesce in one generation
  CHECK(pi(1, 2) == 0.0);
  const double c = 1.0 / 80.0;
  CHECK(std::abs(pi(0, 2) - c) < 4.0 * std::sqrt(c * (1 - c) / 20000));
}

TEST_CASE("dispersed-state indices align with the partition list") {
  const auto idx = dispersed_state_indices(2);
  REQUIRE(idx.size() == 2);
  const auto states = enumerate_diploid_states(2);
  const auto parts = enumerate_partitions(2);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& s = states[static_cast<std::size_t>(idx[k])];
    CHECK(s.pairs.empty());
    CHECK(s.partition == parts[k]);
  }
}

TEST_CASE("timescale decomposition on a handcrafted one-step matrix") {
  // states for two genes: 0 dispersed singletons, 1 paired singletons,
  // 2 merged. rows of M perturb the projection by rate c.
  const double c = 0.01;
  Eigen::MatrixXd a(3, 3), m(3, 3);
  a << 1, 0, 0, 1, 0, 0, 0, 0, 1;
  m << -1.0, 0.0, 1.0, 0.5, -1.0, 0.5, 0.0, 0.0, 0.0;
  const Eigen::MatrixXd pi_hat = a + c * m;

  const auto dec = mohle_decompose(pi_hat, c, 2);
  CHECK(dec.states.size() == 3);
  CHECK(dec.c_hat == c);
  CHECK((dec.P * dec.P - dec.P).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((dec.B - m).cwiseAbs().maxCoeff() <= 1e-9);
  // G = P M P: the dispersed row keeps its rate to the merged state and the
  // paired coordinate folds onto the dispersed one
  CHECK(dec.G(0, 0) == doctest::Approx(-1.0));
  CHECK(dec.G(0, 2) == doctest::Approx(1.0));
  CHECK(dec.G(0, 1) == doctest::Approx(0.0));

  CHECK_THROWS(mohle_decompose(pi_hat, 0.0, 2));
  CHECK_THROWS(mohle_decompose(pi_hat, c, 3));
}

TEST_CASE("goodness-of-fit helpers are calibrated") {
  Xoshiro256 rng(46);

  std::vector<double> uniform;
  for (int i = 0; i < 5000; ++i) uniform.push_back(uniform_double(rng));
  const auto ks_ok = ks_test(uniform, [](double t) {
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  });
  CHECK(ks_ok.p_value > 0.01);

  std::vector<double> expo;
  for (int i = 0; i < 5000; ++i) expo.push_back(exponential(rng));
  const auto ks_bad = ks_test(expo, [](double t) {
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  });
  CHECK(ks_bad.p_value < 1e-6);

  std::vector<double> uniform2;
  for (int i = 0; i < 5000; ++i) uniform2.push_back(uniform_double(rng));
  CHECK(ks_test_two_sample(uniform, uniform2).p_value > 0.01);
  CHECK(ks_test_two_sample(uniform, expo).p_value < 1e-6);
}

TEST_CASE("count tests behave on matched and mismatched data") {
  Xoshiro256 rng(47);
  AliasTable table(std::vector<double>{0.2, 0.3, 0.5});
  std::vector<long long> counts(3, 0);
  for (int i = 0; i < 30000; ++i) ++counts[table.sample(rng)];
  CHECK(chi2_test(counts, {0.2, 0.3, 0.5}).p_value > 1e-3);
  CHECK(chi2_test(counts, {0.4, 0.3, 0.3}).p_value < 1e-9);
  CHECK_THROWS(chi2_test({5, 5, 5}, {0.4, 0.3, 0.3}));
  CHECK_THROWS(chi2_test(counts, {0.5, 0.3, 0.3}));

  std::vector<long long> counts2(3, 0);
  for (int i = 0; i < 30000; ++i) ++counts2[table.sample(rng)];
  CHECK(chi2_two_sample(counts, counts2).p_value > 1e-3);

  const auto equal = two_proportion_test(500, 10000, 510, 10000);
  CHECK(equal.p_value > 0.01);
  const auto off = two_proportion_test(500, 10000, 900, 10000);
  CHECK(off.p_value < 1e-9);
  const auto degenerate = two_proportion_test(0, 1000, 0, 1000);
  CHECK(degenerate.p_value == 1.0);
}
