#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "dipcoal/analysis.hpp"
#include "dipcoal/parallel.hpp"
#include "dipcoal/rng.hpp"

using namespace dipcoal;

TEST_CASE("streams are reproducible and distinct") {
  Xoshiro256 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool same_ab = true, same_ac = true, same_ad = true;
  for (int i = 0; i < 64; ++i) {
    const auto va = a();
    same_ab = same_ab && va == b();
    same_ac = same_ac && va == c();
    same_ad = same_ad && va == d();
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
  CHECK_FALSE(same_ad);
}

TEST_CASE("uniform helpers stay inside their ranges") {
  Xoshiro256 g(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_double(g);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = uniform_open(g);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    const auto k = uniform_below(g, 7);
    CHECK(k < 7);
  }
}

TEST_CASE("uniform_below is unbiased") {
  Xoshiro256 g(2);
  std::vector<long long> counts(8, 0);
  for (int i = 0; i < 80000; ++i) ++counts[uniform_below(g, 8)];
  const auto res = chi2_test(counts, std::vector<double>(8, 0.125));
  CHECK(res.p_value > 1e-3);
}

TEST_CASE("integer pareto tail has the advertised survival function") {
  Xoshiro256 g(3);
  // P(X > 4) = (1/4)^1.5 = 0.125 for alpha = 1.5, xmin = 1
  long long hits = 0;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) {
    const auto x = pareto_integer(g, 1.5, 1);
    CHECK(x >= 1);
    if (x > 4) ++hits;
  }
  const double f = static_cast<double>(hits) / reps;
  CHECK(std::abs(f - 0.125) < 4.0 * std::sqrt(0.125 * 0.875 / reps));
}

TEST_CASE("hypergeometric matches its first moment and support") {
  Xoshiro256 g(4);
  const std::int64_t m = 50, K = 20, n = 10;
  double sum = 0.0;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) {
    const auto x = hypergeometric(g, m, K, n);
    CHECK(x >= 0);
    CHECK(x <= std::min(K, n));
    sum += static_cast<double>(x);
  }
  // mean n K / m = 4; sd of one draw is about 1.31
  CHECK(std::abs(sum / reps - 4.0) < 4.0 * 1.31 / std::sqrt(double(reps)));
  CHECK(hypergeometric(g, 10, 10, 3) == 3);  // degenerate support
  CHECK(hypergeometric(g, 10, 0, 3) == 0);
  CHECK_THROWS_AS(hypergeometric(g, 5, 6, 1), std::invalid_argument);
}

TEST_CASE("alias table reproduces its weights") {
  Xoshiro256 g(5);
  AliasTable table(std::vector<double>{1.0, 2.0, 3.0, 2.0});
  std::vector<long long> counts(4, 0);
  for (int i = 0; i < 80000; ++i) ++counts[table.sample(g)];
  const auto res = chi2_test(counts, {0.125, 0.25, 0.375, 0.25});
  CHECK(res.p_value > 1e-3);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{-1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("parallel_replicates output does not depend on the worker count") {
  const long long reps = 257;
  auto run = [&](int threads) {
    std::vector<double> slots(reps, 0.0);
    parallel_replicates(reps, 99, threads, [&](long long r, Xoshiro256& rng) {
      double acc = 0.0;
      for (int i = 0; i < 100; ++i) acc += uniform_double(rng);
      slots[static_cast<std::size_t>(r)] = acc + static_cast<double>(r);
    });
    return slots;
  };
  const auto one = run(1);
  CHECK(one == run(3));
  CHECK(one == run(8));
  bool all_filled = true;
  for (double v : one) all_filled = all_filled && v > 0.0;
  CHECK(all_filled);
}

TEST_CASE("parallel_replicates rethrows the first worker exception") {
  CHECK_THROWS_AS(
      parallel_replicates(64, 1, 4,
                          [](long long r, Xoshiro256&) {
                            if (r == 17) throw std::runtime_error("boom");
                          }),
      std::runtime_error);
}

TEST_CASE("thread-count resolution honours the environment override") {
  unsetenv("DIPCOAL_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(-2) >= 1);
  setenv("DIPCOAL_THREADS", "5", 1);
  CHECK(resolve_threads(3) == 5);
  setenv("DIPCOAL_THREADS", "junk", 1);
  CHECK_THROWS(resolve_threads(3));
  unsetenv("DIPCOAL_THREADS");
}
