#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "dipcoal/analysis.hpp"
#include "dipcoal/forward_models.hpp"

using namespace dipcoal;

namespace {

std::vector<ModelConfig> small_models() {
  return {
      WrightFisher{12},
      RandomFitness{12, ParetoFitness{1.5, 1.0}, 200},
      GaltonWatsonSampling{12, 3.0, ParetoJuveniles{1.5, 1.0}, 200},
      FixedCouples{6},
      LargeFamily{12, 0.5, 0.5},
  };
}

// Couples of `count` distinct children drawn through the full offspring
// matrix: expand entries into child slots and take a uniform sample without
// replacement.  This is the reference law the direct couple sampler must hit.
std::vector<std::pair<int, int>> couples_via_matrix(OffspringSampler& sampler,
                                                    int count, Xoshiro256& rng) {
  const auto matrix = sampler.sample(rng);
  std::vector<std::pair<int, int>> slots;
  slots.reserve(static_cast<std::size_t>(matrix.n_pop));
  for (const auto& e : matrix.entries)
    for (long long c = 0; c < e.count; ++c) slots.emplace_back(e.i, e.j);
  std::vector<std::pair<int, int>> out;
  for (int t = 0; t < count; ++t) {
    const auto idx = static_cast<std::size_t>(
        uniform_below(rng, slots.size() - static_cast<std::size_t>(t)));
    std::swap(slots[idx], slots[slots.size() - 1 - static_cast<std::size_t>(t)]);
    out.push_back(slots[slots.size() - 1 - static_cast<std::size_t>(t)]);
  }
  return out;
}

// Joint shape of a couple triple: how many distinct couples, how many
// distinct parents.  Cheap fingerprint that is sensitive to pairing errors.
int triple_shape(const std::vector<std::pair<int, int>>& couples) {
  std::map<std::pair<int, int>, int> distinct;
  std::map<int, int> parents;
  for (const auto& c : couples) {
    ++distinct[c];
    ++parents[c.first];
    ++parents[c.second];
  }
  return static_cast<int>(distinct.size()) * 10 + static_cast<int>(parents.size());
}

}  // namespace

TEST_CASE("offspring matrices are valid and conserve mass") {
  for (const auto& config : small_models()) {
    Xoshiro256 rng(21);
    OffspringSampler sampler(config);
    for (int rep = 0; rep < 200; ++rep) {
      const auto m = sampler.sample(rng);
      CHECK_NOTHROW(validate(m));
      CHECK(m.n_pop == population_size(config));
      CHECK(m.total_children() == m.n_pop);
      const auto totals = individual_totals(m);
      CHECK(std::accumulate(totals.begin(), totals.end(), 0LL) == 2 * m.n_pop);
      for (const auto& e : m.entries) {
        CHECK(e.i < e.j);
        CHECK(e.count > 0);
      }
    }
  }
}

TEST_CASE("two individuals can only pair with each other") {
  Xoshiro256 rng(22);
  OffspringSampler sampler(WrightFisher{2});
  const auto m = sampler.sample(rng);
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0].i == 0);
  CHECK(m.entries[0].j == 1);
  CHECK(m.entries[0].count == 2);
}

TEST_CASE("constant fitness reduces to the uniform-pair model") {
  const int n_pop = 30, reps = 20000;
  auto histogram = [&](const ModelConfig& config, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    OffspringSampler sampler(config);
    std::vector<long long> h(7, 0);
    for (int rep = 0; rep < reps; ++rep) {
      const auto v = individual_totals(sampler.sample(rng))[0];
      ++h[static_cast<std::size_t>(std::min<long long>(v, 6))];
    }
    return h;
  };
  const auto wf = histogram(WrightFisher{n_pop}, 23);
  const auto rf = histogram(RandomFitness{n_pop, PointMassFitness{3.7}, 100}, 24);
  const auto res = chi2_two_sample(wf, rf);
  CHECK(res.p_value > 1e-3);
}

TEST_CASE("couple model draws a perfect matching") {
  Xoshiro256 rng(25);
  OffspringSampler sampler(FixedCouples{8});
  for (int rep = 0; rep < 200; ++rep) {
    const auto m = sampler.sample(rng);
    std::vector<int> seen(static_cast<std::size_t>(m.n_pop), 0);
    for (const auto& e : m.entries) {
      ++seen[static_cast<std::size_t>(e.i)];
      ++seen[static_cast<std::size_t>(e.j)];
    }
    // entries are couples, so no individual appears in two different pairs
    for (int count : seen) CHECK(count <= 1);
  }
}

TEST_CASE("large-family events fire at the advertised frequency") {
  const int n_pop = 100;
  const LargeFamily config{n_pop, 0.5, 0.5};
  const long long family_size = 50;  // floor(psi N)
  Xoshiro256 rng(26);
  OffspringSampler sampler(config);
  const int reps = 4000;
  int hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto m = sampler.sample(rng);
    long long biggest = 0;
    for (const auto& e : m.entries) biggest = std::max(biggest, e.count);
    if (biggest >= family_size) ++hits;
  }
  const double q = std::pow(static_cast<double>(n_pop), -0.5);
  const double f = static_cast<double>(hits) / reps;
  CHECK(std::abs(f - q) < 4.0 * std::sqrt(q * (1.0 - q) / reps));
}

TEST_CASE("direct couple sampling matches the matrix path") {
  for (const auto& config : small_models()) {
    Xoshiro256 rng_a(27), rng_b(28);
    CoupleSampler direct(config);
    OffspringSampler matrix(config);
    const int reps = 10000;
    std::map<int, std::pair<long long, long long>> cells;
    for (int rep = 0; rep < reps; ++rep) {
      ++cells[triple_shape(direct.sample(3, rng_a))].first;
      ++cells[triple_shape(couples_via_matrix(matrix, 3, rng_b))].second;
    }
    std::vector<long long> a, b;
    for (const auto& [shape, counts] : cells) {
      a.push_back(counts.first);
      b.push_back(counts.second);
    }
    const auto res = chi2_two_sample(a, b);
    INFO("model " << model_id(config));
    CHECK(res.p_value > 1e-3);
  }
}

TEST_CASE("closed-form pair-coalescence probabilities") {
  CHECK(*pair_coalescence_prob(WrightFisher{100}) == 1.0 / 200.0);
  CHECK(*pair_coalescence_prob(FixedCouples{50}) == doctest::Approx(0.005));
  CHECK(*pair_coalescence_prob(LargeFamily{400, 0.5, 0.5}) ==
        doctest::Approx(0.00432033).epsilon(1e-5));
  CHECK_FALSE(pair_coalescence_prob(
      RandomFitness{100, ParetoFitness{1.5, 1.0}, 100}));
  CHECK_FALSE(pair_coalescence_prob(
      GaltonWatsonSampling{100, 4.0, ParetoJuveniles{1.5, 1.0}, 100}));
}

TEST_CASE("predicted large-population scaling constants") {
  const auto gw = predicted_cn_asymptote(
      GaltonWatsonSampling{1000, 4.0, ParetoJuveniles{1.5, 1.0}, 100});
  REQUIRE(gw.has_value());
  CHECK(gw->exponent == doctest::Approx(-0.5));
  CHECK(gw->constant == doctest::Approx(0.0606662).epsilon(1e-4));

  const auto rf = predicted_cn_asymptote(
      RandomFitness{1000, ParetoFitness{1.5, 1.0}, 100});
  REQUIRE(rf.has_value());
  CHECK(rf->exponent == doctest::Approx(-0.5));
  CHECK(rf->constant == doctest::Approx(0.16036).epsilon(1e-4));

  CHECK_FALSE(predicted_cn_asymptote(WrightFisher{100}));
}

TEST_CASE("model validation rejects bad parameters") {
  CHECK_THROWS(validate(ModelConfig(WrightFisher{1})));
  CHECK_THROWS(validate(ModelConfig(FixedCouples{0})));
  CHECK_THROWS(validate(ModelConfig(LargeFamily{100, 1.5, 0.5})));
  CHECK_THROWS(validate(ModelConfig(LargeFamily{100, 0.5, -0.1})));
  CHECK_THROWS(validate(ModelConfig(RandomFitness{100, ParetoFitness{2.5, 1.0}, 100})));
  CHECK_THROWS(validate(
      ModelConfig(GaltonWatsonSampling{100, -1.0, ParetoJuveniles{1.5, 1.0}, 100})));
  CHECK_NOTHROW(validate(ModelConfig(WrightFisher{2})));
}

TEST_CASE("fitness and juvenile law moments") {
  CHECK(fitness_mean(PointMassFitness{2.5}) == 2.5);
  CHECK(std::isinf(fitness_second_moment(ParetoFitness{1.5, 1.0})));
  CHECK(fitness_mean(TabulatedFitness{{1.0, 3.0}, {0.5, 0.5}}) ==
        doctest::Approx(2.0));
  CHECK(juvenile_mean(ConstJuveniles{4}) == 4.0);
  // ceil of a unit-scale Pareto: mean 1 + zeta(alpha)
  CHECK(juvenile_mean(ParetoJuveniles{1.5, 1.0}) ==
        doctest::Approx(1.0 + std::riemann_zeta(1.5)).epsilon(1e-9));
  CHECK(std::isinf(juvenile_second_factorial_moment(ParetoJuveniles{1.5, 1.0})));
  CHECK(juvenile_second_factorial_moment(ConstJuveniles{3}) == doctest::Approx(6.0));
}
