#include <cmath>

#include <doctest.h>

#include "dipcoal/ancestry.hpp"

using namespace dipcoal;

TEST_CASE("starting states") {
  const auto d = dispersed_singletons(5);
  CHECK(d.partition == singletons_partition(5));
  CHECK(d.pairs.empty());
  CHECK_NOTHROW(validate(d));

  const auto p = fully_paired_singletons(6);
  CHECK(p.partition == singletons_partition(6));
  CHECK(p.pairs.size() == 3);
  CHECK_NOTHROW(validate(p));
  CHECK_THROWS(fully_paired_singletons(5));
}

TEST_CASE("the two chromosomes of one individual never merge in one step") {
  const WrightFisher model{50};
  Xoshiro256 rng(31);
  OffspringSampler sampler(model);
  const auto start = fully_paired_singletons(2);  // one diploid individual
  for (int rep = 0; rep < 2000; ++rep) {
    const auto next = step(start, sampler.sample(rng), rng);
    CHECK(next.partition.n_blocks() == 2);
  }
}

TEST_CASE("one-step coalescence frequency matches the closed form") {
  auto frequency = [](const ModelConfig& config, int reps, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    OffspringSampler sampler(config);
    const auto start = dispersed_singletons(2);
    int hits = 0;
    for (int rep = 0; rep < reps; ++rep)
      if (step(start, sampler.sample(rng), rng).partition.n_blocks() == 1) ++hits;
    return static_cast<double>(hits) / reps;
  };

  // smallest population: two children of the single possible couple coalesce
  // exactly when they grab the same parent chromosome
  const double f2 = frequency(WrightFisher{2}, 20000, 32);
  CHECK(std::abs(f2 - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / 20000));

  const double c_fc = *pair_coalescence_prob(FixedCouples{10});
  const double f_fc = frequency(FixedCouples{10}, 40000, 33);
  CHECK(std::abs(f_fc - c_fc) < 4.0 * std::sqrt(c_fc * (1 - c_fc) / 40000));
}

TEST_CASE("step consumes explicit couples in tracked-individual order") {
  // all N children come from the couple (0, 1): genes already split across
  // two individuals must land on parents 0 and 1, one each
  const DiploidState start{singletons_partition(2), {}};
  Xoshiro256 rng(34);
  for (int rep = 0; rep < 200; ++rep) {
    const auto next =
        step_with_couples(start, {{0, 1}, {0, 1}}, rng);
    CHECK(next.partition.n == 2);
    CHECK(next.partition.n_blocks() <= 2);
    if (next.partition.n_blocks() == 2) {
      // no merge: either both genes sit in one parent as a paired state or
      // they split across the two parents
      CHECK(next.pairs.size() <= 1);
    }
  }
}

TEST_CASE("genealogies terminate and record discrete generation times") {
  Xoshiro256 rng(35);
  const auto rec = run_genealogy(WrightFisher{60}, 4, rng);
  CHECK(rec.mode == GenealogyRecord::Mode::Discrete);
  CHECK(rec.absorbed());
  CHECK(rec.n == 4);
  CHECK(rec.events.front().time == 0.0);
  for (std::size_t i = 1; i < rec.events.size(); ++i) {
    CHECK(rec.events[i].time > rec.events[i - 1].time);
    CHECK(rec.events[i].time == std::floor(rec.events[i].time));
    CHECK(rec.events[i].state.n_blocks() < rec.events[i - 1].state.n_blocks());
  }
  CHECK(rec.specs.size() + 1 == rec.events.size());
}

TEST_CASE("generation cap refuses to truncate") {
  Xoshiro256 rng(36);
  AncestryOptions opt;
  opt.max_generations = 1;
  CHECK_THROWS_AS(run_genealogy(WrightFisher{500}, 4, rng, opt),
                  std::runtime_error);
}

TEST_CASE("trace records every full-state change") {
  Xoshiro256 rng(36);
  AncestryOptions opt;
  std::vector<std::pair<long long, DiploidState>> trace;
  opt.trace = &trace;
  const auto rec = run_genealogy(WrightFisher{30}, 4, rng, opt);
  CHECK(rec.absorbed());
  REQUIRE_FALSE(trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].first > trace[i - 1].first);
  for (const auto& [gen, state] : trace) CHECK_NOTHROW(validate(state));
  CHECK(trace.back().second.partition.n_blocks() == 1);
}

TEST_CASE("dispersion happens before coalescence") {
  Xoshiro256 rng(37);
  const auto report =
      dispersion_probability_check(WrightFisher{200}, 4, rng, 20000);
  CHECK(report.blocks == 4);
  CHECK(report.c_n == doctest::Approx(1.0 / 400.0));
  CHECK(report.bound == doctest::Approx(1.0 - 6.0 / 400.0));
  CHECK(report.empirical <= 1.0);
  // union bound: the no-coalescence probability must not fall below it
  CHECK(report.empirical + 4.0 * report.std_error >= report.bound);
}
