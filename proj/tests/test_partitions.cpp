#include <stdexcept>

#include <doctest.h>

#include "dipcoal/partitions.hpp"

using namespace dipcoal;

TEST_CASE("singletons and canonical form") {
  const auto p = singletons_partition(4);
  CHECK(p.n == 4);
  CHECK(p.n_blocks() == 4);
  CHECK_NOTHROW(validate(p));

  Partition scrambled{3, {{3, 2}, {1}}};
  const auto c = canonical(scrambled);
  CHECK(c == Partition{3, {{1}, {2, 3}}});
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("restricted growth codes round-trip") {
  const Partition p{5, {{1, 3}, {2, 5}, {4}}};
  const auto code = rgs(p);
  CHECK(code == std::vector<int>{0, 1, 0, 2, 1});
  CHECK(partition_from_rgs(code) == p);
}

TEST_CASE("validate rejects malformed inputs") {
  CHECK_THROWS_AS(validate(Partition{2, {{1}}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Partition{2, {{2, 1}}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Partition{2, {{1}, {1}}}), std::invalid_argument);
  DiploidState bad{singletons_partition(3), {{0, 0}}};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  DiploidState reused{singletons_partition(3), {{0, 1}, {1, 2}}};
  CHECK_THROWS_AS(validate(reused), std::invalid_argument);
  CHECK_THROWS_AS(validate(MergerSpec{3, {1}, 2}), std::invalid_argument);
  CHECK_THROWS_AS(validate(MergerSpec{3, {2}, 2}), std::invalid_argument);
}

TEST_CASE("partition enumeration hits the Bell numbers") {
  const int bell[] = {1, 2, 5, 15, 52, 203};
  for (int n = 1; n <= 6; ++n) {
    const auto all = enumerate_partitions(n);
    CHECK(static_cast<int>(all.size()) == bell[n - 1]);
    CHECK(all.front() == singletons_partition(n));
    CHECK(all.back().n_blocks() == 1);
    int last_blocks = n;
    for (const auto& p : all) {
      CHECK_NOTHROW(validate(p));
      CHECK(p.n_blocks() <= last_blocks);
      last_blocks = p.n_blocks();
    }
  }
}

TEST_CASE("pairing state enumeration counts partial matchings") {
  // per partition with b blocks there are sum_m b! / (2^m m! (b-2m)!) states
  CHECK(enumerate_diploid_states(2).size() == 3);
  CHECK(enumerate_diploid_states(3).size() == 11);
  CHECK(enumerate_diploid_states(4).size() == 49);

  const auto states = enumerate_diploid_states(3);
  // states sharing a partition are contiguous, dispersed state first
  Partition current;
  for (std::size_t i = 0; i < states.size(); ++i) {
    CHECK_NOTHROW(validate(states[i]));
    if (states[i].partition != current) {
      current = states[i].partition;
      CHECK(states[i].pairs.empty());
    }
  }
}

TEST_CASE("merger classification") {
  const auto from = singletons_partition(4);
  CHECK(std::holds_alternative<NoMerge>(merger_spec(from, from)));

  const Partition two_pairs{4, {{1, 2}, {3, 4}}};
  const auto spec = std::get<MergerSpec>(merger_spec(from, two_pairs));
  CHECK(spec == MergerSpec{4, {2, 2}, 0});

  const Partition crossing{4, {{1}, {2, 3}, {4}}};
  CHECK(std::holds_alternative<MergerSpec>(merger_spec(from, crossing)));
  CHECK(std::holds_alternative<Incompatible>(merger_spec(two_pairs, crossing)));

  const auto big = std::get<MergerSpec>(
      merger_spec(singletons_partition(5), Partition{5, {{1, 2, 3}, {4}, {5}}}));
  CHECK(big == MergerSpec{5, {3}, 2});
  CHECK(big.total_merged() == 3);
  CHECK(big.n_groups() == 1);
}

TEST_CASE("merger class multiplicities") {
  CHECK(merger_spec_multiplicity(MergerSpec{4, {2}, 2}) == doctest::Approx(6));
  CHECK(merger_spec_multiplicity(MergerSpec{4, {2, 2}, 0}) == doctest::Approx(3));
  CHECK(merger_spec_multiplicity(MergerSpec{5, {3}, 2}) == doctest::Approx(10));
  CHECK(merger_spec_multiplicity(MergerSpec{6, {2, 2, 2}, 0}) ==
        doctest::Approx(15));
}

TEST_CASE("merger class enumeration is complete and ordered") {
  CHECK(enumerate_merger_specs(1).empty());
  CHECK(enumerate_merger_specs(4).size() == 4);
  CHECK(enumerate_merger_specs(5).size() == 6);
  const auto specs = enumerate_merger_specs(6);
  for (const auto& s : specs) {
    CHECK(s.b == 6);
    CHECK_NOTHROW(validate(s));
    CHECK(s.total_merged() + s.singletons == 6);
  }
  // double-merger sum rule: total class count over group sizes matches the
  // number of ways to pick at least one merging group
  for (std::size_t i = 1; i < specs.size(); ++i) CHECK(specs[i - 1] < specs[i]);
}

TEST_CASE("dispersion projection forgets pairing only") {
  DiploidState s{Partition{4, {{1, 2}, {3}, {4}}}, {{1, 2}}};
  const auto p = complete_dispersion(s);
  CHECK(p == s.partition);
  const auto back = dispersed_state(p);
  CHECK(back.pairs.empty());
  CHECK(back.partition == p);
}

TEST_CASE("block size counts") {
  const Partition p{5, {{1, 2}, {3, 4, 5}}};
  CHECK(block_size_counts(p) == std::vector<int>{0, 1, 1, 0, 0});
}

TEST_CASE("text round-trips") {
  const Partition p{4, {{1, 3}, {2}, {4}}};
  CHECK(partition_from_string(to_string(p)) == p);
  DiploidState s{p, {{0, 2}}};
  CHECK(diploid_state_from_string(to_string(s)) == s);
  CHECK(to_string(MergerSpec{5, {3, 2}, 0}) == "(5;3+2;0)");
}
