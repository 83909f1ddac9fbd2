#include "dipcoal/ancestry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dipcoal {

namespace {

int occupied_individuals(const DiploidState& state) {
  return state.partition.n_blocks() - static_cast<int>(state.pairs.size());
}

double cn_for_scale(const ModelConfig& config) {
  if (const auto exact = pair_coalescence_prob(config)) return *exact;
  const auto asym = predicted_cn_asymptote(config);
  return asym->constant *
         std::pow(static_cast<double>(population_size(config)), asym->exponent);
}

}  // namespace

DiploidState dispersed_singletons(int n) {
  return dispersed_state(singletons_partition(n));
}

DiploidState fully_paired_singletons(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("fully_paired_singletons: n must be even and >= 2");
  DiploidState state;
  state.partition = singletons_partition(n);
  for (int b = 0; b + 1 < n; b += 2) state.pairs.emplace_back(b, b + 1);
  return state;
}

DiploidState step_with_couples(const DiploidState& state,
                               const std::vector<std::pair<int, int>>& couples,
                               Xoshiro256& rng) {
  const auto& blocks = state.partition.blocks;
  const int nb = static_cast<int>(blocks.size());
  const int a = occupied_individuals(state);
  if (static_cast<int>(couples.size()) != a)
    throw std::invalid_argument("step_with_couples: one couple per occupied individual");

  // (parent * 2 + slot, block) for every block, then merge equal keys.
  std::vector<std::pair<std::int64_t, int>> keyed(static_cast<std::size_t>(nb));
  std::vector<char> in_pair(static_cast<std::size_t>(nb), 0);
  std::size_t next_couple = 0;
  for (const auto& [b1, b2] : state.pairs) {
    const auto [pi, pj] = couples[next_couple++];
    const bool flip = uniform_below(rng, 2) != 0;
    const int parent1 = flip ? pj : pi;
    const int parent2 = flip ? pi : pj;  // paired genes split across parents
    keyed[static_cast<std::size_t>(b1)] = {
        static_cast<std::int64_t>(parent1) * 2 +
            static_cast<std::int64_t>(uniform_below(rng, 2)),
        b1};
    keyed[static_cast<std::size_t>(b2)] = {
        static_cast<std::int64_t>(parent2) * 2 +
            static_cast<std::int64_t>(uniform_below(rng, 2)),
        b2};
    in_pair[static_cast<std::size_t>(b1)] = 1;
    in_pair[static_cast<std::size_t>(b2)] = 1;
  }
  for (int b = 0; b < nb; ++b) {
    if (in_pair[static_cast<std::size_t>(b)]) continue;
    const auto [pi, pj] = couples[next_couple++];
    const int parent = uniform_below(rng, 2) != 0 ? pj : pi;
    keyed[static_cast<std::size_t>(b)] = {
        static_cast<std::int64_t>(parent) * 2 +
            static_cast<std::int64_t>(uniform_below(rng, 2)),
        b};
  }
  std::sort(keyed.begin(), keyed.end());

  // merge runs with one key; remember each new block's (parent, slot)
  std::vector<std::vector<int>> merged;
  std::vector<std::int64_t> key_of;
  for (std::size_t k = 0; k < keyed.size();) {
    std::vector<int> genes;
    const std::int64_t key = keyed[k].first;
    while (k < keyed.size() && keyed[k].first == key) {
      const auto& src = blocks[static_cast<std::size_t>(keyed[k].second)];
      genes.insert(genes.end(), src.begin(), src.end());
      ++k;
    }
    std::sort(genes.begin(), genes.end());
    merged.push_back(std::move(genes));
    key_of.push_back(key);
  }

  // canonical block order, with an index map for the pairing
  std::vector<int> order(merged.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(), [&merged](int x, int y) {
    return merged[static_cast<std::size_t>(x)].front() <
           merged[static_cast<std::size_t>(y)].front();
  });
  std::vector<int> rank(merged.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    rank[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

  DiploidState next;
  next.partition.n = state.partition.n;
  for (int idx : order)
    next.partition.blocks.push_back(std::move(merged[static_cast<std::size_t>(idx)]));
  for (std::size_t k = 0; k + 1 < key_of.size(); ++k) {
    if (key_of[k + 1] == key_of[k] + 1 && key_of[k] % 2 == 0) {
      // both slots of one parent are tracked: a paired individual
      const int x = rank[k];
      const int y = rank[k + 1];
      next.pairs.emplace_back(std::min(x, y), std::max(x, y));
    }
  }
  std::sort(next.pairs.begin(), next.pairs.end());
  return next;
}

DiploidState step(const DiploidState& state, const OffspringMatrix& matrix,
                  Xoshiro256& rng) {
  const int a = occupied_individuals(state);
  if (a > matrix.n_pop)
    throw std::invalid_argument("step: more tracked individuals than children");

  // couples via weighted sampling without replacement from the pair counts
  std::vector<long long> remaining(matrix.entries.size());
  for (std::size_t e = 0; e < remaining.size(); ++e)
    remaining[e] = matrix.entries[e].count;
  long long total = matrix.n_pop;
  std::vector<std::pair<int, int>> couples;
  couples.reserve(static_cast<std::size_t>(a));
  for (int t = 0; t < a; ++t) {
    auto u = static_cast<long long>(
        uniform_below(rng, static_cast<std::uint64_t>(total)));
    std::size_t e = 0;
    while (u >= remaining[e]) {
      u -= remaining[e];
      ++e;
    }
    couples.emplace_back(matrix.entries[e].i, matrix.entries[e].j);
    --remaining[e];
    --total;
  }
  return step_with_couples(state, couples, rng);
}

GenealogyRecord run_genealogy(const ModelConfig& config, int n, Xoshiro256& rng,
                              const AncestryOptions& options) {
  validate(config);
  if (n < 1) throw std::invalid_argument("run_genealogy: n must be >= 1");
  DiploidState state = options.start ? *options.start : dispersed_singletons(n);
  validate(state);
  if (state.partition.n != n)
    throw std::invalid_argument("run_genealogy: start state has wrong n");
  if (occupied_individuals(state) > population_size(config))
    throw std::invalid_argument("run_genealogy: sample exceeds the population");

  long long cap = options.max_generations;
  if (cap <= 0)
    cap = static_cast<long long>(
        std::clamp(1e4 / cn_for_scale(config), 1e6, 1e15));

  GenealogyRecord record;
  record.mode = GenealogyRecord::Mode::Discrete;
  record.n = n;
  Partition cd = complete_dispersion(state);
  record.events.push_back({0.0, cd});

  CoupleSampler couples(config);
  long long gen = 0;
  while (cd.n_blocks() > 1) {
    if (++gen > cap)
      throw std::runtime_error("run_genealogy: generation cap exceeded");
    record.total_length_streaming += cd.n_blocks();
    DiploidState next = step_with_couples(
        state, couples.sample(occupied_individuals(state), rng), rng);
    if (options.trace && !(next == state))
      options.trace->push_back({gen, next});
    Partition next_cd = complete_dispersion(next);
    if (!(next_cd == cd)) {
      const auto rel = merger_spec(cd, next_cd);
      const auto* spec = std::get_if<MergerSpec>(&rel);
      if (spec == nullptr)
        throw std::logic_error("run_genealogy: dispersion projection did not coarsen");
      record.events.push_back({static_cast<double>(gen), next_cd});
      record.specs.push_back(*spec);
      cd = std::move(next_cd);
    }
    state = std::move(next);
  }
  return record;
}

DispersionReport dispersion_probability_check(const ModelConfig& config, int a,
                                              Xoshiro256& rng, long long reps,
                                              std::optional<double> c_n_hint) {
  validate(config);
  if (reps < 1)
    throw std::invalid_argument("dispersion_probability_check: reps must be >= 1");
  const DiploidState start = fully_paired_singletons(a);
  if (a / 2 > population_size(config))
    throw std::invalid_argument("dispersion_probability_check: sample exceeds the population");

  double c_n;
  if (const auto exact = pair_coalescence_prob(config)) {
    c_n = *exact;
  } else if (c_n_hint) {
    c_n = *c_n_hint;
  } else {
    OffspringSampler pilot(config);
    const long long pilot_reps = std::min<long long>(reps, 2000);
    const int pop = population_size(config);
    double acc = 0.0;
    for (long long r = 0; r < pilot_reps; ++r) {
      const auto totals = individual_totals(pilot.sample(rng));
      double sum = 0.0;
      for (long long v : totals) sum += static_cast<double>(v) * (v - 1);
      acc += sum / (static_cast<double>(pop) * 8.0 * (pop - 1));
    }
    c_n = acc / static_cast<double>(pilot_reps);
  }

  OffspringSampler sampler(config);
  long long dispersed = 0;
  for (long long r = 0; r < reps; ++r) {
    const auto matrix = sampler.sample(rng);
    const DiploidState next = step(start, matrix, rng);
    if (next.partition.n_blocks() == a) ++dispersed;
  }

  DispersionReport report;
  report.blocks = a;
  report.reps = reps;
  report.c_n = c_n;
  report.empirical = static_cast<double>(dispersed) / static_cast<double>(reps);
  report.std_error = std::sqrt(report.empirical * (1.0 - report.empirical) /
                               static_cast<double>(reps));
  report.bound = 1.0 - 0.5 * a * (a - 1) * c_n;
  return report;
}

}  // namespace dipcoal
