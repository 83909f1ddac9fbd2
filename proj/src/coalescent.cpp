#include "dipcoal/coalescent.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dipcoal/rates.hpp"

namespace dipcoal {

JumpTable::JumpTable(const XiMeasure& measure, int max_b) {
  if (max_b < 2) throw std::invalid_argument("JumpTable: max_b must be >= 2");
  RateTable rates(measure, max_b);
  rows_.resize(static_cast<std::size_t>(max_b) + 1);
  for (int b = 2; b <= max_b; ++b) {
    Row& row = rows_[static_cast<std::size_t>(b)];
    double acc = 0.0;
    for (const auto& spec : enumerate_merger_specs(b)) {
      const double w = rates.lookup(spec) * merger_spec_multiplicity(spec);
      if (w <= 0.0) continue;
      acc += w;
      row.specs.push_back(spec);
      row.cumulative.push_back(acc);
    }
    row.exit_rate = acc;
  }
}

const JumpTable::Row& JumpTable::row(int b) const {
  if (b < 2 || b >= static_cast<int>(rows_.size()))
    throw std::out_of_range("JumpTable: block count outside table");
  return rows_[static_cast<std::size_t>(b)];
}

namespace {

// Applies a uniformly chosen coarsening with the given spec: blocks are
// assigned to groups by a partial Fisher-Yates shuffle of their indices.
Partition apply_spec(const Partition& p, const MergerSpec& spec, Xoshiro256& rng) {
  const int b = p.n_blocks();
  std::vector<int> order(static_cast<std::size_t>(b));
  std::iota(order.begin(), order.end(), 0);
  const int involved = spec.total_merged();
  for (int i = 0; i < involved; ++i) {
    const auto j = i + static_cast<int>(uniform_below(
                           rng, static_cast<std::uint64_t>(b - i)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  Partition next;
  next.n = p.n;
  int cursor = 0;
  for (int k : spec.group_sizes) {
    std::vector<int> merged;
    for (int i = 0; i < k; ++i) {
      const auto& src =
          p.blocks[static_cast<std::size_t>(order[static_cast<std::size_t>(cursor++)])];
      merged.insert(merged.end(), src.begin(), src.end());
    }
    next.blocks.push_back(std::move(merged));
  }
  for (int i = involved; i < b; ++i)
    next.blocks.push_back(
        p.blocks[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  return canonical(std::move(next));
}

}  // namespace

GenealogyRecord simulate_coalescent(const XiMeasure& measure, int n,
                                    std::uint64_t seed,
                                    const CoalescentOptions& options) {
  const int start_blocks =
      options.start ? options.start->n_blocks() : n;
  JumpTable table(measure, std::max(2, start_blocks));
  Xoshiro256 rng(seed);
  GenealogyRecord record = simulate_coalescent(table, n, rng, options);
  record.seed = seed;
  return record;
}

GenealogyRecord simulate_coalescent(const JumpTable& table, int n,
                                    Xoshiro256& rng,
                                    const CoalescentOptions& options) {
  if (n < 1) throw std::invalid_argument("simulate_coalescent: n must be >= 1");
  Partition state = options.start ? *options.start : singletons_partition(n);
  validate(state);
  if (state.n != n)
    throw std::invalid_argument("simulate_coalescent: start partition has wrong n");
  if (state.n_blocks() > table.max_b())
    throw std::invalid_argument("simulate_coalescent: table too small for start");

  GenealogyRecord record;
  record.mode = GenealogyRecord::Mode::Continuous;
  record.n = n;
  record.events.push_back({0.0, state});

  const int max_events = options.max_events > 0 ? options.max_events : 10 * n * n;
  double time = 0.0;
  int n_events = 0;
  while (state.n_blocks() > 1) {
    if (++n_events > max_events)
      throw std::runtime_error("simulate_coalescent: event cap exceeded");
    const auto& row = table.row(state.n_blocks());
    if (row.exit_rate <= 0.0)
      throw std::runtime_error(
          "simulate_coalescent: zero exit rate before absorption");
    const double hold = exponential(rng) / row.exit_rate;
    record.total_length_streaming += hold * state.n_blocks();
    time += hold;

    const double u = uniform_double(rng) * row.exit_rate;
    auto it = std::lower_bound(row.cumulative.begin(), row.cumulative.end(), u);
    if (it == row.cumulative.end()) --it;  // guards fp rounding at the top end
    const auto& spec = row.specs[static_cast<std::size_t>(
        it - row.cumulative.begin())];

    state = apply_spec(state, spec, rng);
    record.events.push_back({time, state});
    record.specs.push_back(spec);
  }
  return record;
}

double tmrca(const GenealogyRecord& record) { return record.events.back().time; }

double total_length(const GenealogyRecord& record) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < record.events.size(); ++i)
    sum += (record.events[i + 1].time - record.events[i].time) *
           record.events[i].state.n_blocks();
  return sum;
}

std::vector<double> branch_lengths(const GenealogyRecord& record) {
  if (record.mode != GenealogyRecord::Mode::Continuous)
    throw std::invalid_argument("branch_lengths: continuous records only");
  std::vector<double> lengths(
      static_cast<std::size_t>(record.n > 0 ? record.n - 1 : 0), 0.0);
  for (std::size_t i = 0; i + 1 < record.events.size(); ++i) {
    const double hold = record.events[i + 1].time - record.events[i].time;
    for (const auto& block : record.events[i].state.blocks) {
      const auto size = block.size();
      if (size <= lengths.size()) lengths[size - 1] += hold;
    }
  }
  return lengths;
}

}  // namespace dipcoal
