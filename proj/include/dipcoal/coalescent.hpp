#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dipcoal/partitions.hpp"
#include "dipcoal/rng.hpp"
#include "dipcoal/xi_measure.hpp"

namespace dipcoal {

// One realized gene genealogy. events[0] is the initial state at time 0;
// event times are strictly increasing and block counts strictly decreasing.
// In Discrete mode, times hold integer generation indices and states are the
// dispersed partition level of the ancestral process.
struct GenealogyRecord {
  enum class Mode { Continuous, Discrete };

  Mode mode = Mode::Continuous;
  int n = 0;
  std::uint64_t seed = 0;

  struct Event {
    double time = 0.0;
    Partition state;
  };
  std::vector<Event> events;
  std::vector<MergerSpec> specs;  // specs[i] labels the jump into events[i+1]

  // streaming sum of holding-time x block-count, kept by the simulator
  double total_length_streaming = 0.0;

  const Partition& final_state() const { return events.back().state; }
  bool absorbed() const { return events.back().state.n_blocks() == 1; }
};

struct CoalescentOptions {
  std::optional<Partition> start;  // defaults to all singletons
  // Runaway guard, 0 means 10 * n^2; a proper measure absorbs within n - 1
  // jumps, so hitting the cap raises std::runtime_error instead of returning
  // a silently truncated record.
  int max_events = 0;
};

// Per-block-count jump table reused across replicates of one measure:
// jump weight of a spec at b blocks is rate(spec) times the number of
// partition targets sharing that spec.
class JumpTable {
 public:
  JumpTable(const XiMeasure& measure, int max_b);

  struct Row {
    std::vector<MergerSpec> specs;
    std::vector<double> cumulative;  // cumulative multiplicity-weighted rates
    double exit_rate = 0.0;
  };
  const Row& row(int b) const;  // b in 2..max_b
  int max_b() const { return static_cast<int>(rows_.size()) - 1; }

 private:
  std::vector<Row> rows_;
};

// Jump-and-hold simulation of the exchangeable coalescent induced by the
// measure, started from all singletons unless options.start says otherwise.
// Group members are assigned uniformly among all groupings with the spec.
GenealogyRecord simulate_coalescent(const XiMeasure& measure, int n,
                                    std::uint64_t seed,
                                    const CoalescentOptions& options = {});

// Hot-path variant reusing a prebuilt table and caller-managed stream.
GenealogyRecord simulate_coalescent(const JumpTable& table, int n,
                                    Xoshiro256& rng,
                                    const CoalescentOptions& options = {});

double tmrca(const GenealogyRecord& record);
double total_length(const GenealogyRecord& record);

// branch_lengths[i] = time integral of the number of blocks of size i+1,
// for sizes 1..n-1. Continuous mode only.
std::vector<double> branch_lengths(const GenealogyRecord& record);

}  // namespace dipcoal
