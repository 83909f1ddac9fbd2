#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dipcoal/coalescent.hpp"
#include "dipcoal/forward_models.hpp"
#include "dipcoal/partitions.hpp"
#include "dipcoal/rng.hpp"

namespace dipcoal {

// n genes spread over n distinct individuals, all singleton blocks.
DiploidState dispersed_singletons(int n);

// n genes (n even) as singleton blocks paired into n/2 individuals.
DiploidState fully_paired_singletons(int n);

// One backward generation: the state's occupied individuals draw parental
// couples by weighted sampling without replacement from the matrix counts;
// paired genes go to the two different parents with uniform orientation,
// unpaired genes pick a parent fairly; every gene lands on a uniform
// chromosome slot.  Genes sharing a (parent, slot) merge; parents carrying
// both slots become the new paired individuals.
DiploidState step(const DiploidState& state, const OffspringMatrix& matrix,
                  Xoshiro256& rng);

// Same transition with the couples already drawn (couples[t] belongs to the
// t-th occupied individual: pairs in order, then unpaired blocks in order).
DiploidState step_with_couples(const DiploidState& state,
                               const std::vector<std::pair<int, int>>& couples,
                               Xoshiro256& rng);

struct AncestryOptions {
  std::optional<DiploidState> start;  // default: dispersed singletons
  // Runaway guard; 0 -> ~1e4 / c_N, clamped to [1e6, 1e15]. Exceeding it
  // raises std::runtime_error rather than returning an unabsorbed record.
  long long max_generations = 0;
  // When set, receives (generation, state) for every generation whose full
  // state changed, including pairing churn that the record's dispersion-level
  // events ignore.
  std::vector<std::pair<long long, DiploidState>>* trace = nullptr;
};

// Discrete-time genealogy of n genes under the model: runs generation steps
// until one block remains.  The record (Mode::Discrete) holds the
// dispersion-projected partition at every generation where it changed, with
// times equal to generation numbers and specs labelling each recorded merger.
GenealogyRecord run_genealogy(const ModelConfig& config, int n, Xoshiro256& rng,
                              const AncestryOptions& options = {});

struct DispersionReport {
  double empirical = 0.0;   // fraction of steps with no coalescence
  double std_error = 0.0;
  double bound = 0.0;       // 1 - C(a,2) * c_N
  double c_n = 0.0;
  long long reps = 0;
  int blocks = 0;           // a
};

// Starting from a fully paired state with `a` singleton blocks, estimates the
// one-step probability that the dispersion projection is unchanged (no
// coalescence) and reports it against the union bound 1 - C(a,2) * c_N.
// Uses the analytic pair-coalescence probability when the model has one,
// otherwise `c_n_hint`, otherwise a Monte Carlo estimate on the same stream.
DispersionReport dispersion_probability_check(
    const ModelConfig& config, int a, Xoshiro256& rng, long long reps,
    std::optional<double> c_n_hint = std::nullopt);

}  // namespace dipcoal
