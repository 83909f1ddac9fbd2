#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dipcoal/rng.hpp"

namespace dipcoal {

// One generation of a diploid population with fixed size: children are
// attributed to unordered parent pairs.  Only pairs with at least one child
// are stored, so a matrix costs O(#children) regardless of population size.
struct OffspringEntry {
  int i = 0;
  int j = 0;  // i < j, no self-pairing
  long long count = 0;
};

struct OffspringMatrix {
  int n_pop = 0;
  std::vector<OffspringEntry> entries;  // sorted by (i, j)

  long long total_children() const;
};

// Throws std::invalid_argument on malformed matrices: bad indices, diagonal
// entries, nonpositive counts, unsorted entries, or total != n_pop.
void validate(const OffspringMatrix& m);

// Per-individual offspring counts V_i = sum over pairs containing i.
// Every valid matrix satisfies sum_i V_i = 2 * n_pop.
std::vector<long long> individual_totals(const OffspringMatrix& m);

// --- Fitness laws (per-individual weights) ---------------------------------

struct PointMassFitness {
  double value = 1.0;
};

// P(W > x) = (scale/x)^alpha for x >= scale; infinite variance for alpha < 2.
struct ParetoFitness {
  double alpha = 1.5;
  double scale = 1.0;
};

struct TabulatedFitness {
  std::vector<double> values;
  std::vector<double> probs;
};

using FitnessLaw = std::variant<PointMassFitness, ParetoFitness, TabulatedFitness>;

double fitness_mean(const FitnessLaw& law);
double fitness_second_moment(const FitnessLaw& law);  // infinity for Pareto

// --- Juvenile laws (potential offspring per active pair, X >= 1) -----------

struct ConstJuveniles {
  long long value = 1;
};

// X = ceil(Y) with Y continuous Pareto(alpha, scale), so
// P(X > k) = (scale/k)^alpha for integer k >= scale; tail constant scale^alpha.
struct ParetoJuveniles {
  double alpha = 1.5;
  double scale = 1.0;
};

struct TabulatedJuveniles {
  std::vector<long long> values;  // all >= 1
  std::vector<double> probs;
};

using JuvenileLaw = std::variant<ConstJuveniles, ParetoJuveniles, TabulatedJuveniles>;

double juvenile_mean(const JuvenileLaw& law);
// E[X(X-1)]; infinity for the Pareto-tailed law.
double juvenile_second_factorial_moment(const JuvenileLaw& law);

// --- Model configurations ---------------------------------------------------

// Each child picks a uniformly random unordered parent pair.
struct WrightFisher {
  int n_pop = 0;
};

// Individuals draw i.i.d. fitness weights each generation; each child picks
// parent pair {i, j} with probability proportional to W_i * W_j.
struct RandomFitness {
  int n_pop = 0;
  FitnessLaw fitness = PointMassFitness{};
  int resample_cap = 100;  // retries when all weights drew zero
};

// Each pair is active with probability activity_rate / n_pop; active pairs
// produce X >= 1 juveniles and the next generation is a uniform subsample of
// n_pop of them.  Generations with fewer juveniles than n_pop are redrawn.
struct GaltonWatsonSampling {
  int n_pop = 0;
  double activity_rate = 1.0;
  JuvenileLaw juveniles = ConstJuveniles{1};
  int resample_cap = 100;
};

// Population of 2 * n_couples; a fresh uniform perfect matching forms couples
// each generation and children are spread over couples symmetrically.
struct FixedCouples {
  int n_couples = 0;
};

// With probability n_pop^-gamma one uniformly chosen pair has
// floor(psi * n_pop) children and the rest of the generation is filled
// Wright-Fisher-style from the remaining individuals; otherwise the whole
// generation is Wright-Fisher.
struct LargeFamily {
  int n_pop = 0;
  double psi = 0.5;
  double gamma = 0.5;
};

using ModelConfig =
    std::variant<WrightFisher, RandomFitness, GaltonWatsonSampling,
                 FixedCouples, LargeFamily>;

// Population size N implied by the config (2 * n_couples for FixedCouples).
int population_size(const ModelConfig& config);

// Throws std::invalid_argument with a parameter-specific message.
void validate(const ModelConfig& config);

// Stable short identifier for CSV output, e.g. "wright-fisher(N=100)".
std::string model_id(const ModelConfig& config);

// --- Sampling ----------------------------------------------------------------

// Reusable sampler: validates the config once and keeps per-generation
// workspaces so repeated sampling allocates nothing in steady state.
class OffspringSampler {
 public:
  explicit OffspringSampler(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  OffspringMatrix sample(Xoshiro256& rng);

  // Generations redrawn because all fitness weights were zero or the juvenile
  // pool fell short of the population size.
  long long resample_count() const { return resamples_; }

 private:
  OffspringMatrix sample_wright_fisher(int n, Xoshiro256& rng);
  OffspringMatrix sample_random_fitness(const RandomFitness& m, Xoshiro256& rng);
  OffspringMatrix sample_gw(const GaltonWatsonSampling& m, Xoshiro256& rng);
  OffspringMatrix sample_fixed_couples(const FixedCouples& m, Xoshiro256& rng);
  OffspringMatrix sample_large_family(const LargeFamily& m, Xoshiro256& rng);

  OffspringMatrix collect_codes(int n_pop);

  ModelConfig config_;
  long long resamples_ = 0;
  std::vector<std::uint64_t> codes_;
  std::vector<double> weights_;
  std::vector<double> weight_cdf_;
  std::vector<double> pair_cdf_;
  std::vector<int> matching_;
  std::vector<std::uint64_t> active_codes_;
  std::vector<long long> juvenile_counts_;
  std::optional<AliasTable> fitness_table_;   // tabulated fitness values
  std::optional<AliasTable> juvenile_table_;  // tabulated juvenile values
  AliasTable parent_table_;                   // per-generation pair weights
  bool parent_table_ready_ = false;
};

// One-shot convenience wrapper around OffspringSampler.
OffspringMatrix sample_offspring(const ModelConfig& config, Xoshiro256& rng);

// Parental couples of a handful of distinct, uniformly chosen children from
// one fresh generation, equal in law to sampling a full offspring matrix and
// drawing that many child slots without replacement, but in O(count) work for
// most models (O(active pairs) for GaltonWatsonSampling, O(N) for
// RandomFitness).  Genealogy runs only ever need the tracked individuals'
// couples, so this is the hot path backward in time.
class CoupleSampler {
 public:
  explicit CoupleSampler(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  // Couples of `count` distinct children; each call is one fresh generation.
  // The returned reference stays valid until the next call.
  const std::vector<std::pair<int, int>>& sample(int count, Xoshiro256& rng);

  long long resample_count() const { return resamples_; }

 private:
  void sample_wright_fisher(int count, int n, Xoshiro256& rng);
  void sample_random_fitness(int count, const RandomFitness& m, Xoshiro256& rng);
  void sample_gw(int count, const GaltonWatsonSampling& m, Xoshiro256& rng);
  void sample_fixed_couples(int count, const FixedCouples& m, Xoshiro256& rng);
  void sample_large_family(int count, const LargeFamily& m, Xoshiro256& rng);

  std::pair<int, int> fresh_pair_label(int n, Xoshiro256& rng);

  ModelConfig config_;
  long long resamples_ = 0;
  std::vector<std::pair<int, int>> couples_;
  std::vector<std::pair<int, int>> labels_;     // pair labels issued this call
  std::vector<long long> pool_prefix_;          // juvenile counts, cumulative
  std::vector<long long> pool_slot_;            // distinct slots seen this call
  std::vector<long long> draw_codes_;           // distinct juvenile indices
  std::vector<double> weights_;
  std::vector<double> weight_cdf_;
  std::vector<double> pair_cdf_;
  AliasTable parent_table_;
  bool parent_table_ready_ = false;
  std::optional<AliasTable> fitness_table_;
  std::optional<AliasTable> juvenile_table_;
  std::optional<AliasTable> juvenile_body_;     // Pareto juveniles: exact body
  std::vector<long long> juvenile_body_values_;
  double juvenile_tail_at_ = 0.0;               // body/tail split point
};

// --- Pair-coalescence scale ---------------------------------------------------

// Exact per-generation probability that two gene copies sampled from two
// distinct children coalesce, for models where it is available in closed form:
// Wright-Fisher, FixedCouples, LargeFamily.  Others return nullopt.
std::optional<double> pair_coalescence_prob(const ModelConfig& config);

// Large-population behaviour c_N ~ constant * N^exponent for the two
// heavy-tail-capable models; nullopt for the rest.
struct CnAsymptote {
  double exponent = 0.0;
  double constant = 0.0;
};
std::optional<CnAsymptote> predicted_cn_asymptote(const ModelConfig& config);

}  // namespace dipcoal
