#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dipcoal/forward_models.hpp"
#include "dipcoal/partitions.hpp"
#include "dipcoal/rng.hpp"

namespace dipcoal {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  long long replicates = 0;
};

// Monte Carlo pair-coalescence probability: averages (V_i)_2 / (8 (N - 1))
// over all individuals of each sampled matrix (exchangeability makes every
// row a copy of the first) and reports the replicate-level standard error.
EstimateWithError estimate_cn(const ModelConfig& config, long long reps,
                              Xoshiro256& rng);

// Scaled joint factorial moment of `orders.size()` distinct individuals:
//   E[(V_1)_{k_1} ... (V_j)_{k_j}] / (c_N N^{sum k - j} 2^{sum k}),
// with the same sample supplying both the numerator and the c_N estimate
// (ratio estimator; standard error by the delta method).  The numerator
// averages over all ordered distinct index tuples via power sums, which makes
// the j = 1, k = 2 case the deterministic identity 2 (N - 1) / N.
// Supports j <= 3.
EstimateWithError estimate_phi(const ModelConfig& config,
                               const std::vector<int>& orders, long long reps,
                               Xoshiro256& rng);

// Limit of (N / c_N) P(V_1 > N x) for the heavy-tailed fitness model.
double tail_scaling_limit(double alpha, double x);

struct TailPoint {
  double x = 0.0;
  double scaled = 0.0;     // (N / c_hat) * empirical P(V_1 > N x)
  double std_error = 0.0;  // delta-method error of the ratio
  double limit = 0.0;
};
struct TailScalingCurve {
  std::vector<TailPoint> points;
  EstimateWithError c_n;
};

// Empirical tail curve for RandomFitness with Pareto fitness, on a grid of
// x in (0, 1), scaled by the same-sample c_N estimate.
TailScalingCurve tail_scaling(const ModelConfig& config,
                              const std::vector<double>& x_grid, long long reps,
                              Xoshiro256& rng);

// Empirical one-step transition frequencies on the diploid states of n <= 4
// genes, row/column order matching enumerate_diploid_states(n); `reps` fresh
// (matrix, step) samples per start state.
Eigen::MatrixXd estimate_transition_matrix(const ModelConfig& config, int n,
                                           long long reps, Xoshiro256& rng);

// Indices of the zero-pair states within enumerate_diploid_states(n); they
// appear in enumerate_partitions(n) order, so submatrices taken at these
// indices align with the partition-level generator.
std::vector<int> dispersed_state_indices(int n);

// Separation-of-timescales reading of a one-step matrix: A collapses every
// state to its dispersion projection instantly, P = A is the limit projection,
// B = (Pi_hat - A) / c_hat the centered fast matrix, and G = P B P the
// generator estimate for the projected process.
struct MohleDecomposition {
  std::vector<DiploidState> states;
  Eigen::MatrixXd A;
  Eigen::MatrixXd P;
  Eigen::MatrixXd B;
  Eigen::MatrixXd G;
  double c_hat = 0.0;
};
MohleDecomposition mohle_decompose(const Eigen::MatrixXd& pi_hat, double c_hat,
                                   int n);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov against a cdf; asymptotic p-value.
TestResult ks_test(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov; asymptotic p-value at the effective size.
TestResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square against expected cell probabilities.  Cells whose
// expectation falls below min_expected are pooled into one bucket.
TestResult chi2_test(const std::vector<long long>& observed,
                     const std::vector<double>& expected_probs,
                     double min_expected = 5.0);

// Chi-square homogeneity test of two count vectors over the same cells,
// pooling cells whose smaller expected count falls below min_expected.
TestResult chi2_two_sample(const std::vector<long long>& a,
                           const std::vector<long long>& b,
                           double min_expected = 5.0);

// Two-sided two-proportion z-test with pooled variance.
TestResult two_proportion_test(long long hits_a, long long n_a,
                               long long hits_b, long long n_b);

}  // namespace dipcoal
