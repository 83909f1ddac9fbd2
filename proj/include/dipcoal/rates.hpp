#pragma once

#include <map>

#include <Eigen/Dense>

#include "dipcoal/partitions.hpp"
#include "dipcoal/xi_measure.hpp"

namespace dipcoal {

// Transition rate of the merger class under the measure, closed form:
// the Kingman atom contributes on single pair mergers, each k-fold component
// contributes w * sum_l C(s,l) (k)_{j+l} k^{1-K-l} E[x^{K+l-2} (1-x)^{s-l}]
// with K = sum k_i; Beta expectations reduce to Beta-function ratios.
double rate(const XiMeasure& measure, const MergerSpec& spec);

// Same quantity by adaptive tanh-sinh integration of the raw mixing-density
// integrand (point masses evaluate as finite sums). Serves as an independent
// numeric oracle; throws std::runtime_error on non-convergence.
double rate_quadrature(const XiMeasure& measure, const MergerSpec& spec,
                       double rel_tol = 1e-10);

// Max absolute violation of the one-extra-block recursion
//   lambda_{b} = lambda_{b+1,s+1} + sum_i lambda_{b+1,k_i+1} + s lambda_{b+1,+pair}
// over all specs with 2 <= b < max_b.
double consistency_check(const XiMeasure& measure, int max_b);

// Rates for every merger class with b <= max_b, built eagerly.
class RateTable {
 public:
  RateTable(const XiMeasure& measure, int max_b);

  double lookup(const MergerSpec& spec) const;  // throws if b > max_b
  int max_b() const { return max_b_; }
  const XiMeasure& measure() const { return measure_; }

 private:
  XiMeasure measure_;
  int max_b_;
  std::map<MergerSpec, double> entries_;
};

// Jump-chain generator on enumerate_partitions(n), n <= 8: off-diagonal
// entries are merger rates, diagonals make rows sum to zero, and the
// all-merged row is zero.
Eigen::MatrixXd generator_matrix(const XiMeasure& measure, int n);

}  // namespace dipcoal
