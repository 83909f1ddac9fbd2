#include "dipcoal/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

namespace dipcoal {

namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double falling(double k, int m) {
  double f = 1.0;
  for (int i = 0; i < m; ++i) f *= k - i;
  return f;
}

double choose(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// One k-fold component's rate for spec (b; k_1..k_j; s), closed form.
double component_rate(const XiComponent& c, const MergerSpec& spec) {
  const int j = spec.n_groups();
  const int K = spec.total_merged();
  const int s = spec.singletons;
  const int k = c.fold;
  if (j > k) return 0.0;  // falling factorial (k)_{j+l} vanishes for all l
  if (j == 1 && K == 2 && s == 0) return c.weight;  // pair rate equals the weight
  const int l_max = std::min(s, k - j);
  double sum = 0.0;
  if (const auto* beta = std::get_if<BetaLaw>(&c.law)) {
    const double a = beta->alpha;
    const double lb0 = log_beta(2.0 - a, a);
    for (int l = 0; l <= l_max; ++l)
      sum += choose(s, l) * falling(k, j + l) *
             std::exp((1.0 - K - l) * std::log(static_cast<double>(k)) +
                      log_beta(K + l - a, s - l + a) - lb0);
  } else {
    const double x0 = std::get<PointMassLaw>(c.law).x0;
    for (int l = 0; l <= l_max; ++l)
      sum += choose(s, l) * falling(k, j + l) * std::pow(x0 / k, K + l) *
             std::pow(1.0 - x0, s - l) * (k / (x0 * x0));
  }
  return c.weight * sum;
}

// Integrand of one Beta component with the exponents of x merged, so no
// intermediate under/overflow occurs for x near the endpoints.
double component_integrand(const XiComponent& c, const MergerSpec& spec, double x) {
  const int j = spec.n_groups();
  const int K = spec.total_merged();
  const int s = spec.singletons;
  const int k = c.fold;
  const double a = std::get<BetaLaw>(c.law).alpha;
  const int l_max = std::min(s, k - j);
  double sum = 0.0;
  for (int l = 0; l <= l_max; ++l)
    sum += choose(s, l) * falling(k, j + l) *
           std::pow(static_cast<double>(k), 1.0 - K - l) *
           std::pow(x, K + l - 1.0 - a) * std::pow(1.0 - x, s - l + a - 1.0);
  return c.weight * sum / std::exp(log_beta(2.0 - a, a));
}

// Adaptive tanh-sinh over (0, 1). Handles endpoint power singularities with
// exponent > -1; throws when successive refinements fail to settle.
template <typename F>
double tanh_sinh(F f, double rel_tol) {
  constexpr double kTMax = 6.0;
  constexpr int kMaxLevel = 12;
  const double pi = 3.14159265358979323846;

  auto node_term = [&](double t) {
    const double u = 0.5 * pi * std::sinh(t);
    const double x = 1.0 / (1.0 + std::exp(-2.0 * u));
    const double omx = 1.0 / (1.0 + std::exp(2.0 * u));
    const double w = pi * std::cosh(t) * x * omx;
    if (x <= 0.0 || omx <= 0.0 || w <= 0.0) return 0.0;
    return w * f(x, omx);
  };

  double h = 0.5;
  double sum = node_term(0.0);
  for (double t = h; t <= kTMax; t += h) sum += node_term(t) + node_term(-t);
  double prev = sum * h;

  for (int level = 1; level <= kMaxLevel; ++level) {
    h *= 0.5;
    double odd = 0.0;  // new nodes sit at odd multiples of the refined step
    for (double t = h; t <= kTMax; t += 2.0 * h) odd += node_term(t) + node_term(-t);
    sum += odd;
    const double cur = sum * h;
    const double err = std::abs(cur - prev);
    if (level >= 3 && err <= rel_tol * std::max(std::abs(cur), 1e-300))
      return cur;
    if (level >= 3 && cur == 0.0 && prev == 0.0) return 0.0;
    prev = cur;
  }
  throw std::runtime_error("rate_quadrature: tanh-sinh refinement did not converge");
}

}  // namespace

double rate(const XiMeasure& measure, const MergerSpec& spec) {
  validate(spec);
  double total = 0.0;
  if (spec.n_groups() == 1 && spec.group_sizes[0] == 2)
    total += measure.kingman_mass();
  for (const auto& c : measure.components()) total += component_rate(c, spec);
  return total;
}

double rate_quadrature(const XiMeasure& measure, const MergerSpec& spec,
                       double rel_tol) {
  validate(spec);
  double total = 0.0;
  if (spec.n_groups() == 1 && spec.group_sizes[0] == 2)
    total += measure.kingman_mass();
  for (const auto& c : measure.components()) {
    if (spec.n_groups() > c.fold) continue;
    if (std::holds_alternative<PointMassLaw>(c.law)) {
      total += component_rate(c, spec);  // atom: the integral is a finite sum
    } else {
      total += tanh_sinh(
          [&](double x, double /*omx*/) { return component_integrand(c, spec, x); },
          rel_tol);
    }
  }
  return total;
}

double consistency_check(const XiMeasure& measure, int max_b) {
  if (max_b < 3 || max_b > 14)
    throw std::invalid_argument("consistency_check: max_b must lie in 3..14");
  double worst = 0.0;
  for (int b = 2; b < max_b; ++b) {
    for (const auto& spec : enumerate_merger_specs(b)) {
      const double lhs = rate(measure, spec);

      MergerSpec extra_singleton = spec;
      extra_singleton.b = b + 1;
      extra_singleton.singletons += 1;
      double rhs = rate(measure, extra_singleton);

      for (std::size_t i = 0; i < spec.group_sizes.size(); ++i) {
        MergerSpec grown = spec;
        grown.b = b + 1;
        grown.group_sizes[i] += 1;
        std::sort(grown.group_sizes.begin(), grown.group_sizes.end(),
                  std::greater<int>());
        rhs += rate(measure, grown);
      }

      if (spec.singletons >= 1) {
        MergerSpec new_pair = spec;
        new_pair.b = b + 1;
        new_pair.group_sizes.push_back(2);
        std::sort(new_pair.group_sizes.begin(), new_pair.group_sizes.end(),
                  std::greater<int>());
        new_pair.singletons -= 1;
        rhs += rate(measure, new_pair) * spec.singletons;
      }

      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

RateTable::RateTable(const XiMeasure& measure, int max_b)
    : measure_(measure), max_b_(max_b) {
  if (max_b < 2) throw std::invalid_argument("RateTable: max_b must be >= 2");
  for (int b = 2; b <= max_b; ++b)
    for (const auto& spec : enumerate_merger_specs(b))
      entries_.emplace(spec, rate(measure_, spec));
}

double RateTable::lookup(const MergerSpec& spec) const {
  const auto it = entries_.find(spec);
  if (it == entries_.end())
    throw std::out_of_range("RateTable: spec outside table range " + to_string(spec));
  return it->second;
}

Eigen::MatrixXd generator_matrix(const XiMeasure& measure, int n) {
  if (n < 1 || n > 8)
    throw std::invalid_argument("generator_matrix: n must lie in 1..8");
  const auto parts = enumerate_partitions(n);
  const auto m = static_cast<Eigen::Index>(parts.size());
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      if (parts[j].n_blocks() >= parts[i].n_blocks()) continue;  // not a coarsening
      const auto rel = merger_spec(parts[i], parts[j]);
      if (const auto* spec = std::get_if<MergerSpec>(&rel)) {
        const double r = rate(measure, *spec);
        gen(i, j) = r;
        row_sum += r;
      }
    }
    gen(i, i) = -row_sum;
  }
  return gen;
}

}  // namespace dipcoal
