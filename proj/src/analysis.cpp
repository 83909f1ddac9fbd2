#include "dipcoal/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <boost/math/distributions/chi_squared.hpp>

#include "dipcoal/ancestry.hpp"

namespace dipcoal {

namespace {

double falling(long long v, int k) {
  double out = 1.0;
  for (int t = 0; t < k; ++t) out *= static_cast<double>(v - t);
  return out;
}

// (V_i)_2 averaged over individuals, scaled to estimate c_N unbiasedly.
double cn_statistic(const std::vector<long long>& totals, int n_pop) {
  double sum = 0.0;
  for (long long v : totals) sum += static_cast<double>(v) * (v - 1);
  return sum / (static_cast<double>(n_pop) * 8.0 * (n_pop - 1));
}

struct MeanVar {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se_of_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

// Delta-method standard error for mean(a) / mean(b) from replicate pairs.
double ratio_se(const MeanVar& a, const MeanVar& b, double cov_ab, long long n) {
  if (a.mean == 0.0 && b.mean == 0.0) return 0.0;
  const double r = a.mean / b.mean;
  const double va = a.variance() / static_cast<double>(n);
  const double vb = b.variance() / static_cast<double>(n);
  const double cab = cov_ab / static_cast<double>(n);
  const double rel = va / (a.mean * a.mean) + vb / (b.mean * b.mean) -
                     2.0 * cab / (a.mean * b.mean);
  return std::abs(r) * std::sqrt(std::max(0.0, rel));
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 101; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_p_value(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

EstimateWithError estimate_cn(const ModelConfig& config, long long reps,
                              Xoshiro256& rng) {
  if (reps < 100) throw std::invalid_argument("estimate_cn: reps must be >= 100");
  OffspringSampler sampler(config);
  const int pop = population_size(config);
  MeanVar acc;
  for (long long r = 0; r < reps; ++r)
    acc.add(cn_statistic(individual_totals(sampler.sample(rng)), pop));
  return {acc.mean, acc.se_of_mean(), reps};
}

EstimateWithError estimate_phi(const ModelConfig& config,
                               const std::vector<int>& orders, long long reps,
                               Xoshiro256& rng) {
  const auto j = static_cast<int>(orders.size());
  if (j < 1 || j > 3)
    throw std::invalid_argument("estimate_phi: between 1 and 3 individuals");
  for (int k : orders)
    if (k < 2) throw std::invalid_argument("estimate_phi: orders must be >= 2");
  if (reps < 100) throw std::invalid_argument("estimate_phi: reps must be >= 100");

  OffspringSampler sampler(config);
  const int pop = population_size(config);
  const double dn = static_cast<double>(pop);

  MeanVar num, den;
  double cov_sum = 0.0;
  std::vector<double> s1(static_cast<std::size_t>(j));  // sum_i (V_i)_{k_t}
  for (long long r = 0; r < reps; ++r) {
    const auto totals = individual_totals(sampler.sample(rng));

    std::fill(s1.begin(), s1.end(), 0.0);
    double s12 = 0.0, s13 = 0.0, s23 = 0.0, s123 = 0.0;
    for (long long v : totals) {
      double f[3] = {0.0, 0.0, 0.0};
      for (int t = 0; t < j; ++t) {
        f[t] = falling(v, orders[static_cast<std::size_t>(t)]);
        s1[static_cast<std::size_t>(t)] += f[t];
      }
      if (j >= 2) s12 += f[0] * f[1];
      if (j == 3) {
        s13 += f[0] * f[2];
        s23 += f[1] * f[2];
        s123 += f[0] * f[1] * f[2];
      }
    }

    // average over ordered tuples of distinct individuals
    double tuple_sum;
    double tuples;
    if (j == 1) {
      tuple_sum = s1[0];
      tuples = dn;
    } else if (j == 2) {
      tuple_sum = s1[0] * s1[1] - s12;
      tuples = dn * (dn - 1);
    } else {
      tuple_sum = s1[0] * s1[1] * s1[2] - s12 * s1[2] - s13 * s1[1] -
                  s23 * s1[0] + 2.0 * s123;
      tuples = dn * (dn - 1) * (dn - 2);
    }

    const double a = tuple_sum / tuples;
    const double b = cn_statistic(totals, pop);
    const double da = a - num.mean;  // covariance update uses pre-add means
    num.add(a);
    den.add(b);
    cov_sum += da * (b - den.mean);
  }
  if (den.mean <= 0.0)
    throw std::runtime_error("estimate_phi: degenerate c_N estimate");

  int sum_k = 0;
  for (int k : orders) sum_k += k;
  const double scale =
      std::pow(dn, static_cast<double>(sum_k - j)) * std::pow(2.0, sum_k);
  const double cov = reps > 1 ? cov_sum / static_cast<double>(reps - 1) : 0.0;
  return {num.mean / (den.mean * scale), ratio_se(num, den, cov, reps) / scale,
          reps};
}

double tail_scaling_limit(double alpha, double x) {
  if (!(alpha > 1.0) || !(alpha < 2.0))
    throw std::invalid_argument("tail_scaling_limit: alpha must lie in (1, 2)");
  if (!(x > 0.0) || !(x < 1.0))
    throw std::invalid_argument("tail_scaling_limit: x must lie in (0, 1)");
  const double log_beta = std::lgamma(2.0 - alpha) + std::lgamma(alpha);
  return 8.0 * std::pow((1.0 - x) / x, alpha) /
         (alpha * std::exp(log_beta));
}

TailScalingCurve tail_scaling(const ModelConfig& config,
                              const std::vector<double>& x_grid, long long reps,
                              Xoshiro256& rng) {
  const auto* rf = std::get_if<RandomFitness>(&config);
  const auto* pareto =
      rf != nullptr ? std::get_if<ParetoFitness>(&rf->fitness) : nullptr;
  if (pareto == nullptr)
    throw std::invalid_argument(
        "tail_scaling: needs RandomFitness with Pareto fitness");
  if (reps < 100) throw std::invalid_argument("tail_scaling: reps must be >= 100");
  for (double x : x_grid)
    if (!(x > 0.0) || !(x < 1.0))
      throw std::invalid_argument("tail_scaling: grid must lie in (0, 1)");

  OffspringSampler sampler(config);
  const int pop = rf->n_pop;
  const double dn = static_cast<double>(pop);

  const auto nx = x_grid.size();
  std::vector<MeanVar> tails(nx);
  std::vector<double> cov_sum(nx, 0.0);
  MeanVar den;
  for (long long r = 0; r < reps; ++r) {
    const auto totals = individual_totals(sampler.sample(rng));
    const double b = cn_statistic(totals, pop);
    den.add(b);  // pair pre-add tail means with the post-add c_N mean
    for (std::size_t g = 0; g < nx; ++g) {
      const double threshold = dn * x_grid[g];
      long long hits = 0;
      for (long long v : totals)
        if (static_cast<double>(v) > threshold) ++hits;
      const double a = static_cast<double>(hits) / dn;
      const double da = a - tails[g].mean;
      tails[g].add(a);
      cov_sum[g] += da * (b - den.mean);
    }
  }
  if (den.mean <= 0.0)
    throw std::runtime_error("tail_scaling: degenerate c_N estimate");

  TailScalingCurve curve;
  curve.c_n = {den.mean, den.se_of_mean(), reps};
  for (std::size_t g = 0; g < nx; ++g) {
    const double cov = reps > 1 ? cov_sum[g] / static_cast<double>(reps - 1) : 0.0;
    TailPoint pt;
    pt.x = x_grid[g];
    pt.scaled = dn * tails[g].mean / den.mean;
    pt.std_error = dn * ratio_se(tails[g], den, cov, reps);
    pt.limit = tail_scaling_limit(pareto->alpha, x_grid[g]);
    curve.points.push_back(pt);
  }
  return curve;
}

Eigen::MatrixXd estimate_transition_matrix(const ModelConfig& config, int n,
                                           long long reps, Xoshiro256& rng) {
  if (n < 1 || n > 4)
    throw std::invalid_argument("estimate_transition_matrix: n must be in 1..4");
  if (reps < 1)
    throw std::invalid_argument("estimate_transition_matrix: reps must be >= 1");
  const auto states = enumerate_diploid_states(n);
  std::unordered_map<std::string, int> index;
  for (std::size_t s = 0; s < states.size(); ++s)
    index.emplace(to_string(states[s]), static_cast<int>(s));

  OffspringSampler sampler(config);
  const auto dim = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto& start = states[static_cast<std::size_t>(s)];
    for (long long r = 0; r < reps; ++r) {
      const auto next = step(start, sampler.sample(rng), rng);
      pi(s, index.at(to_string(next))) += 1.0;
    }
  }
  return pi / static_cast<double>(reps);
}

std::vector<int> dispersed_state_indices(int n) {
  const auto states = enumerate_diploid_states(n);
  std::vector<int> idx;
  for (std::size_t s = 0; s < states.size(); ++s)
    if (states[s].pairs.empty()) idx.push_back(static_cast<int>(s));
  return idx;
}

MohleDecomposition mohle_decompose(const Eigen::MatrixXd& pi_hat, double c_hat,
                                   int n) {
  if (!(c_hat > 0.0))
    throw std::invalid_argument("mohle_decompose: c_hat must be positive");
  MohleDecomposition out;
  out.states = enumerate_diploid_states(n);
  const auto dim = static_cast<Eigen::Index>(out.states.size());
  if (pi_hat.rows() != dim || pi_hat.cols() != dim)
    throw std::invalid_argument("mohle_decompose: matrix size does not match n");

  std::unordered_map<std::string, int> index;
  for (std::size_t s = 0; s < out.states.size(); ++s)
    index.emplace(to_string(out.states[s]), static_cast<int>(s));

  out.A = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto target =
        dispersed_state(complete_dispersion(out.states[static_cast<std::size_t>(s)]));
    out.A(s, index.at(to_string(target))) = 1.0;
  }
  out.P = out.A;
  out.B = (pi_hat - out.A) / c_hat;
  out.G = out.P * out.B * out.P;
  out.c_hat = c_hat;
  return out;
}

TestResult ks_test(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.size() < 2)
    throw std::invalid_argument("ks_test: need at least two samples");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / dn - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / dn));
  }
  return {d, ks_p_value(d, dn)};
}

TestResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("ks_test_two_sample: need at least two samples each");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, k = 0;
  while (i < a.size() && k < b.size()) {
    const double x = std::min(a[i], b[k]);
    while (i < a.size() && a[i] <= x) ++i;
    while (k < b.size() && b[k] <= x) ++k;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(k) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb))};
}

namespace {

TestResult chi2_from_cells(const std::vector<double>& observed,
                           const std::vector<double>& expected) {
  if (observed.size() < 2)
    throw std::invalid_argument("chi-square: fewer than two cells after pooling");
  double stat = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double diff = observed[c] - expected[c];
    stat += diff * diff / expected[c];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

}  // namespace

TestResult chi2_test(const std::vector<long long>& observed,
                     const std::vector<double>& expected_probs,
                     double min_expected) {
  if (observed.size() != expected_probs.size() || observed.empty())
    throw std::invalid_argument("chi2_test: size mismatch or empty input");
  long long total = 0;
  for (long long o : observed) total += o;
  if (total < 100) throw std::invalid_argument("chi2_test: need >= 100 counts");
  double prob_total = 0.0;
  for (double p : expected_probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("chi2_test: negative probability");
    prob_total += p;
  }
  if (std::abs(prob_total - 1.0) > 1e-6)
    throw std::invalid_argument("chi2_test: probabilities must sum to 1");

  std::vector<double> obs, exp;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double e = static_cast<double>(total) * expected_probs[c];
    if (e < min_expected) {
      pooled_obs += static_cast<double>(observed[c]);
      pooled_exp += e;
    } else {
      obs.push_back(static_cast<double>(observed[c]));
      exp.push_back(e);
    }
  }
  if (pooled_exp > 0.0) {
    obs.push_back(pooled_obs);
    exp.push_back(pooled_exp);
  }
  return chi2_from_cells(obs, exp);
}

TestResult chi2_two_sample(const std::vector<long long>& a,
                           const std::vector<long long>& b,
                           double min_expected) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("chi2_two_sample: size mismatch or empty input");
  double na = 0.0, nb = 0.0;
  for (long long v : a) na += static_cast<double>(v);
  for (long long v : b) nb += static_cast<double>(v);
  if (na < 100 || nb < 100)
    throw std::invalid_argument("chi2_two_sample: need >= 100 counts per sample");
  const double n = na + nb;

  std::vector<double> obs_a, obs_b, exp_a, exp_b;
  double pool_a = 0.0, pool_b = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double cell = static_cast<double>(a[c] + b[c]);
    const double ea = na * cell / n;
    const double eb = nb * cell / n;
    if (std::min(ea, eb) < min_expected) {
      pool_a += static_cast<double>(a[c]);
      pool_b += static_cast<double>(b[c]);
    } else {
      obs_a.push_back(static_cast<double>(a[c]));
      obs_b.push_back(static_cast<double>(b[c]));
      exp_a.push_back(ea);
      exp_b.push_back(eb);
    }
  }
  if (pool_a + pool_b > 0.0) {
    obs_a.push_back(pool_a);
    obs_b.push_back(pool_b);
    exp_a.push_back(na * (pool_a + pool_b) / n);
    exp_b.push_back(nb * (pool_a + pool_b) / n);
  }
  if (obs_a.size() < 2)
    throw std::invalid_argument("chi2_two_sample: fewer than two cells after pooling");
  double stat = 0.0;
  for (std::size_t c = 0; c < obs_a.size(); ++c) {
    const double da = obs_a[c] - exp_a[c];
    const double db = obs_b[c] - exp_b[c];
    stat += da * da / exp_a[c] + db * db / exp_b[c];
  }
  boost::math::chi_squared dist(static_cast<double>(obs_a.size() - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

TestResult two_proportion_test(long long hits_a, long long n_a,
                               long long hits_b, long long n_b) {
  if (n_a < 1 || n_b < 1 || hits_a < 0 || hits_b < 0 || hits_a > n_a ||
      hits_b > n_b)
    throw std::invalid_argument("two_proportion_test: bad counts");
  const double pa = static_cast<double>(hits_a) / static_cast<double>(n_a);
  const double pb = static_cast<double>(hits_b) / static_cast<double>(n_b);
  const double pooled = static_cast<double>(hits_a + hits_b) /
                        static_cast<double>(n_a + n_b);
  const double var = pooled * (1.0 - pooled) *
                     (1.0 / static_cast<double>(n_a) + 1.0 / static_cast<double>(n_b));
  if (var <= 0.0) return {0.0, 1.0};
  const double z = (pa - pb) / std::sqrt(var);
  return {z, std::erfc(std::abs(z) / std::sqrt(2.0))};
}

}  // namespace dipcoal
