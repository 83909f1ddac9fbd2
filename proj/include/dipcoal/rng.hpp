#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dipcoal {

// 64-bit mixer; advances x and returns the next word of the sequence.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with explicit substream derivation: the four state words are
// drawn from a splitmix64 sequence seeded with master_seed XOR
// (stream_id * odd_const). Distinct (seed, stream) pairs give distinct,
// reproducible streams, so replicate r always sees stream r no matter how
// replicates are assigned to worker threads.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t master_seed, std::uint64_t stream_id = 0) {
    std::uint64_t x =
        master_seed ^ (stream_id * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL);
    for (auto& w : s_) w = splitmix64(x);
    bool all_zero = true;
    for (auto w : s_) all_zero = all_zero && w == 0;
    if (all_zero) s_[0] = 0x8f1b0f36c2e4a917ULL;  // xoshiro state must be nonzero
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Uniform double in [0, 1), 53-bit resolution.
inline double uniform_double(Xoshiro256& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double strictly inside (0, 1); safe as a log/pow argument.
inline double uniform_open(Xoshiro256& g) {
  return (static_cast<double>(g() >> 12) + 0.5) * 0x1.0p-52;
}

// Uniform integer in [0, n); rejection keeps the draw exactly uniform.
inline std::uint64_t uniform_below(Xoshiro256& g, std::uint64_t n) {
  std::uint64_t x, r;
  do {
    x = g();
    r = x % n;
  } while (x - r > std::uint64_t(0) - n);
  return r;
}

// Exp(1) via inverse CDF; strictly positive.
inline double exponential(Xoshiro256& g) { return -std::log(uniform_open(g)); }

inline std::int64_t binomial(Xoshiro256& g, std::int64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(g);
}

// Continuous Pareto: P(W > w) = (w/scale)^-alpha for w >= scale.
inline double pareto(Xoshiro256& g, double alpha, double scale) {
  return scale * std::pow(uniform_open(g), -1.0 / alpha);
}

// Integer Pareto tail: P(X > k) = (k/xmin)^-alpha for integer k >= xmin.
inline std::int64_t pareto_integer(Xoshiro256& g, double alpha, std::int64_t xmin) {
  double y = static_cast<double>(xmin) * std::pow(uniform_open(g), -1.0 / alpha);
  if (y >= 0x1.0p62) y = 0x1.0p62;  // keeps the ceil inside int64
  return static_cast<std::int64_t>(std::ceil(y));
}

namespace detail {
inline double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}
}  // namespace detail

// Number of marked items in a uniform without-replacement sample of n items
// from a population of m containing K marked ones. Inverse transform walks
// outward from the mode, so expected work is O(sd) and the pmf never has to
// be accumulated from an underflowing tail.
inline std::int64_t hypergeometric(Xoshiro256& g, std::int64_t m, std::int64_t K,
                                   std::int64_t n) {
  if (K < 0 || n < 0 || m < 0 || K > m || n > m)
    throw std::invalid_argument("hypergeometric: bad parameters");
  const std::int64_t lo = std::max<std::int64_t>(0, n + K - m);
  const std::int64_t hi = std::min(n, K);
  if (lo == hi) return lo;

  std::int64_t mode = ((n + 1) * (K + 1)) / (m + 2);
  if (mode < lo) mode = lo;
  if (mode > hi) mode = hi;
  const double lp_mode = detail::log_choose(K, mode) +
                         detail::log_choose(m - K, n - mode) -
                         detail::log_choose(m, n);
  const double p_mode = std::exp(lp_mode);

  const double u = uniform_double(g);
  double acc = p_mode;
  if (u < acc) return mode;
  double pl = p_mode, pr = p_mode;
  std::int64_t l = mode, r = mode;
  while (l > lo || r < hi) {
    if (r < hi) {
      const double num = static_cast<double>(K - r) * static_cast<double>(n - r);
      const double den = static_cast<double>(r + 1) *
                         static_cast<double>(m - K - n + r + 1);
      pr *= num / den;
      ++r;
      acc += pr;
      if (u < acc) return r;
    }
    if (l > lo) {
      const double num = static_cast<double>(l) * static_cast<double>(m - K - n + l);
      const double den = static_cast<double>(K - l + 1) *
                         static_cast<double>(n - l + 1);
      pl *= num / den;
      --l;
      acc += pl;
      if (u < acc) return l;
    }
  }
  return r;  // u landed in the pmf's rounding slack; hi-side value is valid
}

// Walker alias table: O(n) build, O(1) draws from a fixed weight vector.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) { reset(weights); }
  AliasTable() = default;

  void reset(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0 || !std::isfinite(w))
        throw std::invalid_argument("AliasTable: weights must be finite and >= 0");
      total += w;
    }
    if (n == 0 || total <= 0.0)
      throw std::invalid_argument("AliasTable: total weight must be positive");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<std::uint32_t> small, large;
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;
  }

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(Xoshiro256& g) const {
    const std::size_t i =
        static_cast<std::size_t>(uniform_below(g, prob_.size()));
    return uniform_double(g) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace dipcoal
