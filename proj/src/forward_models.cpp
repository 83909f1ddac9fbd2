#include "dipcoal/forward_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <boost/math/special_functions/zeta.hpp>

namespace dipcoal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t pack_pair(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
         static_cast<std::uint32_t>(j);
}

void check_probs(const std::vector<double>& probs, const char* what) {
  if (probs.empty())
    throw std::invalid_argument(std::string(what) + ": empty support");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument(std::string(what) +
                                  ": probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) +
                                ": probabilities must sum to 1");
}

void check_fitness(const FitnessLaw& law) {
  if (const auto* pm = std::get_if<PointMassFitness>(&law)) {
    if (!(pm->value > 0.0) || !std::isfinite(pm->value))
      throw std::invalid_argument("fitness point mass must be positive");
  } else if (const auto* pa = std::get_if<ParetoFitness>(&law)) {
    if (!(pa->alpha > 1.0) || !(pa->alpha < 2.0))
      throw std::invalid_argument("fitness tail exponent must lie in (1, 2)");
    if (!(pa->scale > 0.0) || !std::isfinite(pa->scale))
      throw std::invalid_argument("fitness scale must be positive");
  } else {
    const auto& tab = std::get<TabulatedFitness>(law);
    if (tab.values.size() != tab.probs.size())
      throw std::invalid_argument("tabulated fitness: values/probs size mismatch");
    check_probs(tab.probs, "tabulated fitness");
    bool positive_possible = false;
    for (std::size_t k = 0; k < tab.values.size(); ++k) {
      if (!(tab.values[k] >= 0.0) || !std::isfinite(tab.values[k]))
        throw std::invalid_argument("tabulated fitness: values must be finite and >= 0");
      positive_possible = positive_possible || (tab.values[k] > 0.0 && tab.probs[k] > 0.0);
    }
    if (!positive_possible)
      throw std::invalid_argument("tabulated fitness: no positive value has positive probability");
  }
}

void check_juveniles(const JuvenileLaw& law) {
  if (const auto* c = std::get_if<ConstJuveniles>(&law)) {
    if (c->value < 1)
      throw std::invalid_argument("juvenile count must be >= 1");
  } else if (const auto* pa = std::get_if<ParetoJuveniles>(&law)) {
    if (!(pa->alpha > 1.0) || !(pa->alpha < 2.0))
      throw std::invalid_argument("juvenile tail exponent must lie in (1, 2)");
    if (!(pa->scale > 0.0) || !std::isfinite(pa->scale))
      throw std::invalid_argument("juvenile scale must be positive");
  } else {
    const auto& tab = std::get<TabulatedJuveniles>(law);
    if (tab.values.size() != tab.probs.size())
      throw std::invalid_argument("tabulated juveniles: values/probs size mismatch");
    check_probs(tab.probs, "tabulated juveniles");
    for (long long v : tab.values)
      if (v < 1)
        throw std::invalid_argument("tabulated juveniles: values must be >= 1");
  }
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Nearest index with positive weight, excluding `skip`; callers guarantee at
// least two positive weights exist, so this only untangles fp boundary slack.
int nearest_positive(const std::vector<double>& w, int from, int skip) {
  const int n = static_cast<int>(w.size());
  for (int d = 0; d < n; ++d) {
    for (int cand : {from - d, from + d}) {
      if (cand >= 0 && cand < n && cand != skip && w[static_cast<std::size_t>(cand)] > 0.0)
        return cand;
    }
  }
  throw std::logic_error("nearest_positive: no positive weight found");
}

// Draws one generation of fitness weights; returns how many are positive.
int fill_fitness_weights(const FitnessLaw& law,
                         const std::optional<AliasTable>& value_table,
                         std::vector<double>& out, Xoshiro256& rng) {
  if (const auto* pm = std::get_if<PointMassFitness>(&law)) {
    std::fill(out.begin(), out.end(), pm->value);
    return static_cast<int>(out.size());
  }
  int positive = 0;
  if (const auto* pa = std::get_if<ParetoFitness>(&law)) {
    for (auto& w : out) {
      w = pareto(rng, pa->alpha, pa->scale);
      if (w > 0.0) ++positive;
    }
  } else {
    const auto& tab = std::get<TabulatedFitness>(law);
    for (auto& w : out) {
      w = tab.values[value_table->sample(rng)];
      if (w > 0.0) ++positive;
    }
  }
  return positive;
}

// Ordered parent pair (i != j) with probability W_i W_j / (S^2 - sum W_k^2).
// Alias sampling with rejection on i == j; when one weight dominates and
// rejections pile up, falls back to exact inversion (first parent has marginal
// W_i (S - W_i), second is W_j over j != i).  cdfs_ready marks whether the
// fallback's prefix sums are valid for the current weights.
std::pair<int, int> draw_fitness_pair(const std::vector<double>& weights,
                                      double total, const AliasTable& table,
                                      std::vector<double>& weight_cdf,
                                      std::vector<double>& pair_cdf,
                                      bool& cdfs_ready, Xoshiro256& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const int a = static_cast<int>(table.sample(rng));
    const int b = static_cast<int>(table.sample(rng));
    if (a != b) return {a, b};
  }
  const auto un = weights.size();
  if (!cdfs_ready) {
    weight_cdf.resize(un);
    pair_cdf.resize(un);
    double acc_w = 0.0, acc_p = 0.0;
    for (std::size_t k = 0; k < un; ++k) {
      acc_w += weights[k];
      acc_p += weights[k] * (total - weights[k]);
      weight_cdf[k] = acc_w;
      pair_cdf[k] = acc_p;
    }
    cdfs_ready = true;
  }
  const double x = uniform_double(rng) * pair_cdf.back();
  auto it = std::upper_bound(pair_cdf.begin(), pair_cdf.end(), x);
  int i = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(it - pair_cdf.begin()), un - 1));
  if (weights[static_cast<std::size_t>(i)] <= 0.0) i = nearest_positive(weights, i, -1);
  const double wi = weights[static_cast<std::size_t>(i)];
  const double before_i = i > 0 ? weight_cdf[static_cast<std::size_t>(i - 1)] : 0.0;
  double y = uniform_double(rng) * (total - wi);
  if (y >= before_i) y += wi;  // skip i's own segment of the weight cdf
  auto jt = std::upper_bound(weight_cdf.begin(), weight_cdf.end(), y);
  int j = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(jt - weight_cdf.begin()), un - 1));
  if (j == i || weights[static_cast<std::size_t>(j)] <= 0.0)
    j = nearest_positive(weights, j, i);
  return {i, j};
}

}  // namespace

long long OffspringMatrix::total_children() const {
  long long total = 0;
  for (const auto& e : entries) total += e.count;
  return total;
}

void validate(const OffspringMatrix& m) {
  if (m.n_pop < 2)
    throw std::invalid_argument("offspring matrix: population must be >= 2");
  long long total = 0;
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& e : m.entries) {
    if (e.i < 0 || e.j >= m.n_pop)
      throw std::invalid_argument("offspring matrix: parent index out of range");
    if (e.i >= e.j)
      throw std::invalid_argument("offspring matrix: entries need i < j");
    if (e.count < 1)
      throw std::invalid_argument("offspring matrix: counts must be >= 1");
    const std::uint64_t code = pack_pair(e.i, e.j);
    if (!first && code <= prev)
      throw std::invalid_argument("offspring matrix: entries must be sorted by (i, j)");
    prev = code;
    first = false;
    total += e.count;
  }
  if (total != m.n_pop)
    throw std::invalid_argument("offspring matrix: children must sum to the population size");
}

std::vector<long long> individual_totals(const OffspringMatrix& m) {
  std::vector<long long> totals(static_cast<std::size_t>(m.n_pop), 0);
  for (const auto& e : m.entries) {
    totals[static_cast<std::size_t>(e.i)] += e.count;
    totals[static_cast<std::size_t>(e.j)] += e.count;
  }
  return totals;
}

double fitness_mean(const FitnessLaw& law) {
  if (const auto* pm = std::get_if<PointMassFitness>(&law)) return pm->value;
  if (const auto* pa = std::get_if<ParetoFitness>(&law))
    return pa->alpha * pa->scale / (pa->alpha - 1.0);
  const auto& tab = std::get<TabulatedFitness>(law);
  double mean = 0.0;
  for (std::size_t k = 0; k < tab.values.size(); ++k)
    mean += tab.values[k] * tab.probs[k];
  return mean;
}

double fitness_second_moment(const FitnessLaw& law) {
  if (const auto* pm = std::get_if<PointMassFitness>(&law))
    return pm->value * pm->value;
  if (std::holds_alternative<ParetoFitness>(law)) return kInf;
  const auto& tab = std::get<TabulatedFitness>(law);
  double m2 = 0.0;
  for (std::size_t k = 0; k < tab.values.size(); ++k)
    m2 += tab.values[k] * tab.values[k] * tab.probs[k];
  return m2;
}

double juvenile_mean(const JuvenileLaw& law) {
  if (const auto* c = std::get_if<ConstJuveniles>(&law))
    return static_cast<double>(c->value);
  if (const auto* pa = std::get_if<ParetoJuveniles>(&law)) {
    // E[X] = sum_{k>=0} P(X > k); the tail is exact from k0 = ceil(scale) on.
    const auto k0 = std::max<long long>(1, static_cast<long long>(std::ceil(pa->scale)));
    double head = static_cast<double>(k0);
    double partial = 0.0;
    for (long long k = 1; k < k0; ++k)
      partial += std::pow(static_cast<double>(k), -pa->alpha);
    return head + std::pow(pa->scale, pa->alpha) *
                      (boost::math::zeta(pa->alpha) - partial);
  }
  const auto& tab = std::get<TabulatedJuveniles>(law);
  double mean = 0.0;
  for (std::size_t k = 0; k < tab.values.size(); ++k)
    mean += static_cast<double>(tab.values[k]) * tab.probs[k];
  return mean;
}

double juvenile_second_factorial_moment(const JuvenileLaw& law) {
  if (const auto* c = std::get_if<ConstJuveniles>(&law))
    return static_cast<double>(c->value) * static_cast<double>(c->value - 1);
  if (std::holds_alternative<ParetoJuveniles>(law)) return kInf;
  const auto& tab = std::get<TabulatedJuveniles>(law);
  double m = 0.0;
  for (std::size_t k = 0; k < tab.values.size(); ++k)
    m += static_cast<double>(tab.values[k]) *
         static_cast<double>(tab.values[k] - 1) * tab.probs[k];
  return m;
}

int population_size(const ModelConfig& config) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedCouples>)
          return 2 * m.n_couples;
        else
          return m.n_pop;
      },
      config);
}

void validate(const ModelConfig& config) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WrightFisher>) {
          if (m.n_pop < 2)
            throw std::invalid_argument("wright-fisher: population must be >= 2");
        } else if constexpr (std::is_same_v<T, RandomFitness>) {
          if (m.n_pop < 2)
            throw std::invalid_argument("random-fitness: population must be >= 2");
          if (m.resample_cap < 1)
            throw std::invalid_argument("random-fitness: resample cap must be >= 1");
          check_fitness(m.fitness);
        } else if constexpr (std::is_same_v<T, GaltonWatsonSampling>) {
          if (m.n_pop < 2)
            throw std::invalid_argument("gw-sampling: population must be >= 2");
          if (!(m.activity_rate > 0.0) || !std::isfinite(m.activity_rate))
            throw std::invalid_argument("gw-sampling: activity rate must be positive");
          if (m.activity_rate > static_cast<double>(m.n_pop))
            throw std::invalid_argument(
                "gw-sampling: activity rate exceeds the population size");
          if (m.resample_cap < 1)
            throw std::invalid_argument("gw-sampling: resample cap must be >= 1");
          check_juveniles(m.juveniles);
          if (!(juvenile_mean(m.juveniles) * m.activity_rate > 2.0))
            throw std::invalid_argument(
                "gw-sampling: mean juveniles per pair times activity rate must exceed 2");
        } else if constexpr (std::is_same_v<T, FixedCouples>) {
          if (m.n_couples < 1)
            throw std::invalid_argument("fixed-couples: need at least one couple");
        } else if constexpr (std::is_same_v<T, LargeFamily>) {
          if (m.n_pop < 4)
            throw std::invalid_argument("large-family: population must be >= 4");
          if (!(m.psi > 0.0) || !(m.psi < 1.0))
            throw std::invalid_argument("large-family: psi must lie in (0, 1)");
          if (!(m.gamma > 0.0) || !std::isfinite(m.gamma))
            throw std::invalid_argument("large-family: gamma must be positive");
        }
      },
      config);
}

std::string model_id(const ModelConfig& config) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WrightFisher>) {
          out << "wright-fisher(N=" << m.n_pop << ")";
        } else if constexpr (std::is_same_v<T, RandomFitness>) {
          out << "random-fitness(N=" << m.n_pop << ",";
          if (const auto* pm = std::get_if<PointMassFitness>(&m.fitness))
            out << "const(" << pm->value << ")";
          else if (const auto* pa = std::get_if<ParetoFitness>(&m.fitness))
            out << "pareto(a=" << pa->alpha << ",s=" << pa->scale << ")";
          else
            out << "tab(" << std::get<TabulatedFitness>(m.fitness).values.size()
                << ")";
          out << ")";
        } else if constexpr (std::is_same_v<T, GaltonWatsonSampling>) {
          out << "gw-sampling(N=" << m.n_pop << ",c1=" << m.activity_rate << ",";
          if (const auto* c = std::get_if<ConstJuveniles>(&m.juveniles))
            out << "const(" << c->value << ")";
          else if (const auto* pa = std::get_if<ParetoJuveniles>(&m.juveniles))
            out << "pareto(a=" << pa->alpha << ",s=" << pa->scale << ")";
          else
            out << "tab(" << std::get<TabulatedJuveniles>(m.juveniles).values.size()
                << ")";
          out << ")";
        } else if constexpr (std::is_same_v<T, FixedCouples>) {
          out << "fixed-couples(M=" << m.n_couples << ")";
        } else if constexpr (std::is_same_v<T, LargeFamily>) {
          out << "large-family(N=" << m.n_pop << ",psi=" << m.psi
              << ",gamma=" << m.gamma << ")";
        }
      },
      config);
  return out.str();
}

OffspringSampler::OffspringSampler(ModelConfig config) : config_(std::move(config)) {
  validate(config_);
  if (const auto* rf = std::get_if<RandomFitness>(&config_)) {
    if (const auto* tab = std::get_if<TabulatedFitness>(&rf->fitness))
      fitness_table_.emplace(tab->probs);
  } else if (const auto* gw = std::get_if<GaltonWatsonSampling>(&config_)) {
    if (const auto* tab = std::get_if<TabulatedJuveniles>(&gw->juveniles))
      juvenile_table_.emplace(tab->probs);
  }
}

OffspringMatrix OffspringSampler::collect_codes(int n_pop) {
  std::sort(codes_.begin(), codes_.end());
  OffspringMatrix m;
  m.n_pop = n_pop;
  for (std::size_t k = 0; k < codes_.size();) {
    std::size_t r = k;
    while (r < codes_.size() && codes_[r] == codes_[k]) ++r;
    m.entries.push_back({static_cast<int>(codes_[k] >> 32),
                         static_cast<int>(codes_[k] & 0xffffffffULL),
                         static_cast<long long>(r - k)});
    k = r;
  }
  return m;
}

OffspringMatrix OffspringSampler::sample_wright_fisher(int n, Xoshiro256& rng) {
  codes_.clear();
  const auto un = static_cast<std::uint64_t>(n);
  for (int child = 0; child < n; ++child) {
    const auto i = uniform_below(rng, un);
    std::uint64_t j;
    do {
      j = uniform_below(rng, un);
    } while (j == i);
    codes_.push_back(pack_pair(static_cast<int>(i), static_cast<int>(j)));
  }
  return collect_codes(n);
}

OffspringMatrix OffspringSampler::sample_random_fitness(const RandomFitness& m,
                                                        Xoshiro256& rng) {
  const int n = m.n_pop;
  weights_.resize(static_cast<std::size_t>(n));

  const bool constant_weights = std::holds_alternative<PointMassFitness>(m.fitness);
  int attempts = 0;
  while (fill_fitness_weights(m.fitness, fitness_table_, weights_, rng) < 2) {
    ++resamples_;  // pair weight mass is zero otherwise
    if (++attempts > m.resample_cap)
      throw std::runtime_error(
          "random-fitness: fitness resample cap exceeded (all weights zero)");
  }

  if (!constant_weights || !parent_table_ready_) {
    parent_table_.reset(weights_);
    parent_table_ready_ = constant_weights;
  }

  double total = 0.0;
  for (double w : weights_) total += w;

  bool cdfs_ready = false;
  codes_.clear();
  for (int child = 0; child < n; ++child) {
    const auto [i, j] = draw_fitness_pair(weights_, total, parent_table_,
                                          weight_cdf_, pair_cdf_, cdfs_ready, rng);
    codes_.push_back(pack_pair(i, j));
  }
  return collect_codes(n);
}

OffspringMatrix OffspringSampler::sample_gw(const GaltonWatsonSampling& m,
                                            Xoshiro256& rng) {
  const int n = m.n_pop;
  const auto total_pairs = static_cast<std::uint64_t>(n) *
                           static_cast<std::uint64_t>(n - 1) / 2;
  const double p = m.activity_rate / static_cast<double>(n);

  int attempts = 0;
  for (;;) {
    const auto k_active = static_cast<std::uint64_t>(
        binomial(rng, static_cast<std::int64_t>(total_pairs), p));

    // Floyd's sampler: k_active distinct pair codes, uniform over all pairs.
    active_codes_.clear();
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(k_active) * 2);
    for (std::uint64_t t = total_pairs - k_active; t < total_pairs; ++t) {
      const std::uint64_t r = uniform_below(rng, t + 1);
      const std::uint64_t pick = seen.insert(r).second ? r : t;
      if (pick != r) seen.insert(pick);
      active_codes_.push_back(pick);
    }
    std::sort(active_codes_.begin(), active_codes_.end());

    juvenile_counts_.resize(active_codes_.size());
    long long s_total = 0;
    for (auto& x : juvenile_counts_) {
      if (const auto* c = std::get_if<ConstJuveniles>(&m.juveniles)) {
        x = c->value;
      } else if (const auto* pa = std::get_if<ParetoJuveniles>(&m.juveniles)) {
        double y = pa->scale * std::pow(uniform_open(rng), -1.0 / pa->alpha);
        if (y >= 0x1.0p62) y = 0x1.0p62;
        x = static_cast<long long>(std::ceil(y));
      } else {
        x = std::get<TabulatedJuveniles>(m.juveniles)
                .values[juvenile_table_->sample(rng)];
      }
      s_total += x;
    }
    if (s_total >= n) {
      // Multivariate hypergeometric split of the n survivors over active
      // pairs, realized by one conditional draw per pair in sorted order.
      codes_.clear();
      OffspringMatrix out;
      out.n_pop = n;
      long long remaining = n;
      long long pool = s_total;
      for (std::size_t k = 0; k < active_codes_.size() && remaining > 0; ++k) {
        const long long x = juvenile_counts_[k];
        const long long v = hypergeometric(rng, pool, x, remaining);
        pool -= x;
        remaining -= v;
        if (v > 0) {
          // decode m = b(b-1)/2 + a with a < b
          const std::uint64_t code = active_codes_[k];
          auto b = static_cast<std::uint64_t>(
              (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(code))) / 2.0);
          while (b * (b - 1) / 2 > code) --b;
          while ((b + 1) * b / 2 <= code) ++b;
          const auto a = code - b * (b - 1) / 2;
          out.entries.push_back({static_cast<int>(a), static_cast<int>(b), v});
        }
      }
      // triangular code order sorts by the larger parent; the matrix
      // invariant wants (i, j) lexicographic
      std::sort(out.entries.begin(), out.entries.end(),
                [](const OffspringEntry& l, const OffspringEntry& r) {
                  return l.i != r.i ? l.i < r.i : l.j < r.j;
                });
      return out;
    }
    ++resamples_;
    if (++attempts > m.resample_cap)
      throw std::runtime_error(
          "gw-sampling: juvenile pool resample cap exceeded (S_N < N persists)");
  }
}

OffspringMatrix OffspringSampler::sample_fixed_couples(const FixedCouples& m,
                                                       Xoshiro256& rng) {
  const int pop = 2 * m.n_couples;
  matching_.resize(static_cast<std::size_t>(pop));
  for (int i = 0; i < pop; ++i) matching_[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < pop - 1; ++i) {
    const auto j = i + static_cast<int>(uniform_below(
                           rng, static_cast<std::uint64_t>(pop - i)));
    std::swap(matching_[static_cast<std::size_t>(i)],
              matching_[static_cast<std::size_t>(j)]);
  }
  active_codes_.resize(static_cast<std::size_t>(m.n_couples));
  for (int c = 0; c < m.n_couples; ++c)
    active_codes_[static_cast<std::size_t>(c)] =
        pack_pair(matching_[static_cast<std::size_t>(2 * c)],
                  matching_[static_cast<std::size_t>(2 * c + 1)]);

  codes_.clear();
  const auto n_couples = static_cast<std::uint64_t>(m.n_couples);
  for (int child = 0; child < pop; ++child)
    codes_.push_back(active_codes_[uniform_below(rng, n_couples)]);
  return collect_codes(pop);
}

OffspringMatrix OffspringSampler::sample_large_family(const LargeFamily& m,
                                                      Xoshiro256& rng) {
  const int n = m.n_pop;
  const double q = std::pow(static_cast<double>(n), -m.gamma);
  if (uniform_double(rng) >= q) return sample_wright_fisher(n, rng);

  const auto un = static_cast<std::uint64_t>(n);
  const auto i = uniform_below(rng, un);
  std::uint64_t j;
  do {
    j = uniform_below(rng, un);
  } while (j == i);

  const auto family = static_cast<long long>(m.psi * n);
  codes_.clear();
  const std::uint64_t family_code = pack_pair(static_cast<int>(i), static_cast<int>(j));
  for (long long c = 0; c < family; ++c) codes_.push_back(family_code);
  for (long long c = family; c < n; ++c) {
    std::uint64_t a, b;
    do {
      a = uniform_below(rng, un);
    } while (a == i || a == j);
    do {
      b = uniform_below(rng, un);
    } while (b == i || b == j || b == a);
    codes_.push_back(pack_pair(static_cast<int>(a), static_cast<int>(b)));
  }
  return collect_codes(n);
}

OffspringMatrix OffspringSampler::sample(Xoshiro256& rng) {
  return std::visit(
      [this, &rng](const auto& m) -> OffspringMatrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WrightFisher>)
          return sample_wright_fisher(m.n_pop, rng);
        else if constexpr (std::is_same_v<T, RandomFitness>)
          return sample_random_fitness(m, rng);
        else if constexpr (std::is_same_v<T, GaltonWatsonSampling>)
          return sample_gw(m, rng);
        else if constexpr (std::is_same_v<T, FixedCouples>)
          return sample_fixed_couples(m, rng);
        else
          return sample_large_family(m, rng);
      },
      config_);
}

OffspringMatrix sample_offspring(const ModelConfig& config, Xoshiro256& rng) {
  OffspringSampler sampler(config);
  return sampler.sample(rng);
}

CoupleSampler::CoupleSampler(ModelConfig config) : config_(std::move(config)) {
  validate(config_);
  if (const auto* rf = std::get_if<RandomFitness>(&config_)) {
    if (const auto* tab = std::get_if<TabulatedFitness>(&rf->fitness))
      fitness_table_.emplace(tab->probs);
    weights_.resize(static_cast<std::size_t>(rf->n_pop));
  } else if (const auto* gw = std::get_if<GaltonWatsonSampling>(&config_)) {
    if (const auto* tab = std::get_if<TabulatedJuveniles>(&gw->juveniles)) {
      juvenile_table_.emplace(tab->probs);
    } else if (const auto* pa = std::get_if<ParetoJuveniles>(&gw->juveniles)) {
      // Exact body/tail split: tabulate P(X = k) for the first 64 support
      // points, put the remaining tail mass in one final bucket, and draw the
      // tail by the Pareto memoryless property.  Saves a pow() per juvenile.
      const auto k_lo = static_cast<long long>(std::floor(pa->scale)) + 1;
      const long long k_hi = k_lo + 63;
      auto survival = [&](long long k) {
        return k <= pa->scale
                   ? 1.0
                   : std::pow(pa->scale / static_cast<double>(k), pa->alpha);
      };
      std::vector<double> probs;
      for (long long k = k_lo; k <= k_hi; ++k) {
        juvenile_body_values_.push_back(k);
        probs.push_back(survival(k - 1) - survival(k));
      }
      probs.push_back(survival(k_hi));
      juvenile_body_.emplace(probs);
      juvenile_tail_at_ = static_cast<double>(k_hi);
    }
  }
}

std::pair<int, int> CoupleSampler::fresh_pair_label(int n, Xoshiro256& rng) {
  const auto un = static_cast<std::uint64_t>(n);
  for (;;) {
    const auto i = static_cast<int>(uniform_below(rng, un));
    int j;
    do {
      j = static_cast<int>(uniform_below(rng, un));
    } while (j == i);
    const std::pair<int, int> label{std::min(i, j), std::max(i, j)};
    if (std::find(labels_.begin(), labels_.end(), label) == labels_.end()) {
      labels_.push_back(label);
      return label;
    }
  }
}

void CoupleSampler::sample_wright_fisher(int count, int n, Xoshiro256& rng) {
  const auto un = static_cast<std::uint64_t>(n);
  for (int t = 0; t < count; ++t) {
    const auto i = static_cast<int>(uniform_below(rng, un));
    int j;
    do {
      j = static_cast<int>(uniform_below(rng, un));
    } while (j == i);
    couples_.emplace_back(std::min(i, j), std::max(i, j));
  }
}

void CoupleSampler::sample_random_fitness(int count, const RandomFitness& m,
                                          Xoshiro256& rng) {
  const bool constant_weights = std::holds_alternative<PointMassFitness>(m.fitness);
  int attempts = 0;
  while (fill_fitness_weights(m.fitness, fitness_table_, weights_, rng) < 2) {
    ++resamples_;
    if (++attempts > m.resample_cap)
      throw std::runtime_error(
          "random-fitness: fitness resample cap exceeded (all weights zero)");
  }
  if (!constant_weights || !parent_table_ready_) {
    parent_table_.reset(weights_);
    parent_table_ready_ = constant_weights;
  }
  double total = 0.0;
  for (double w : weights_) total += w;
  bool cdfs_ready = false;
  for (int t = 0; t < count; ++t) {
    const auto [i, j] = draw_fitness_pair(weights_, total, parent_table_,
                                          weight_cdf_, pair_cdf_, cdfs_ready, rng);
    couples_.emplace_back(std::min(i, j), std::max(i, j));
  }
}

void CoupleSampler::sample_gw(int count, const GaltonWatsonSampling& m,
                              Xoshiro256& rng) {
  const int n = m.n_pop;
  const auto total_pairs = static_cast<std::uint64_t>(n) *
                           static_cast<std::uint64_t>(n - 1) / 2;
  const double p = m.activity_rate / static_cast<double>(n);

  int attempts = 0;
  for (;;) {
    const auto k_active =
        binomial(rng, static_cast<std::int64_t>(total_pairs), p);
    pool_prefix_.resize(static_cast<std::size_t>(k_active));
    long long pool = 0;
    for (auto& cum : pool_prefix_) {
      long long x;
      if (const auto* c = std::get_if<ConstJuveniles>(&m.juveniles)) {
        x = c->value;
      } else if (std::holds_alternative<ParetoJuveniles>(m.juveniles)) {
        const auto idx = juvenile_body_->sample(rng);
        if (idx < juvenile_body_values_.size()) {
          x = juvenile_body_values_[idx];
        } else {
          const double alpha = std::get<ParetoJuveniles>(m.juveniles).alpha;
          double y = juvenile_tail_at_ * std::pow(uniform_open(rng), -1.0 / alpha);
          if (y >= 0x1.0p62) y = 0x1.0p62;
          x = static_cast<long long>(std::ceil(y));
        }
      } else {
        x = std::get<TabulatedJuveniles>(m.juveniles)
                .values[juvenile_table_->sample(rng)];
      }
      pool += x;
      if (pool >= (1LL << 61))
        throw std::runtime_error("gw-sampling: juvenile pool overflow");
      cum = pool;
    }

    if (pool >= n) {
      draw_codes_.clear();
      for (int t = 0; t < count; ++t) {
        long long u;
        do {
          u = static_cast<long long>(
              uniform_below(rng, static_cast<std::uint64_t>(pool)));
        } while (std::find(draw_codes_.begin(), draw_codes_.end(), u) !=
                 draw_codes_.end());
        draw_codes_.push_back(u);
      }
      pool_slot_.clear();
      for (int t = 0; t < count; ++t) {
        const auto slot = static_cast<long long>(
            std::upper_bound(pool_prefix_.begin(), pool_prefix_.end(),
                             draw_codes_[static_cast<std::size_t>(t)]) -
            pool_prefix_.begin());
        // same active pair seen before -> same couple label
        std::size_t k = 0;
        while (k < pool_slot_.size() && pool_slot_[k] != slot) ++k;
        if (k == pool_slot_.size()) {
          pool_slot_.push_back(slot);
          fresh_pair_label(n, rng);
        }
        couples_.push_back(labels_[k]);
      }
      return;
    }
    ++resamples_;
    if (++attempts > m.resample_cap)
      throw std::runtime_error(
          "gw-sampling: juvenile pool resample cap exceeded (S_N < N persists)");
  }
}

void CoupleSampler::sample_fixed_couples(int count, const FixedCouples& m,
                                         Xoshiro256& rng) {
  const int pop = 2 * m.n_couples;
  const auto un = static_cast<std::uint64_t>(pop);
  pool_slot_.clear();   // couple indices seen this call
  draw_codes_.clear();  // individuals already placed into couples
  for (int t = 0; t < count; ++t) {
    const auto couple = static_cast<long long>(
        uniform_below(rng, static_cast<std::uint64_t>(m.n_couples)));
    std::size_t k = 0;
    while (k < pool_slot_.size() && pool_slot_[k] != couple) ++k;
    if (k == pool_slot_.size()) {
      pool_slot_.push_back(couple);
      // marginal of a uniform perfect matching: two fresh distinct members
      int member[2];
      for (int& v : member) {
        long long cand;
        do {
          cand = static_cast<long long>(uniform_below(rng, un));
        } while (std::find(draw_codes_.begin(), draw_codes_.end(), cand) !=
                 draw_codes_.end());
        draw_codes_.push_back(cand);
        v = static_cast<int>(cand);
      }
      labels_.emplace_back(std::min(member[0], member[1]),
                           std::max(member[0], member[1]));
    }
    couples_.push_back(labels_[k]);
  }
}

void CoupleSampler::sample_large_family(int count, const LargeFamily& m,
                                        Xoshiro256& rng) {
  const int n = m.n_pop;
  const double q = std::pow(static_cast<double>(n), -m.gamma);
  if (uniform_double(rng) >= q) {
    sample_wright_fisher(count, n, rng);
    return;
  }
  const auto un = static_cast<std::uint64_t>(n);
  const auto i = static_cast<int>(uniform_below(rng, un));
  int j;
  do {
    j = static_cast<int>(uniform_below(rng, un));
  } while (j == i);
  const std::pair<int, int> family{std::min(i, j), std::max(i, j)};

  long long family_left = static_cast<long long>(m.psi * n);
  long long total_left = n;
  for (int t = 0; t < count; ++t) {
    if (static_cast<long long>(uniform_below(
            rng, static_cast<std::uint64_t>(total_left))) < family_left) {
      couples_.push_back(family);
      --family_left;
    } else {
      int a, b;
      do {
        a = static_cast<int>(uniform_below(rng, un));
      } while (a == i || a == j);
      do {
        b = static_cast<int>(uniform_below(rng, un));
      } while (b == i || b == j || b == a);
      couples_.emplace_back(std::min(a, b), std::max(a, b));
    }
    --total_left;
  }
}

const std::vector<std::pair<int, int>>& CoupleSampler::sample(int count,
                                                              Xoshiro256& rng) {
  if (count < 0 || count > population_size(config_))
    throw std::invalid_argument(
        "CoupleSampler: tracked children exceed the population size");
  couples_.clear();
  labels_.clear();
  std::visit(
      [this, count, &rng](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WrightFisher>)
          sample_wright_fisher(count, m.n_pop, rng);
        else if constexpr (std::is_same_v<T, RandomFitness>)
          sample_random_fitness(count, m, rng);
        else if constexpr (std::is_same_v<T, GaltonWatsonSampling>)
          sample_gw(count, m, rng);
        else if constexpr (std::is_same_v<T, FixedCouples>)
          sample_fixed_couples(count, m, rng);
        else
          sample_large_family(count, m, rng);
      },
      config_);
  return couples_;
}

std::optional<double> pair_coalescence_prob(const ModelConfig& config) {
  validate(config);
  if (const auto* wf = std::get_if<WrightFisher>(&config))
    return 0.5 / static_cast<double>(wf->n_pop);
  if (const auto* fc = std::get_if<FixedCouples>(&config)) {
    // Couple counts are symmetric-multinomial: E[(V~_1)_2] = (2M)(2M-1)/M^2,
    // and the pair-coalescence scale is E[(V~_1)_2] / (8 (2M - 1)).
    const double m = fc->n_couples;
    return 0.25 / m;
  }
  if (const auto* lf = std::get_if<LargeFamily>(&config)) {
    const double n = lf->n_pop;
    const double q = std::pow(n, -lf->gamma);
    const auto family = static_cast<long long>(lf->psi * lf->n_pop);
    const double psi_n = static_cast<double>(family);
    const double rest = n - psi_n;
    const double fertile =
        psi_n * (psi_n - 1.0) / (4.0 * n * (n - 1.0)) +
        rest * (rest - 1.0) / (2.0 * (n - 2.0) * n * (n - 1.0));
    return q * fertile + (1.0 - q) * 0.5 / n;
  }
  return std::nullopt;
}

std::optional<CnAsymptote> predicted_cn_asymptote(const ModelConfig& config) {
  validate(config);
  if (const auto* rf = std::get_if<RandomFitness>(&config)) {
    if (const auto* pa = std::get_if<ParetoFitness>(&rf->fitness)) {
      const double alpha = pa->alpha;
      const double c_w = std::pow(pa->scale, alpha);
      const double mu_w = fitness_mean(rf->fitness);
      const double constant = c_w * std::pow(2.0 / mu_w, alpha) * alpha *
                              std::exp(std::lgamma(2.0 - alpha) +
                                       std::lgamma(alpha)) /
                              8.0;
      return CnAsymptote{1.0 - alpha, constant};
    }
    const double mu = fitness_mean(rf->fitness);
    const double m2 = fitness_second_moment(rf->fitness);
    if (!(mu > 0.0)) return std::nullopt;
    return CnAsymptote{-1.0, m2 / (2.0 * mu * mu)};
  }
  if (const auto* gw = std::get_if<GaltonWatsonSampling>(&config)) {
    const double mu_x = juvenile_mean(gw->juveniles);
    if (const auto* pa = std::get_if<ParetoJuveniles>(&gw->juveniles)) {
      const double alpha = pa->alpha;
      const double c_x2 = std::pow(pa->scale, alpha);
      const double mu = gw->activity_rate * mu_x / 2.0;
      const double constant = gw->activity_rate * c_x2 * alpha *
                              std::pow(mu, -alpha) *
                              std::exp(log_beta(2.0 - alpha, alpha)) / 8.0;
      return CnAsymptote{1.0 - alpha, constant};
    }
    const double m2f = juvenile_second_factorial_moment(gw->juveniles);
    return CnAsymptote{-1.0,
                       0.5 * (m2f / (gw->activity_rate * mu_x * mu_x) + 1.0)};
  }
  return std::nullopt;
}

}  // namespace dipcoal
