#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "dipcoal/rates.hpp"

using namespace dipcoal;

namespace {

const XiMeasure kBeta4 = XiMeasure::beta(4, 1.5);

double lam(const XiMeasure& m, int b, std::vector<int> groups, int s) {
  return rate(m, MergerSpec{b, std::move(groups), s});
}

}  // namespace

TEST_CASE("pair rate equals total mass for normalized measures") {
  const MergerSpec pair{2, {2}, 0};
  CHECK(rate(XiMeasure::kingman(), pair) == 1.0);
  CHECK(rate(kBeta4, pair) == 1.0);
  CHECK(rate(XiMeasure::beta(2, 1.2), pair) == 1.0);
  CHECK(rate(XiMeasure::point_mass(4, 0.5), pair) == 1.0);
  const XiMeasure mix(0.25,
                      {XiComponent{4, 0.5, BetaLaw{1.5}},
                       XiComponent{2, 0.25, PointMassLaw{0.5}}},
                      true);
  CHECK(rate(mix, pair) == 1.0);
  // unnormalized measures scale linearly in the weight
  CHECK(rate(XiMeasure::beta(4, 1.5, 0.5), pair) == doctest::Approx(0.5));
}

TEST_CASE("four-fold Beta rates at alpha 3/2 (dyadic closed forms)") {
  CHECK(lam(kBeta4, 3, {2}, 1) == doctest::Approx(0.9375).epsilon(1e-12));
  CHECK(lam(kBeta4, 3, {3}, 0) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(lam(kBeta4, 4, {2}, 2) == doctest::Approx(0.859375).epsilon(1e-12));
  CHECK(lam(kBeta4, 4, {2, 2}, 0) == doctest::Approx(0.0234375).epsilon(1e-12));
  CHECK(lam(kBeta4, 4, {3}, 1) == doctest::Approx(0.0546875).epsilon(1e-12));
  CHECK(lam(kBeta4, 4, {4}, 0) == doctest::Approx(0.0078125).epsilon(1e-12));
  CHECK(lam(kBeta4, 6, {2, 2, 2}, 0) ==
        doctest::Approx(0.00128173828125).epsilon(1e-12));
}

TEST_CASE("one-fold and point-mass reference values") {
  CHECK(lam(XiMeasure::beta(1, 1.5), 3, {3}, 0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(lam(XiMeasure::point_mass(4, 0.5), 3, {3}, 0) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(lam(XiMeasure::point_mass(4, 0.5), 4, {2, 2}, 0) ==
        doctest::Approx(0.046875).epsilon(1e-12));
}

TEST_CASE("two-fold components cannot merge three groups at once") {
  CHECK(lam(XiMeasure::beta(2, 1.5), 6, {2, 2, 2}, 0) == 0.0);
  CHECK(lam(XiMeasure::beta(2, 1.1), 8, {3, 2, 2}, 1) == 0.0);
  CHECK(lam(kBeta4, 6, {2, 2, 2}, 0) > 0.0);
  // five simultaneous groups exceed even four chromosomes
  CHECK(lam(kBeta4, 10, {2, 2, 2, 2, 2}, 0) == 0.0);
}

TEST_CASE("kingman measure only moves single pairs") {
  CHECK(lam(XiMeasure::kingman(), 5, {2}, 3) == 1.0);
  CHECK(lam(XiMeasure::kingman(), 5, {3}, 2) == 0.0);
  CHECK(lam(XiMeasure::kingman(), 6, {2, 2}, 2) == 0.0);
}

TEST_CASE("closed form agrees with quadrature") {
  const XiMeasure measures[] = {
      XiMeasure::beta(4, 1.33), XiMeasure::beta(2, 1.9),
      XiMeasure::beta(1, 1.5), XiMeasure::point_mass(3, 0.7),
      XiMeasure(0.2,
                {XiComponent{4, 0.3, BetaLaw{1.6}},
                 XiComponent{2, 0.5, PointMassLaw{0.25}}},
                true)};
  for (const auto& m : measures) {
    for (int b = 2; b <= 7; ++b) {
      for (const auto& spec : enumerate_merger_specs(b)) {
        const double closed = rate(m, spec);
        const double quad = rate_quadrature(m, spec);
        CHECK(std::abs(closed - quad) <= 1e-8 * std::max(1.0, closed));
      }
    }
  }
}

TEST_CASE("one-extra-block recursion holds") {
  CHECK(consistency_check(kBeta4, 8) <= 1e-10);
  CHECK(consistency_check(XiMeasure::beta(2, 1.8), 8) <= 1e-10);
  CHECK(consistency_check(XiMeasure::point_mass(4, 0.8), 8) <= 1e-10);
  CHECK(consistency_check(XiMeasure::kingman(), 8) <= 1e-10);
}

TEST_CASE("rate table matches the direct computation") {
  RateTable table(kBeta4, 6);
  for (int b = 2; b <= 6; ++b)
    for (const auto& spec : enumerate_merger_specs(b))
      CHECK(table.lookup(spec) == rate(kBeta4, spec));
  CHECK_THROWS_AS(table.lookup(MergerSpec{7, {2}, 5}), std::out_of_range);
}

TEST_CASE("jump-chain generator rows sum to zero") {
  for (const auto& m : {kBeta4, XiMeasure::kingman()}) {
    const auto q = generator_matrix(m, 4);
    const auto parts = enumerate_partitions(4);
    REQUIRE(q.rows() == static_cast<long>(parts.size()));
    for (long i = 0; i < q.rows(); ++i) {
      CHECK(std::abs(q.row(i).sum()) <= 1e-12);
      for (long j = 0; j < q.cols(); ++j)
        if (i != j) CHECK(q(i, j) >= 0.0);
    }
    // absorbing all-merged row
    CHECK(q.row(q.rows() - 1).cwiseAbs().maxCoeff() == 0.0);
  }
  // the kingman generator leaves all singletons at total rate C(4,2)
  const auto qk = generator_matrix(XiMeasure::kingman(), 4);
  CHECK(qk(0, 0) == doctest::Approx(-6.0));
}
