#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salign/analytic.hpp"
#include "salign/supportdiv.hpp"
#include "test_util.hpp"

using namespace salign;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

PiecewiseDensity uniform_on(double lo, double hi) {
  return PiecewiseDensity::from_masses({{lo, hi}}, {1.0});
}

bool has_atom(const DiscreteMeasure1D& m, double location, double mass) {
  for (const auto& a : m.atoms) {
    if (std::abs(a.location - location) < 1e-9 && std::abs(a.mass - mass) < 1e-9) return true;
  }
  return false;
}

// The construction behind the dual-Wasserstein counterexample: p on
// [-1/2,1/2] u [1,2] with masses {3/4, 1/4}; q on [-2,-1] u [-1/2,1/2] u [1,2]
// with masses {1/4, 1/4, 1/2}.
PiecewiseDensity counterexample_p() {
  return PiecewiseDensity::from_masses({{-0.5, 0.5}, {1, 2}}, {0.75, 0.25});
}
PiecewiseDensity counterexample_q() {
  return PiecewiseDensity::from_masses({{-2, -1}, {-0.5, 0.5}, {1, 2}}, {0.25, 0.25, 0.5});
}

}  // namespace

TEST_CASE("PiecewiseDensity validation") {
  CHECK_THROWS(PiecewiseDensity::from_masses({{0, 1}}, {0.5}));          // mass != 1
  CHECK_THROWS(PiecewiseDensity::from_masses({{0, 1}, {0.5, 2}}, {0.5, 0.5}));  // overlap
  CHECK_THROWS(PiecewiseDensity::from_masses({{1, 1}}, {1.0}));          // empty interval
  CHECK_NOTHROW(PiecewiseDensity::from_masses({{0, 0.5}, {0.5, 1}}, {0.75, 0.25}));  // touching ok

  const auto d = PiecewiseDensity::from_masses({{0, 0.5}, {0.5, 1}}, {0.75, 0.25});
  CHECK(d.density_at(0.25) == doctest::Approx(1.5));
  CHECK(d.density_at(0.75) == doctest::Approx(0.5));
  CHECK(d.density_at(2.0) == 0.0);
  CHECK(d.support().intervals.size() == 1);  // touching pieces merge
  CHECK(d.density_bound() >= 2.0);
}

TEST_CASE("optimal_discriminator examples") {
  const auto u01 = uniform_on(0, 1);
  CHECK(optimal_discriminator(u01, u01, 0.3) == doctest::Approx(0.5));

  const auto shifted = uniform_on(0.5, 1.5);
  CHECK(optimal_discriminator(u01, shifted, 0.25) == doctest::Approx(1.0));
  CHECK(optimal_discriminator(u01, shifted, 0.75) == doctest::Approx(0.5));
  CHECK_THROWS(optimal_discriminator(u01, shifted, 2.5));
}

TEST_CASE("optimal_logit examples and sigmoid identity") {
  const auto u01 = uniform_on(0, 1);
  CHECK(optimal_logit(u01, u01, 0.5) == doctest::Approx(0.0));

  const auto shifted = uniform_on(0.5, 1.5);
  CHECK(std::isinf(optimal_logit(u01, shifted, 0.25)));
  CHECK(optimal_logit(u01, shifted, 0.25) > 0);
  CHECK(std::isinf(optimal_logit(shifted, u01, 0.25)));
  CHECK(optimal_logit(shifted, u01, 0.25) < 0);

  const auto p = PiecewiseDensity::from_masses({{0, 1}, {1, 2}}, {0.75, 0.25});
  const auto q = PiecewiseDensity::from_masses({{0, 1}, {1, 2}}, {0.25, 0.75});
  CHECK(optimal_logit(p, q, 0.5) == doctest::Approx(std::log(3.0)));

  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto layout = testutil::random_interval_layout(rng);
    const auto a = testutil::random_density_on(layout, rng);
    const auto b = testutil::random_density_on(layout, rng);
    for (int k = 0; k < 10; ++k) {
      const auto& piece = layout[rng.uniform_int(0, static_cast<int>(layout.size()) - 1)];
      const double x = rng.uniform(piece.first, piece.second);
      CHECK(sigmoid(optimal_logit(a, b, x)) ==
            doctest::Approx(optimal_discriminator(a, b, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pushforward_discriminator examples") {
  const auto u01 = uniform_on(0, 1);
  const auto shifted = uniform_on(0.5, 1.5);

  auto push = pushforward_discriminator(u01, shifted);
  CHECK(push.fp.atoms.size() == 2);
  CHECK(push.fq.atoms.size() == 2);
  CHECK(has_atom(push.fp, 1.0, 0.5));
  CHECK(has_atom(push.fp, 0.5, 0.5));
  CHECK(has_atom(push.fq, 0.5, 0.5));
  CHECK(has_atom(push.fq, 0.0, 0.5));

  push = pushforward_discriminator(u01, u01);
  CHECK(push.fp.atoms.size() == 1);
  CHECK(has_atom(push.fp, 0.5, 1.0));
  CHECK(has_atom(push.fq, 0.5, 1.0));

  // Region densities p in {3/4, 1/4, 0}, q in {1/4, 1/4, 1/4}.
  push = pushforward_discriminator(counterexample_p(), counterexample_q());
  CHECK(push.fp.atoms.size() == 2);
  CHECK(has_atom(push.fp, 0.75, 0.75));
  CHECK(has_atom(push.fp, 1.0 / 3.0, 0.25));
  CHECK(push.fq.atoms.size() == 3);
  CHECK(has_atom(push.fq, 0.0, 0.25));
  CHECK(has_atom(push.fq, 0.75, 0.25));
  CHECK(has_atom(push.fq, 1.0 / 3.0, 0.5));
  // fq's atom set contains fp's even though the x-supports differ.
  for (const auto& a : push.fp.atoms) {
    bool found = false;
    for (const auto& b : push.fq.atoms) found = found || std::abs(a.location - b.location) < 1e-12;
    CHECK(found);
  }
}

TEST_CASE("pushforward_ssd examples") {
  const auto u01 = uniform_on(0, 1);
  CHECK(pushforward_ssd(u01, u01) == doctest::Approx(0.0));
  CHECK(pushforward_ssd(u01, uniform_on(0.5, 1.5)) == doctest::Approx(0.5));

  // Equal supports, different densities: atoms interleave but supports match.
  const auto q = PiecewiseDensity::from_masses({{0, 0.5}, {0.5, 1}}, {0.75, 0.25});
  CHECK(pushforward_ssd(u01, q) == doctest::Approx(0.0));

  // The counterexample keeps an fq-only atom at 0, so the SSD is positive.
  CHECK(pushforward_ssd(counterexample_p(), counterexample_q()) > 0.05);
}

TEST_CASE("density ratio identity") {
  const auto u01 = uniform_on(0, 1);
  CHECK(density_ratio_identity_check(u01, uniform_on(0.5, 1.5)) <= 1e-12);
  CHECK(density_ratio_identity_check(u01, u01) <= 1e-12);
  CHECK(density_ratio_identity_check(counterexample_p(), counterexample_q()) <= 1e-12);
}

TEST_CASE("pushforward SSD vanishes exactly iff supports match, random pairs") {
  Rng rng(2718);
  int equal_cases = 0, unequal_cases = 0;
  while (equal_cases + unequal_cases < 60) {
    const bool force_equal = (equal_cases + unequal_cases) % 2 == 0;
    const auto layout_p = testutil::random_interval_layout(rng);
    const auto layout_q = force_equal ? layout_p : testutil::random_interval_layout(rng);
    const auto p = testutil::random_density_on(layout_p, rng);
    const auto q = testutil::random_density_on(layout_q, rng);

    const auto push = pushforward_discriminator(p, q);
    CHECK(push.fp.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(push.fq.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(density_ratio_identity_check(p, q) <= 1e-12);

    const double ssd = pushforward_ssd(p, q);
    if (supports_equal(p, q)) {
      CHECK(ssd <= 1e-12);
      ++equal_cases;
    } else {
      CHECK(ssd > 1e-12);
      ++unequal_cases;
    }
  }
  CHECK(equal_cases >= 25);
  CHECK(unequal_cases >= 25);
}

TEST_CASE("beta shift family") {
  CHECK(BetaShiftFamily::support_q(0.0).intervals[0] == std::pair<double, double>{0.0, 1.0});
  CHECK(BetaShiftFamily::support_q(-3.0).intervals[0] == std::pair<double, double>{-3.0, -2.0});

  // Quantiles invert the closed-form CDFs.
  for (double u : {0.001, 0.1, 0.5, 0.9, 0.999}) {
    const double x = BetaShiftFamily::beta42_quantile(u);
    CHECK(x * x * x * x * (5 - 4 * x) == doctest::Approx(u).epsilon(1e-9));
    const double y = BetaShiftFamily::beta24_quantile(u);
    CHECK(1 - std::pow(1 - y, 4) * (1 + 4 * y) == doctest::Approx(u).epsilon(1e-9));
  }

  Rng rng(100);
  const int n = 20000;
  double sum_q = 0.0, sumsq_q = 0.0, sum_p = 0.0;
  const double theta = -3.0;
  for (int i = 0; i < n; ++i) {
    const double x = BetaShiftFamily::sample_q(rng, theta);
    CHECK(x >= theta);
    CHECK(x <= theta + 1.0);
    sum_q += x;
    sumsq_q += x * x;
    sum_p += BetaShiftFamily::sample_p(rng);
  }
  const double mean_q = sum_q / n;
  const double se = std::sqrt((sumsq_q / n - mean_q * mean_q) / n);
  CHECK(std::abs(mean_q - (theta + 1.0 / 3.0)) < 3.0 * se + 1e-6);  // Beta(2,4) mean = 1/3
  CHECK(std::abs(sum_p / n - 2.0 / 3.0) < 0.01);                    // Beta(4,2) mean = 2/3
}

TEST_CASE("initial beta-shift SSD matches the reported scale") {
  // At theta = -3 with the squared ground metric the population divergence is
  // E_p[(x+2)^2] + E_q[y^2] = 100/7 ~= 14.29; the reported value is 14.9.
  const double theta = -3.0;
  const auto est = ssd_continuous_mc(
      [](Rng& r) { return BetaShiftFamily::sample_p(r); },
      [theta](Rng& r) { return BetaShiftFamily::sample_q(r, theta); }, BetaShiftFamily::support_p(),
      BetaShiftFamily::support_q(theta), 20000, 4242, GroundMetric::squared);
  CHECK(std::abs(est.estimate - 100.0 / 7.0) < 4.0 * est.std_error);
  CHECK(est.estimate > 14.9 * 0.9);
  CHECK(est.estimate < 14.9 * 1.1);
}
