#pragma once

#include <vector>

#include "salign/rng.hpp"
#include "salign/supportdiv.hpp"

namespace salign {

// One constant-density piece of a piecewise-uniform distribution.
struct UniformPiece {
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;
};

// A piecewise-uniform density on the real line. Pieces have positive density
// and non-overlapping interiors (touching endpoints allowed); total mass must
// be 1 within 1e-12. This class keeps the optimal log-loss discriminator
// piecewise constant, so every pushforward below is purely atomic and exact.
class PiecewiseDensity {
 public:
  static PiecewiseDensity from_pieces(std::vector<UniformPiece> pieces);
  // Distributes `masses[k]` uniformly over `intervals[k]`.
  static PiecewiseDensity from_masses(const std::vector<std::pair<double, double>>& intervals,
                                      const std::vector<double>& masses);

  double density_at(double x) const;  // 0 outside every piece
  const std::vector<UniformPiece>& pieces() const { return pieces_; }
  IntervalUnion support() const;  // touching pieces merged
  // Smallest C such that every piece density lies in (1/C, C). Bounded
  // densities keep the discriminator values on the support intersection away
  // from 0 and 1, which is what makes the pushforward support checks exact.
  double density_bound() const;

 private:
  std::vector<UniformPiece> pieces_;
};

bool supports_equal(const PiecewiseDensity& p, const PiecewiseDensity& q, double tol = 1e-12);

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Purely atomic measure on the real line, atoms sorted by location.
struct DiscreteMeasure1D {
  std::vector<Atom> atoms;

  double total_mass() const;
};

// p(x) / (p(x) + q(x)). Defined only on supp(p) u supp(q); outside, the
// log-loss objective does not constrain the discriminator and the query is
// refused rather than given a convention.
double optimal_discriminator(const PiecewiseDensity& p, const PiecewiseDensity& q, double x);

// log p(x) - log q(x), with +-infinity where exactly one density vanishes.
// sigma(optimal_logit) == optimal_discriminator wherever both are finite.
double optimal_logit(const PiecewiseDensity& p, const PiecewiseDensity& q, double x);

struct PushforwardPair {
  DiscreteMeasure1D fp;  // pushforward of p through the optimal discriminator
  DiscreteMeasure1D fq;
};

// Enumerates the distinct discriminator values over the overlap partition of
// the pieces, aggregating probability mass into atoms (locations merged
// within 1e-12).
PushforwardPair pushforward_discriminator(const PiecewiseDensity& p, const PiecewiseDensity& q);

// SSD divergence between the two atomic pushforward measures, computed
// exactly from the atoms. Zero iff the x-space supports coincide.
double pushforward_ssd(const PiecewiseDensity& p, const PiecewiseDensity& q);

// Max over atoms of |w_p / (w_p + w_q) - t|: the pushforward mass ratio at
// every discriminator value t must reproduce t itself. Expected 0 up to
// floating-point error.
double density_ratio_identity_check(const PiecewiseDensity& p, const PiecewiseDensity& q);

// Fixed source Beta(4,2) on [0,1] and the shifted target family
// q_theta(x) = Beta(x - theta | 2, 4) with support [theta, theta + 1].
// Sampling inverts the closed-form CDFs through a 4096-point quantile table
// refined by Newton steps; deterministic given the caller's rng.
class BetaShiftFamily {
 public:
  static double sample_p(Rng& rng);
  static double sample_q(Rng& rng, double theta);
  static IntervalUnion support_p();
  static IntervalUnion support_q(double theta);

  // Quantile functions, exposed for evaluation oracles.
  static double beta42_quantile(double u);
  static double beta24_quantile(double u);
};

}  // namespace salign
