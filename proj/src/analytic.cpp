#include "salign/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace salign {

namespace {

constexpr double kMergeTol = 1e-12;

struct JointAtom {
  double t = 0.0;   // discriminator value
  double wp = 0.0;  // p-mass mapped there
  double wq = 0.0;
};

// Overlap partition of the two piece lists; one joint atom per distinct
// discriminator value.
std::vector<JointAtom> joint_pushforward_atoms(const PiecewiseDensity& p,
                                               const PiecewiseDensity& q) {
  std::vector<double> edges;
  for (const auto& piece : p.pieces()) {
    edges.push_back(piece.lo);
    edges.push_back(piece.hi);
  }
  for (const auto& piece : q.pieces()) {
    edges.push_back(piece.lo);
    edges.push_back(piece.hi);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<JointAtom> raw;
  for (size_t k = 0; k + 1 < edges.size(); ++k) {
    const double len = edges[k + 1] - edges[k];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (edges[k] + edges[k + 1]);
    const double dp = p.density_at(mid);
    const double dq = q.density_at(mid);
    if (dp + dq == 0.0) continue;  // gap in both supports
    raw.push_back({dp / (dp + dq), dp * len, dq * len});
  }

  std::sort(raw.begin(), raw.end(), [](const JointAtom& a, const JointAtom& b) { return a.t < b.t; });
  std::vector<JointAtom> merged;
  for (const auto& a : raw) {
    if (!merged.empty() && a.t - merged.back().t <= kMergeTol) {
      merged.back().wp += a.wp;
      merged.back().wq += a.wq;
    } else {
      merged.push_back(a);
    }
  }
  return merged;
}

double min_distance_to_atoms(double t, const DiscreteMeasure1D& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : m.atoms) best = std::min(best, std::abs(t - a.location));
  return best;
}

}  // namespace

PiecewiseDensity PiecewiseDensity::from_pieces(std::vector<UniformPiece> pieces) {
  if (pieces.empty()) throw std::invalid_argument("PiecewiseDensity: no pieces");
  std::sort(pieces.begin(), pieces.end(),
            [](const UniformPiece& a, const UniformPiece& b) { return a.lo < b.lo; });
  double mass = 0.0;
  for (size_t k = 0; k < pieces.size(); ++k) {
    const auto& piece = pieces[k];
    if (!(piece.lo < piece.hi)) throw std::invalid_argument("PiecewiseDensity: empty interval");
    if (!(piece.density > 0.0)) throw std::invalid_argument("PiecewiseDensity: density must be > 0");
    if (k > 0 && pieces[k - 1].hi > piece.lo + kMergeTol)
      throw std::invalid_argument("PiecewiseDensity: overlapping pieces");
    mass += piece.density * (piece.hi - piece.lo);
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw std::invalid_argument("PiecewiseDensity: total mass != 1");
  PiecewiseDensity d;
  d.pieces_ = std::move(pieces);
  return d;
}

PiecewiseDensity PiecewiseDensity::from_masses(
    const std::vector<std::pair<double, double>>& intervals, const std::vector<double>& masses) {
  if (intervals.size() != masses.size())
    throw std::invalid_argument("PiecewiseDensity: intervals/masses size mismatch");
  std::vector<UniformPiece> pieces;
  pieces.reserve(intervals.size());
  for (size_t k = 0; k < intervals.size(); ++k) {
    const auto [lo, hi] = intervals[k];
    if (!(hi > lo)) throw std::invalid_argument("PiecewiseDensity: empty interval");
    pieces.push_back({lo, hi, masses[k] / (hi - lo)});
  }
  return from_pieces(std::move(pieces));
}

double PiecewiseDensity::density_at(double x) const {
  for (const auto& piece : pieces_) {
    if (x < piece.lo) break;
    if (x <= piece.hi) return piece.density;
  }
  return 0.0;
}

IntervalUnion PiecewiseDensity::support() const {
  std::vector<std::pair<double, double>> merged;
  for (const auto& piece : pieces_) {
    if (!merged.empty() && piece.lo - merged.back().second <= kMergeTol) {
      merged.back().second = piece.hi;
    } else {
      merged.push_back({piece.lo, piece.hi});
    }
  }
  return make_interval_union(std::move(merged));
}

double PiecewiseDensity::density_bound() const {
  double c = 1.0;
  for (const auto& piece : pieces_) c = std::max({c, piece.density, 1.0 / piece.density});
  return std::nextafter(c, std::numeric_limits<double>::infinity());
}

bool supports_equal(const PiecewiseDensity& p, const PiecewiseDensity& q, double tol) {
  const auto a = p.support().intervals;
  const auto b = q.support().intervals;
  if (a.size() != b.size()) return false;
  for (size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k].first - b[k].first) > tol || std::abs(a[k].second - b[k].second) > tol)
      return false;
  }
  return true;
}

double DiscreteMeasure1D::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  return m;
}

double optimal_discriminator(const PiecewiseDensity& p, const PiecewiseDensity& q, double x) {
  const double dp = p.density_at(x);
  const double dq = q.density_at(x);
  if (dp + dq == 0.0)
    throw std::domain_error("optimal_discriminator: x outside supp(p) u supp(q)");
  return dp / (dp + dq);
}

double optimal_logit(const PiecewiseDensity& p, const PiecewiseDensity& q, double x) {
  const double dp = p.density_at(x);
  const double dq = q.density_at(x);
  if (dp + dq == 0.0) throw std::domain_error("optimal_logit: x outside supp(p) u supp(q)");
  if (dq == 0.0) return std::numeric_limits<double>::infinity();
  if (dp == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(dp) - std::log(dq);
}

PushforwardPair pushforward_discriminator(const PiecewiseDensity& p, const PiecewiseDensity& q) {
  PushforwardPair out;
  for (const auto& atom : joint_pushforward_atoms(p, q)) {
    if (atom.wp > 0.0) out.fp.atoms.push_back({atom.t, atom.wp});
    if (atom.wq > 0.0) out.fq.atoms.push_back({atom.t, atom.wq});
  }
  return out;
}

double pushforward_ssd(const PiecewiseDensity& p, const PiecewiseDensity& q) {
  const auto push = pushforward_discriminator(p, q);
  double total = 0.0;
  for (const auto& a : push.fp.atoms) total += a.mass * min_distance_to_atoms(a.location, push.fq);
  for (const auto& a : push.fq.atoms) total += a.mass * min_distance_to_atoms(a.location, push.fp);
  return total;
}

double density_ratio_identity_check(const PiecewiseDensity& p, const PiecewiseDensity& q) {
  double worst = 0.0;
  for (const auto& atom : joint_pushforward_atoms(p, q)) {
    worst = std::max(worst, std::abs(atom.wp / (atom.wp + atom.wq) - atom.t));
  }
  return worst;
}

namespace {

// Beta(4,2): F(x) = x^4 (5 - 4x), f(x) = 20 x^3 (1 - x).
double beta42_cdf(double x) { return x * x * x * x * (5.0 - 4.0 * x); }
double beta42_pdf(double x) { return 20.0 * x * x * x * (1.0 - x); }
// Beta(2,4): F(x) = 1 - (1 - x)^4 (1 + 4x), f(x) = 20 x (1 - x)^3.
double beta24_cdf(double x) {
  const double r = 1.0 - x;
  return 1.0 - r * r * r * r * (1.0 + 4.0 * x);
}
double beta24_pdf(double x) {
  const double r = 1.0 - x;
  return 20.0 * x * r * r * r;
}

constexpr int kTableSize = 4096;

std::array<double, kTableSize + 1> build_quantile_table(double (*cdf)(double)) {
  std::array<double, kTableSize + 1> table{};
  table[0] = 0.0;
  table[kTableSize] = 1.0;
  for (int k = 1; k < kTableSize; ++k) {
    const double u = static_cast<double>(k) / kTableSize;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    table[k] = 0.5 * (lo + hi);
  }
  return table;
}

double quantile_from_table(const std::array<double, kTableSize + 1>& table, double u,
                           double (*cdf)(double), double (*pdf)(double)) {
  u = std::clamp(u, 0.0, 1.0);
  const double pos = u * kTableSize;
  const int k = std::min(static_cast<int>(pos), kTableSize - 1);
  double x = table[k] + (pos - k) * (table[k + 1] - table[k]);
  // Two Newton refinements on the closed-form CDF.
  for (int it = 0; it < 2; ++it) {
    const double f = pdf(x);
    if (f < 1e-9) break;
    x = std::clamp(x - (cdf(x) - u) / f, 0.0, 1.0);
  }
  return x;
}

}  // namespace

double BetaShiftFamily::beta42_quantile(double u) {
  static const auto table = build_quantile_table(&beta42_cdf);
  return quantile_from_table(table, u, &beta42_cdf, &beta42_pdf);
}

double BetaShiftFamily::beta24_quantile(double u) {
  static const auto table = build_quantile_table(&beta24_cdf);
  return quantile_from_table(table, u, &beta24_cdf, &beta24_pdf);
}

double BetaShiftFamily::sample_p(Rng& rng) { return beta42_quantile(rng.uniform01()); }

double BetaShiftFamily::sample_q(Rng& rng, double theta) {
  return theta + beta24_quantile(rng.uniform01());
}

IntervalUnion BetaShiftFamily::support_p() { return make_interval_union({{0.0, 1.0}}); }

IntervalUnion BetaShiftFamily::support_q(double theta) {
  return make_interval_union({{theta, theta + 1.0}});
}

}  // namespace salign
