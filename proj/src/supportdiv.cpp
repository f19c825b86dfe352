#include "salign/supportdiv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salign {

namespace {

void require_compatible(const PointSet& p, const PointSet& q) {
  if (p.rows() == 0 || q.rows() == 0) throw std::invalid_argument("supportdiv: empty point set");
  if (p.cols() != q.cols()) throw std::invalid_argument("supportdiv: dimension mismatch");
  if (!p.allFinite() || !q.allFinite()) throw std::invalid_argument("supportdiv: non-finite point");
}

// Mean distance from rows of `a` to their nearest row of `b`.
double directed_mean_nn(const PointSet& a, const PointSet& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    total += (b.rowwise() - a.row(i)).rowwise().norm().minCoeff();
  }
  return total / static_cast<double>(a.rows());
}

double directed_max_nn(const PointSet& a, const PointSet& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    worst = std::max(worst, (b.rowwise() - a.row(i)).rowwise().norm().minCoeff());
  }
  return worst;
}

}  // namespace

IntervalUnion make_interval_union(std::vector<std::pair<double, double>> intervals) {
  if (intervals.empty()) throw std::invalid_argument("IntervalUnion: empty");
  std::sort(intervals.begin(), intervals.end());
  for (size_t k = 0; k < intervals.size(); ++k) {
    if (!(intervals[k].first <= intervals[k].second))
      throw std::invalid_argument("IntervalUnion: inverted interval");
    if (k > 0 && !(intervals[k - 1].second < intervals[k].first))
      throw std::invalid_argument("IntervalUnion: overlapping intervals");
  }
  return IntervalUnion{std::move(intervals)};
}

Direction make_direction(Eigen::VectorXd u) {
  if (u.size() == 0) throw std::invalid_argument("Direction: empty");
  if (std::abs(u.norm() - 1.0) > 1e-12) throw std::invalid_argument("Direction: not unit norm");
  return Direction{std::move(u)};
}

double ssd_discrete(const PointSet& p, const PointSet& q) {
  require_compatible(p, q);
  if (p.cols() == 1) {
    const auto sp = make_scalars(p.col(0));
    const auto sq = make_scalars(q.col(0));
    return nn_assignment_1d(sp, sq, GroundMetric::absolute).cost +
           nn_assignment_1d(sq, sp, GroundMetric::absolute).cost;
  }
  return directed_mean_nn(p, q) + directed_mean_nn(q, p);
}

double hausdorff(const PointSet& p, const PointSet& q) {
  require_compatible(p, q);
  return std::max(directed_max_nn(p, q), directed_max_nn(q, p));
}

double distance_to_interval_union(double x, const IntervalUnion& s) {
  if (s.intervals.empty()) throw std::invalid_argument("distance_to_interval_union: empty union");
  // First interval starting beyond x; the candidates are it and its left
  // neighbor.
  const auto it = std::upper_bound(s.intervals.begin(), s.intervals.end(), x,
                                   [](double v, const auto& iv) { return v < iv.first; });
  double best = std::numeric_limits<double>::infinity();
  if (it != s.intervals.end()) best = it->first - x;
  if (it != s.intervals.begin()) {
    const auto& left = *(it - 1);
    if (x <= left.second) return 0.0;
    best = std::min(best, x - left.second);
  }
  return best;
}

McEstimate ssd_continuous_mc(const std::function<double(Rng&)>& sample_p,
                             const std::function<double(Rng&)>& sample_q,
                             const IntervalUnion& supp_p, const IntervalUnion& supp_q,
                             int n_samples, std::uint64_t seed, GroundMetric metric) {
  if (n_samples < 100) throw std::invalid_argument("ssd_continuous_mc: n_samples < 100");
  Rng rng(seed);
  const double n = static_cast<double>(n_samples);

  double sum_p = 0.0, sumsq_p = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double gap = distance_to_interval_union(sample_p(rng), supp_q);
    const double d = metric == GroundMetric::absolute ? gap : gap * gap;
    sum_p += d;
    sumsq_p += d * d;
  }
  double sum_q = 0.0, sumsq_q = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double gap = distance_to_interval_union(sample_q(rng), supp_p);
    const double d = metric == GroundMetric::absolute ? gap : gap * gap;
    sum_q += d;
    sumsq_q += d * d;
  }

  const double mean_p = sum_p / n;
  const double mean_q = sum_q / n;
  const double var_p = std::max(0.0, sumsq_p / n - mean_p * mean_p) / (n - 1.0);
  const double var_q = std::max(0.0, sumsq_q / n - mean_q * mean_q) / (n - 1.0);
  return {mean_p + mean_q, std::sqrt(var_p + var_q)};
}

Scalars1D project(const PointSet& points, const Direction& dir) {
  if (points.cols() != dir.u.size()) throw std::invalid_argument("project: dimension mismatch");
  return make_scalars(points * dir.u);
}

SlicedSsd sliced_ssd(const PointSet& p, const PointSet& q, int n_directions, std::uint64_t seed) {
  require_compatible(p, q);
  if (n_directions < 1) throw std::invalid_argument("sliced_ssd: need at least one direction");
  Rng rng(seed);
  SlicedSsd out;
  for (int k = 0; k < n_directions; ++k) {
    const Direction dir{rng.unit_vector(static_cast<int>(p.cols()))};
    const auto sp = project(p, dir);
    const auto sq = project(q, dir);
    const double cost = nn_assignment_1d(sp, sq, GroundMetric::absolute).cost +
                        nn_assignment_1d(sq, sp, GroundMetric::absolute).cost;
    out.max_over_dirs = std::max(out.max_over_dirs, cost);
    out.mean_over_dirs += cost;
  }
  out.mean_over_dirs /= static_cast<double>(n_directions);
  return out;
}

}  // namespace salign
