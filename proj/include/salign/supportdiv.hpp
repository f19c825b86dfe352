#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "salign/rng.hpp"
#include "salign/transport1d.hpp"

namespace salign {

// A finite point set in R^n, one point per row.
using PointSet = Eigen::MatrixXd;

// Disjoint closed intervals on the real line, sorted by left endpoint.
struct IntervalUnion {
  std::vector<std::pair<double, double>> intervals;
};

IntervalUnion make_interval_union(std::vector<std::pair<double, double>> intervals);

// Unit vector in R^n (norm checked to 1e-12).
struct Direction {
  Eigen::VectorXd u;
};

Direction make_direction(Eigen::VectorXd u);

// Discrete SSD divergence: mean nearest-point distance from each set to the
// other, summed over both directions (Euclidean ground metric). Sorted merge
// for 1D, exhaustive nearest-neighbor search otherwise.
double ssd_discrete(const PointSet& p, const PointSet& q);

// max of the two directed sup-inf distances.
double hausdorff(const PointSet& p, const PointSet& q);

// 0 inside the union, otherwise the gap to the nearest endpoint. Binary
// search over the sorted intervals.
double distance_to_interval_union(double x, const IntervalUnion& s);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of E_p[d(x, supp q)] + E_q[d(x, supp p)] with known 1D
// supports. Deterministic given the seed; samples are consumed p-side first,
// in a fixed order. `metric` maps the gap through the ground cost.
McEstimate ssd_continuous_mc(const std::function<double(Rng&)>& sample_p,
                             const std::function<double(Rng&)>& sample_q,
                             const IntervalUnion& supp_p, const IntervalUnion& supp_q,
                             int n_samples, std::uint64_t seed,
                             GroundMetric metric = GroundMetric::absolute);

// Inner product of every point with the direction.
Scalars1D project(const PointSet& points, const Direction& dir);

struct SlicedSsd {
  double max_over_dirs = 0.0;
  double mean_over_dirs = 0.0;
};

// Symmetric 1D nearest-neighbor cost of random linear projections,
// aggregated over directions drawn uniformly on the unit sphere. Not a valid
// support divergence; kept for the counterexample experiment.
SlicedSsd sliced_ssd(const PointSet& p, const PointSet& q, int n_directions, std::uint64_t seed);

}  // namespace salign
