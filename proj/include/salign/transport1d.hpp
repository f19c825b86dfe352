#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace salign {

// Ground metric d(x, y) on the real line. `absolute` makes the 1-to-1 solver
// the exact 1D Wasserstein-1 distance; `squared` is the other cost used by
// the alignment variants.
enum class GroundMetric { absolute, squared };

inline double ground_distance(GroundMetric m, double x, double y) {
  const double d = x - y;
  return m == GroundMetric::absolute ? (d < 0 ? -d : d) : d * d;
}

// Derivative of d(x, y) w.r.t. x. The subgradient of |x - y| at x == y is
// taken as 0 so coincident points stop exchanging gradient.
inline double ground_distance_ddx(GroundMetric m, double x, double y) {
  const double d = x - y;
  if (m == GroundMetric::squared) return 2.0 * d;
  return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
}

// A finite multiset of 1D values. `sorted` asserts the values are already
// non-decreasing, letting solvers skip the sort.
struct Scalars1D {
  Eigen::VectorXd values;
  bool sorted = false;

  int size() const { return static_cast<int>(values.size()); }
};

// Validates finiteness (and order, when `sorted` is claimed).
Scalars1D make_scalars(Eigen::VectorXd values, bool sorted = false);
Scalars1D make_scalars(std::initializer_list<double> values);

// Assignment tolerance: a target may absorb up to beta + 1 sources. The
// unbounded case is the nearest-neighbor limit.
class Tolerance {
 public:
  static Tolerance finite(int beta);
  static Tolerance unbounded() { return Tolerance(-1); }

  bool is_finite() const { return beta_ >= 0; }
  int beta() const;

 private:
  explicit Tolerance(int beta) : beta_(beta) {}
  int beta_;
};

// A hard transport plan: every source index appears exactly once in `pairs`,
// `capacity_used[j]` counts sources mapped onto target j, and `cost` is the
// mean ground distance over the pairs.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (source index, target index)
  std::vector<int> capacity_used;
  double cost = 0.0;
};

// Recomputes the mean pair cost from scratch; used by the solvers so that all
// of them accumulate in the same (source-index) order.
double assignment_cost(const Assignment& plan, const Scalars1D& p, const Scalars1D& q,
                       GroundMetric metric);

// Exact 1D optimal transport between equal-size multisets: sort both sides
// and pair in order. For the absolute metric this equals the Wasserstein-1
// distance between the two empirical distributions.
Assignment wasserstein1_1d(const Scalars1D& p, const Scalars1D& q, GroundMetric metric);

// Minimum-cost hard assignment where each target receives at most beta + 1
// sources. Dynamic program over the sorted sequences; optimal plans can be
// taken monotone (non-crossing) because the ground costs are convex.
// beta = 0 reproduces wasserstein1_1d exactly. O((beta + 1) * m^2) worst case.
// Only integer tolerances admit hard assignments; callers with a fractional
// beta must round it down.
Assignment relaxed_ot_1d(const Scalars1D& p, const Scalars1D& q, int beta, GroundMetric metric);

// Each source goes to its nearest target (the infinite-tolerance limit);
// sizes may differ. Cost is one directed term of the discrete SSD divergence.
// Equidistant targets break toward the smaller sorted index.
Assignment nn_assignment_1d(const Scalars1D& p, const Scalars1D& q, GroundMetric metric);

// D^{beta1}(p -> q) + D^{beta2}(q -> p), each direction dispatched to the
// capacity DP or to nearest-neighbor assignment for the unbounded case.
double symmetric_relaxed_cost(const Scalars1D& p, const Scalars1D& q, Tolerance beta1,
                              Tolerance beta2, GroundMetric metric);

// Exhaustive oracle: enumerates every capacity-feasible hard assignment and
// returns a minimizer. Ground truth for the solvers above; m <= 8 only.
Assignment brute_force_ot_1d(const Scalars1D& p, const Scalars1D& q, Tolerance beta,
                             GroundMetric metric);

}  // namespace salign
