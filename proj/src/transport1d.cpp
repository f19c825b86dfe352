#include "salign/transport1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace salign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument("Scalars1D: non-finite value");
  }
}

// Indices of `s` in non-decreasing value order, stable w.r.t. position so
// duplicate values keep a deterministic order.
std::vector<int> sorted_order(const Scalars1D& s) {
  std::vector<int> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (!s.sorted) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return s.values[a] < s.values[b]; });
  }
  return idx;
}

void require_equal_nonempty(const Scalars1D& p, const Scalars1D& q) {
  if (p.size() == 0 || q.size() == 0) throw std::invalid_argument("transport1d: empty input");
  if (p.size() != q.size()) throw std::invalid_argument("transport1d: size mismatch");
}

Assignment finalize(std::vector<std::pair<int, int>> pairs, int n_targets, const Scalars1D& p,
                    const Scalars1D& q, GroundMetric metric) {
  Assignment plan;
  std::sort(pairs.begin(), pairs.end());
  plan.pairs = std::move(pairs);
  plan.capacity_used.assign(n_targets, 0);
  for (const auto& [i, j] : plan.pairs) ++plan.capacity_used[j];
  plan.cost = assignment_cost(plan, p, q, metric);
  return plan;
}

}  // namespace

Scalars1D make_scalars(Eigen::VectorXd values, bool sorted) {
  check_finite(values);
  if (sorted) {
    for (Eigen::Index i = 1; i < values.size(); ++i) {
      if (values[i - 1] > values[i]) throw std::invalid_argument("Scalars1D: not sorted");
    }
  }
  return Scalars1D{std::move(values), sorted};
}

Scalars1D make_scalars(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v[k++] = x;
  return make_scalars(std::move(v));
}

Tolerance Tolerance::finite(int beta) {
  if (beta < 0) throw std::invalid_argument("Tolerance: beta must be >= 0");
  return Tolerance(beta);
}

int Tolerance::beta() const {
  if (!is_finite()) throw std::logic_error("Tolerance: unbounded has no beta");
  return beta_;
}

double assignment_cost(const Assignment& plan, const Scalars1D& p, const Scalars1D& q,
                       GroundMetric metric) {
  double total = 0.0;
  for (const auto& [i, j] : plan.pairs) total += ground_distance(metric, p.values[i], q.values[j]);
  return total / static_cast<double>(plan.pairs.size());
}

Assignment wasserstein1_1d(const Scalars1D& p, const Scalars1D& q, GroundMetric metric) {
  require_equal_nonempty(p, q);
  const auto op = sorted_order(p);
  const auto oq = sorted_order(q);
  std::vector<std::pair<int, int>> pairs(p.size());
  for (int r = 0; r < p.size(); ++r) pairs[r] = {op[r], oq[r]};
  return finalize(std::move(pairs), q.size(), p, q, metric);
}

Assignment relaxed_ot_1d(const Scalars1D& p, const Scalars1D& q, int beta, GroundMetric metric) {
  require_equal_nonempty(p, q);
  if (beta < 0) throw std::invalid_argument("relaxed_ot_1d: beta must be a non-negative integer");
  const int m = p.size();
  const int cap = std::min(beta + 1, m);
  const auto op = sorted_order(p);
  const auto oq = sorted_order(q);

  // f(i, j) = min cost of assigning the first i sorted sources using only the
  // first j sorted targets. Either target j-1 is unused, or it takes the last
  // k in 1..cap sources (monotone plans are optimal for convex ground costs).
  const int stride = m + 1;
  std::vector<double> f(static_cast<size_t>(m + 1) * (m + 1), kInf);
  std::vector<int> take(static_cast<size_t>(m + 1) * (m + 1), 0);
  for (int j = 0; j <= m; ++j) f[static_cast<size_t>(j) * stride] = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double tv = q.values[oq[j - 1]];
    for (int i = 1; i <= m; ++i) {
      double best = f[static_cast<size_t>(j - 1) * stride + i];
      int best_k = 0;
      double run = 0.0;
      for (int k = 1; k <= std::min(i, cap); ++k) {
        run += ground_distance(metric, p.values[op[i - k]], tv);
        const double cand = f[static_cast<size_t>(j - 1) * stride + (i - k)] + run;
        if (cand < best) {
          best = cand;
          best_k = k;
        }
      }
      f[static_cast<size_t>(j) * stride + i] = best;
      take[static_cast<size_t>(j) * stride + i] = best_k;
    }
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(m);
  int i = m;
  for (int j = m; j > 0; --j) {
    const int k = take[static_cast<size_t>(j) * stride + i];
    for (int t = 1; t <= k; ++t) pairs.emplace_back(op[i - t], oq[j - 1]);
    i -= k;
  }
  return finalize(std::move(pairs), m, p, q, metric);
}

Assignment nn_assignment_1d(const Scalars1D& p, const Scalars1D& q, GroundMetric metric) {
  if (p.size() == 0) throw std::invalid_argument("nn_assignment_1d: empty source");
  if (q.size() == 0) throw std::invalid_argument("nn_assignment_1d: empty target");
  const auto oq = sorted_order(q);
  std::vector<double> qv(oq.size());
  for (size_t r = 0; r < oq.size(); ++r) qv[r] = q.values[oq[r]];

  std::vector<std::pair<int, int>> pairs(p.size());
  for (int i = 0; i < p.size(); ++i) {
    const double x = p.values[i];
    const auto it = std::lower_bound(qv.begin(), qv.end(), x);
    int r = static_cast<int>(it - qv.begin());
    if (r == static_cast<int>(qv.size())) {
      r = r - 1;
    } else if (r > 0) {
      // Ties go to the smaller sorted index (the left neighbor).
      if (x - qv[r - 1] <= qv[r] - x) r = r - 1;
    }
    pairs[i] = {i, oq[r]};
  }
  return finalize(std::move(pairs), q.size(), p, q, metric);
}

double symmetric_relaxed_cost(const Scalars1D& p, const Scalars1D& q, Tolerance beta1,
                              Tolerance beta2, GroundMetric metric) {
  const double forward = beta1.is_finite() ? relaxed_ot_1d(p, q, beta1.beta(), metric).cost
                                           : nn_assignment_1d(p, q, metric).cost;
  const double backward = beta2.is_finite() ? relaxed_ot_1d(q, p, beta2.beta(), metric).cost
                                            : nn_assignment_1d(q, p, metric).cost;
  return forward + backward;
}

Assignment brute_force_ot_1d(const Scalars1D& p, const Scalars1D& q, Tolerance beta,
                             GroundMetric metric) {
  require_equal_nonempty(p, q);
  const int m = p.size();
  if (m > 8) throw std::invalid_argument("brute_force_ot_1d: m > 8");
  const int cap = beta.is_finite() ? std::min(beta.beta() + 1, m) : m;

  std::vector<int> target(m, -1), best_target(m, -1), used(m, 0);
  double best = kInf;
  // Depth-first over all capacity-feasible maps source -> target.
  auto dfs = [&](auto&& self, int i, double acc) -> void {
    if (acc >= best) return;
    if (i == m) {
      best = acc;
      best_target = target;
      return;
    }
    for (int j = 0; j < m; ++j) {
      if (used[j] == cap) continue;
      ++used[j];
      target[i] = j;
      self(self, i + 1, acc + ground_distance(metric, p.values[i], q.values[j]));
      --used[j];
    }
  };
  dfs(dfs, 0, 0.0);

  std::vector<std::pair<int, int>> pairs(m);
  for (int i = 0; i < m; ++i) pairs[i] = {i, best_target[i]};
  return finalize(std::move(pairs), m, p, q, metric);
}

}  // namespace salign
