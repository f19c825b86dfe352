#include "salign/experiments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace salign {

double empirical_wasserstein_1d(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                GroundMetric metric) {
  return wasserstein1_1d(make_scalars(a), make_scalars(b), metric).cost;
}

std::vector<int> solve_linear_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols() || cost.rows() == 0)
    throw std::invalid_argument("solve_linear_assignment: square non-empty matrix required");
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Hungarian method with potentials; p[j] is the row matched to column j,
  // with index 0 as the sentinel column. O(n^3).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double empirical_wasserstein_nd(const PointSet& a, const PointSet& b, GroundMetric metric) {
  if (a.rows() != b.rows()) throw std::invalid_argument("empirical_wasserstein_nd: size mismatch");
  if (a.cols() != b.cols())
    throw std::invalid_argument("empirical_wasserstein_nd: dimension mismatch");
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd d = (b.rowwise() - a.row(i)).rowwise().norm();
    if (metric == GroundMetric::squared) d = d.array().square();
    cost.row(i) = d.transpose();
  }
  const auto match = solve_linear_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, match[i]);
  return total / static_cast<double>(n);
}

// --------------------------------------------------------------------------
// Beta-shift toy
// --------------------------------------------------------------------------

namespace {

EvalResult evaluate_beta_shift(double theta, int n_eval, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd xp(n_eval), xq(n_eval);
  for (int i = 0; i < n_eval; ++i) xp[i] = BetaShiftFamily::sample_p(rng);
  for (int i = 0; i < n_eval; ++i) xq[i] = BetaShiftFamily::sample_q(rng, theta);
  EvalResult out;
  out.d_w = empirical_wasserstein_1d(xp, xq, GroundMetric::squared);
  out.d_ssd = ssd_continuous_mc([](Rng& r) { return BetaShiftFamily::sample_p(r); },
                                [theta](Rng& r) { return BetaShiftFamily::sample_q(r, theta); },
                                BetaShiftFamily::support_p(), BetaShiftFamily::support_q(theta),
                                n_eval, seed ^ 0xa5a5a5a5ull, GroundMetric::squared)
                .estimate;
  return out;
}

}  // namespace

BetaShiftOutcome run_beta_shift(const BetaShiftConfig& config) {
  Samplers samplers;
  samplers.dim = 1;
  samplers.sample_p = [](int m, Rng& rng) {
    Eigen::MatrixXd x(m, 1);
    for (int i = 0; i < m; ++i) x(i, 0) = BetaShiftFamily::sample_p(rng);
    return x;
  };
  // Raw target draws are Beta(2,4); the shift generator owns theta.
  samplers.sample_q = [](int m, Rng& rng) {
    Eigen::MatrixXd x(m, 1);
    for (int i = 0; i < m; ++i) x(i, 0) = BetaShiftFamily::beta24_quantile(rng.uniform01());
    return x;
  };

  ShiftGenerator gen(config.theta_init);
  const int n_eval = config.eval_samples;
  Evaluator evaluator = [n_eval](Generator& g, Network&, std::uint64_t seed) {
    return evaluate_beta_shift(static_cast<ShiftGenerator&>(g).theta(), n_eval, seed);
  };

  BetaShiftOutcome out;
  out.result = run_training(samplers, gen, config.train, config.mode, evaluator);
  out.theta_final = gen.theta();
  out.initial = out.result.trace.checkpoints.front().eval;
  out.final_state = out.result.trace.checkpoints.back().eval;
  return out;
}

// --------------------------------------------------------------------------
// Gaussian-mixture toy
// --------------------------------------------------------------------------

namespace {

struct MixtureGeometry {
  Eigen::Matrix<double, 3, 2> means;
  double sigma = 0.3;
  Eigen::RowVector2d offset;
  Eigen::Vector3d weights;
};

MixtureGeometry make_geometry(const Mixture2dConfig& config) {
  MixtureGeometry g;
  const double angles[3] = {M_PI / 2, M_PI / 2 + 2 * M_PI / 3, M_PI / 2 + 4 * M_PI / 3};
  for (int k = 0; k < 3; ++k) {
    g.means(k, 0) = config.cluster_radius * std::cos(angles[k]);
    g.means(k, 1) = config.cluster_radius * std::sin(angles[k]);
  }
  g.sigma = config.cluster_sigma;
  g.offset << config.target_offset, 0.0;
  for (int k = 0; k < 3; ++k) g.weights[k] = std::pow(static_cast<double>(k + 1), -config.alpha);
  g.weights /= g.weights.sum();
  return g;
}

int sample_target_cluster(const MixtureGeometry& g, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int k = 0; k < 2; ++k) {
    acc += g.weights[k];
    if (u < acc) return k;
  }
  return 2;
}

Eigen::RowVector2d gaussian_point(const MixtureGeometry& g, int cluster, bool target, Rng& rng) {
  Eigen::RowVector2d x = g.means.row(cluster);
  if (target) x += g.offset;
  x[0] += g.sigma * rng.normal();
  x[1] += g.sigma * rng.normal();
  return x;
}

struct LabeledSample {
  PointSet points;
  std::vector<int> labels;
};

LabeledSample draw_source(const MixtureGeometry& g, int n, Rng& rng) {
  LabeledSample s{PointSet(n, 2), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    s.labels[i] = rng.uniform_int(0, 2);
    s.points.row(i) = gaussian_point(g, s.labels[i], false, rng);
  }
  return s;
}

LabeledSample draw_target_raw(const MixtureGeometry& g, int n, Rng& rng) {
  LabeledSample s{PointSet(n, 2), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    s.labels[i] = sample_target_cluster(g, rng);
    s.points.row(i) = gaussian_point(g, s.labels[i], true, rng);
  }
  return s;
}

struct MixtureMetrics {
  double embed_dw = 0.0;
  double embed_dssd = 0.0;
  double push_dw = 0.0;
  double push_dssd = 0.0;
  std::vector<double> cluster_match;
};

MixtureMetrics evaluate_mixture(const MixtureGeometry& g, Generator& gen, Network& disc,
                                int n_eval, std::uint64_t seed, bool with_assignment) {
  Rng rng(seed);
  const auto source = draw_source(g, n_eval, rng);
  const auto target = draw_target_raw(g, n_eval, rng);
  Generator& mutable_gen = gen;
  const PointSet embedded = mutable_gen.map_q(target.points);

  MixtureMetrics out;

  // normalized embedding space: pooled mean 0, pooled average norm 1
  PointSet pooled(2 * n_eval, 2);
  pooled << source.points, embedded;
  const Eigen::RowVector2d mean = pooled.colwise().mean();
  pooled.rowwise() -= mean;
  const double avg_norm = pooled.rowwise().norm().mean();
  const double scale = avg_norm > 1e-12 ? 1.0 / avg_norm : 1.0;
  const PointSet np = (source.points.rowwise() - mean) * scale;
  const PointSet nq = (embedded.rowwise() - mean) * scale;
  out.embed_dssd = ssd_discrete(np, nq);
  out.embed_dw = with_assignment ? empirical_wasserstein_nd(np, nq, GroundMetric::absolute) : 0.0;

  // discriminator-output space
  const Eigen::VectorXd lp = disc.forward(source.points.transpose()).row(0);
  const Eigen::VectorXd lq = disc.forward(embedded.transpose()).row(0);
  out.push_dw = empirical_wasserstein_1d(lp, lq, GroundMetric::absolute);
  out.push_dssd = nn_assignment_1d(make_scalars(lp), make_scalars(lq), GroundMetric::absolute).cost +
                  nn_assignment_1d(make_scalars(lq), make_scalars(lp), GroundMetric::absolute).cost;

  // how much of each target cluster lands at its own source center
  out.cluster_match.assign(3, 0.0);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n_eval; ++i) {
    const int label = target.labels[i];
    ++counts[label];
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double d = (embedded.row(i) - g.means.row(k)).norm();
      if (d < best) {
        best = d;
        nearest = k;
      }
    }
    if (nearest == label) out.cluster_match[label] += 1.0;
  }
  for (int k = 0; k < 3; ++k) out.cluster_match[k] /= std::max(1, counts[k]);
  return out;
}

Samplers mixture_samplers(const MixtureGeometry& g) {
  Samplers samplers;
  samplers.dim = 2;
  samplers.sample_p = [g](int m, Rng& rng) { return draw_source(g, m, rng).points; };
  samplers.sample_q = [g](int m, Rng& rng) { return draw_target_raw(g, m, rng).points; };
  return samplers;
}

MlpGenerator make_mixture_generator(const Mixture2dConfig& config, Rng& rng) {
  std::vector<int> dims{2};
  std::vector<Activation> acts;
  for (int h : config.gen_hidden) {
    dims.push_back(h);
    acts.push_back(Activation::leaky_relu);
  }
  dims.push_back(2);
  acts.push_back(Activation::identity);
  return MlpGenerator(dims, acts, rng);
}

}  // namespace

Mixture2dOutcome run_mixture2d(const Mixture2dConfig& config) {
  if (config.alpha < 0) throw std::invalid_argument("run_mixture2d: alpha must be >= 0");
  const MixtureGeometry geometry = make_geometry(config);
  const auto samplers = mixture_samplers(geometry);

  Rng gen_rng(config.train.seed ^ 0xfeedface12345ull);
  MlpGenerator gen = make_mixture_generator(config, gen_rng);

  const int n_eval = config.eval_samples;
  Evaluator evaluator = [&geometry, n_eval](Generator& g, Network& disc, std::uint64_t seed) {
    const auto m = evaluate_mixture(geometry, g, disc, n_eval, seed, /*with_assignment=*/false);
    return EvalResult{m.embed_dssd, m.push_dssd};
  };

  Mixture2dOutcome out;
  out.result = run_training(samplers, gen, config.train, config.mode, evaluator);

  const auto metrics = evaluate_mixture(geometry, gen, out.result.discriminator, n_eval,
                                        config.train.seed ^ 0x9e3779b97f4a7c15ull,
                                        /*with_assignment=*/true);
  out.embed_dw = metrics.embed_dw;
  out.embed_dssd = metrics.embed_dssd;
  out.push_dw = metrics.push_dw;
  out.push_dssd = metrics.push_dssd;
  out.cluster_match = metrics.cluster_match;
  return out;
}

HistoryAblationOutcome run_history_ablation(const Mixture2dConfig& base,
                                            const std::vector<int>& history_sizes) {
  HistoryAblationOutcome out;

  auto run_one = [&](int history, double lambda) {
    Mixture2dConfig config = base;
    config.mode = AlignmentMode{AlignKind::support, 0, base.mode.metric};
    config.train.history_capacity = history;
    config.train.lambda_align = lambda;
    const auto result = run_mixture2d(config);
    HistoryAblationRow row;
    row.history = history;
    row.push_dw = result.push_dw;
    row.push_dssd = result.push_dssd;
    row.embed_dw = result.embed_dw;
    row.embed_dssd = result.embed_dssd;
    return row;
  };

  out.baseline = run_one(base.train.history_capacity, 0.0);
  for (int history : history_sizes) {
    if (history < 0) throw std::invalid_argument("run_history_ablation: negative history size");
    out.rows.push_back(run_one(history, base.train.lambda_align));
  }
  return out;
}

// --------------------------------------------------------------------------
// Sliced counterexample
// --------------------------------------------------------------------------

Eigen::RowVector2d sample_disk(Rng& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform01());
  const double a = rng.uniform(0.0, 2.0 * M_PI);
  return {r * std::cos(a), r * std::sin(a)};
}

Eigen::RowVector2d sample_annulus(Rng& rng, double inner, double outer) {
  const double r = std::sqrt(inner * inner + rng.uniform01() * (outer * outer - inner * inner));
  const double a = rng.uniform(0.0, 2.0 * M_PI);
  return {r * std::cos(a), r * std::sin(a)};
}

SlicedCounterexampleOutcome run_sliced_counterexample(const SlicedCounterexampleConfig& config) {
  const double outer = std::sqrt(2.0);
  Rng rng(config.seed);
  PointSet disk(config.samples_per_side, 2), annulus(config.samples_per_side, 2);
  for (int i = 0; i < config.samples_per_side; ++i) {
    disk.row(i) = sample_disk(rng, outer);
    annulus.row(i) = sample_annulus(rng, 1.0, outer);
  }
  const auto sliced = sliced_ssd(disk, annulus, config.directions, config.seed ^ 0x0ddball);
  SlicedCounterexampleOutcome out;
  out.sliced_max = sliced.max_over_dirs;
  out.sliced_mean = sliced.mean_over_dirs;
  out.ssd_2d = ssd_discrete(disk, annulus);
  out.hausdorff_2d = hausdorff(disk, annulus);
  return out;
}

}  // namespace salign
