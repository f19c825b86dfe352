#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "salign/analytic.hpp"
#include "salign/asa.hpp"
#include "salign/supportdiv.hpp"

namespace salign {

// Mean transport cost between equal-size 1D samples (sorted matching).
double empirical_wasserstein_1d(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                GroundMetric metric);

// Exact minimum-cost perfect matching between equal-size point sets
// (Jonker-Volgenant over the dense pairwise matrix); returns the mean cost.
// metric::absolute uses Euclidean distances, metric::squared their squares.
// Evaluation-only: this is how the 2D embedding D_W numbers are produced.
double empirical_wasserstein_nd(const PointSet& a, const PointSet& b, GroundMetric metric);

// Exact solver behind empirical_wasserstein_nd; returns row -> column.
std::vector<int> solve_linear_assignment(const Eigen::MatrixXd& cost);

// ---------------------------------------------------------------------------
// Beta-shift toy: fixed p = Beta(4,2) on [0,1], movable q_theta = shifted
// Beta(2,4) on [theta, theta+1], theta trained by the alignment loop.
// Evaluations use the squared ground metric (the scale the reported initial
// values 11.12 / 14.9 correspond to): D_W from a large sorted empirical
// matching, D_ssd by Monte Carlo against the true supports.
// ---------------------------------------------------------------------------

struct BetaShiftConfig {
  TrainConfig train;
  AlignmentMode mode{AlignKind::support, 0, GroundMetric::absolute};
  double theta_init = -3.0;
  int eval_samples = 10000;
};

struct BetaShiftOutcome {
  TrainResult result;
  double theta_final = 0.0;
  EvalResult initial;
  EvalResult final_state;
};

BetaShiftOutcome run_beta_shift(const BetaShiftConfig& config);

// ---------------------------------------------------------------------------
// 2D Gaussian-mixture toy: source is 3 balanced clusters, target the same
// clusters translated with mixture weights proportional to rank^(-alpha).
// A small MLP feature map moves the target embeddings; the source side is
// fixed. Final divergences are reported between embeddings normalized as in
// the evaluation protocol (pooled mean 0, pooled average norm 1) and between
// the discriminator-output pushforwards.
// ---------------------------------------------------------------------------

struct Mixture2dConfig {
  // The adversarial pair needs gentler rates than the 1D toy to settle.
  static TrainConfig train_defaults() {
    TrainConfig t;
    t.steps = 16000;
    t.disc_lr = 5e-4;
    t.gen_lr = 3e-4;
    t.adam_beta1 = 0.5;
    return t;
  }

  TrainConfig train = train_defaults();
  AlignmentMode mode{AlignKind::support, 0, GroundMetric::absolute};
  double alpha = 1.5;
  int eval_samples = 1000;
  double cluster_radius = 2.0;
  double cluster_sigma = 0.7;
  double target_offset = 4.0;           // translation of the raw target mixture
  std::vector<int> gen_hidden = {32, 32};
};

struct Mixture2dOutcome {
  TrainResult result;
  double embed_dw = 0.0;    // exact assignment cost, normalized embeddings
  double embed_dssd = 0.0;  // discrete SSD, normalized embeddings
  double push_dw = 0.0;     // sorted 1D matching between logit samples
  double push_dssd = 0.0;   // symmetric NN cost between logit samples
  // Fraction of evaluation samples from each target cluster whose embedding
  // lands nearest to the matching source cluster center.
  std::vector<double> cluster_match;
};

Mixture2dOutcome run_mixture2d(const Mixture2dConfig& config);

// ---------------------------------------------------------------------------
// History-size ablation: repeats the mixture run in support mode across
// history capacities, plus an unaligned (lambda = 0) baseline, reporting the
// divergences between discriminator-output pushforwards.
// ---------------------------------------------------------------------------

struct HistoryAblationRow {
  int history = 0;
  double push_dw = 0.0;
  double push_dssd = 0.0;
  double embed_dw = 0.0;
  double embed_dssd = 0.0;
};

struct HistoryAblationOutcome {
  std::vector<HistoryAblationRow> rows;
  HistoryAblationRow baseline;  // lambda_align = 0
};

HistoryAblationOutcome run_history_ablation(const Mixture2dConfig& base,
                                            const std::vector<int>& history_sizes);

// ---------------------------------------------------------------------------
// Sliced counterexample: uniform disk of radius sqrt(2) vs the annulus with
// radii [1, sqrt(2)]. Every 1D projection shares its support, so the sliced
// cost collapses while the full 2D SSD stays near 1/6.
// ---------------------------------------------------------------------------

Eigen::RowVector2d sample_disk(Rng& rng, double radius);
Eigen::RowVector2d sample_annulus(Rng& rng, double inner, double outer);

struct SlicedCounterexampleConfig {
  int samples_per_side = 2000;
  int directions = 64;
  std::uint64_t seed = 1;
};

struct SlicedCounterexampleOutcome {
  double sliced_max = 0.0;
  double sliced_mean = 0.0;
  double ssd_2d = 0.0;
  double hausdorff_2d = 0.0;
};

SlicedCounterexampleOutcome run_sliced_counterexample(const SlicedCounterexampleConfig& config);

}  // namespace salign
