#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "salign/diffnet.hpp"
#include "salign/rng.hpp"
#include "salign/transport1d.hpp"

namespace salign {

// FIFO store of past scalar discriminator outputs. Stored values are plain
// numbers: they enter later assignments but never carry gradient.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(int capacity);

  void push(const Eigen::VectorXd& batch_outputs);
  int size() const { return static_cast<int>(values_.size()); }
  int capacity() const { return capacity_; }
  Eigen::VectorXd values() const;

 private:
  std::deque<double> values_;
  int capacity_;
};

// Appends batch outputs, evicting oldest entries beyond capacity.
void update_history(HistoryBuffer& buf, const Eigen::VectorXd& batch_outputs);

// The assignment-tolerance spectrum: 1-to-1 sorted matching, (beta+1)-to-1
// capacity assignment, and the infinite-tolerance nearest-neighbor form.
enum class AlignKind { distribution, relaxed, support };

struct AlignmentMode {
  AlignKind kind = AlignKind::support;
  int beta = 0;  // relaxed only; must be a non-negative integer
  GroundMetric metric = GroundMetric::absolute;
};

struct AlignmentResult {
  double loss = 0.0;
  // d loss / d entry, already masked: history entries are identically zero.
  Eigen::VectorXd grad_p;
  Eigen::VectorXd grad_q;
  // Entries at index >= live_offset are the differentiable current batch.
  int live_offset_p = 0;
  int live_offset_q = 0;
};

// Alignment loss on v = concat(history, current batch) per side.
//   support:      symmetric nearest-neighbor cost, each direction normalized
//                 by its own (n + m) count;
//   relaxed:      symmetric beta-capacity assignment cost (sizes must match);
//   distribution: sorted-pair 1D Wasserstein (sizes must match).
// History entries contribute to assignments and to the loss value, but the
// returned gradients are zero there.
AlignmentResult alignment_loss(const Eigen::VectorXd& v_p, const Eigen::VectorXd& v_q,
                               const AlignmentMode& mode, int history_p = 0, int history_q = 0);

// The trainable map producing target-side observables. The source side of the
// toys is a fixed pass-through, so only the q branch carries parameters.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual Eigen::MatrixXd map_p(const Eigen::MatrixXd& raw) { return raw; }
  virtual Eigen::MatrixXd map_q(const Eigen::MatrixXd& raw) = 0;  // caches for backward_q
  virtual void zero_grad() = 0;
  virtual void backward_q(const Eigen::MatrixXd& d_mapped) = 0;
  virtual void step(Optimizer& opt) = 0;
  virtual Eigen::VectorXd snapshot() const = 0;
};

// x -> x + theta, the pure-shift family.
class ShiftGenerator : public Generator {
 public:
  explicit ShiftGenerator(double theta_init) : theta_(theta_init) {}

  double theta() const { return theta_; }
  Eigen::MatrixXd map_q(const Eigen::MatrixXd& raw) override;
  void zero_grad() override { grad_ = 0.0; }
  void backward_q(const Eigen::MatrixXd& d_mapped) override { grad_ += d_mapped.sum(); }
  void step(Optimizer& opt) override;
  Eigen::VectorXd snapshot() const override;

 private:
  double theta_;
  double grad_ = 0.0;
};

// A small MLP feature map.
class MlpGenerator : public Generator {
 public:
  MlpGenerator(const std::vector<int>& dims, const std::vector<Activation>& activations, Rng& rng)
      : net_(dims, activations, rng) {}

  Network& net() { return net_; }
  Eigen::MatrixXd map_q(const Eigen::MatrixXd& raw) override;
  void zero_grad() override { net_.zero_grad(); }
  void backward_q(const Eigen::MatrixXd& d_mapped) override;
  void step(Optimizer& opt) override { optimizer_step(opt, net_); }
  Eigen::VectorXd snapshot() const override;

 private:
  Network net_;
};

// Raw-sample sources for both sides; matrices are (batch x dim).
struct Samplers {
  int dim = 1;
  std::function<Eigen::MatrixXd(int, Rng&)> sample_p;
  std::function<Eigen::MatrixXd(int, Rng&)> sample_q;
};

struct TrainConfig {
  int batch_size = 128;        // m
  int history_capacity = 1000; // n
  int steps = 5000;
  double lambda_align = 1.0;
  double disc_lr = 1e-3;
  double gen_lr = 1e-3;
  double adam_beta1 = 0.9;  // 0.5 tames adversarial oscillation on the 2D toy
  std::vector<int> disc_hidden = {64, 64};
  std::uint64_t seed = 1;
  int eval_every = 0;  // 0: evaluate at the initial and final state only
};

struct StepMetrics {
  int step = 0;
  double disc_loss = 0.0;
  double align_loss = 0.0;
};

struct EvalResult {
  double d_w = 0.0;
  double d_ssd = 0.0;
};

// Checkpoint evaluation hook: observable-space divergences for the current
// generator/discriminator pair. Must not touch the training rng; the fixed
// eval seed is passed in.
using Evaluator = std::function<EvalResult(Generator&, Network&, std::uint64_t)>;

struct CheckpointRow {
  int step = 0;
  EvalResult eval;
  Eigen::VectorXd snapshot;
};

struct TrainingTrace {
  std::vector<StepMetrics> steps;
  std::vector<CheckpointRow> checkpoints;
};

struct TrainResult {
  TrainingTrace trace;
  Network discriminator;
};

// Mutable pieces of one training run.
struct AsaState {
  Network disc;
  Optimizer opt_disc;
  Optimizer opt_gen;
  HistoryBuffer h_p;
  HistoryBuffer h_q;
  Rng rng;
  int step = 0;
};

// One iteration of the adversarial loop: sample batches; one discriminator
// step on the logistic loss; rebuild the 1D outputs with the updated
// discriminator; assignment-based alignment loss on concat(history, batch);
// one generator step on its (lambda-scaled) gradient; push both histories.
StepMetrics asa_step(AsaState& state, Generator& gen, const Samplers& samplers,
                     const TrainConfig& config, const AlignmentMode& mode);

// Runs the loop for config.steps, evaluating at step 0, every eval_every
// steps (when positive) and at the end. Fully deterministic given the seed.
TrainResult run_training(const Samplers& samplers, Generator& gen, const TrainConfig& config,
                         const AlignmentMode& mode, const Evaluator& evaluator = {});

// Trace CSV: step,disc_loss,align_loss,D_W_eval,D_ssd_eval,snapshot columns.
// Eval columns are filled on checkpoint rows and empty elsewhere.
void write_trace_csv(std::ostream& out, const TrainingTrace& trace);

}  // namespace salign
