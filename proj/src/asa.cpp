#include "salign/asa.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace salign {

HistoryBuffer::HistoryBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 0) throw std::invalid_argument("HistoryBuffer: negative capacity");
}

void HistoryBuffer::push(const Eigen::VectorXd& batch_outputs) {
  for (Eigen::Index i = 0; i < batch_outputs.size(); ++i) values_.push_back(batch_outputs[i]);
  while (static_cast<int>(values_.size()) > capacity_) values_.pop_front();
}

Eigen::VectorXd HistoryBuffer::values() const {
  Eigen::VectorXd out(values_.size());
  Eigen::Index k = 0;
  for (double v : values_) out[k++] = v;
  return out;
}

void update_history(HistoryBuffer& buf, const Eigen::VectorXd& batch_outputs) {
  buf.push(batch_outputs);
}

namespace {

// Adds the gradient of mean_i d(src[pair.first], dst[pair.second]) over a
// plan to both endpoint gradients.
void accumulate_plan_gradient(const Assignment& plan, const Eigen::VectorXd& src,
                              const Eigen::VectorXd& dst, GroundMetric metric,
                              Eigen::VectorXd& grad_src, Eigen::VectorXd& grad_dst) {
  const double scale = 1.0 / static_cast<double>(plan.pairs.size());
  for (const auto& [i, j] : plan.pairs) {
    const double ddx = ground_distance_ddx(metric, src[i], dst[j]);
    grad_src[i] += scale * ddx;
    grad_dst[j] -= scale * ddx;
  }
}

}  // namespace

AlignmentResult alignment_loss(const Eigen::VectorXd& v_p, const Eigen::VectorXd& v_q,
                               const AlignmentMode& mode, int history_p, int history_q) {
  if (v_p.size() == 0 || v_q.size() == 0)
    throw std::invalid_argument("alignment_loss: empty inputs");
  if (history_p > v_p.size() || history_q > v_q.size() || history_p < 0 || history_q < 0)
    throw std::invalid_argument("alignment_loss: bad history split");

  const auto sp = make_scalars(v_p);
  const auto sq = make_scalars(v_q);
  AlignmentResult out;
  out.grad_p = Eigen::VectorXd::Zero(v_p.size());
  out.grad_q = Eigen::VectorXd::Zero(v_q.size());
  out.live_offset_p = history_p;
  out.live_offset_q = history_q;

  switch (mode.kind) {
    case AlignKind::support: {
      const auto forward = nn_assignment_1d(sp, sq, mode.metric);
      const auto backward = nn_assignment_1d(sq, sp, mode.metric);
      out.loss = forward.cost + backward.cost;
      accumulate_plan_gradient(forward, v_p, v_q, mode.metric, out.grad_p, out.grad_q);
      accumulate_plan_gradient(backward, v_q, v_p, mode.metric, out.grad_q, out.grad_p);
      break;
    }
    case AlignKind::relaxed: {
      if (v_p.size() != v_q.size())
        throw std::invalid_argument("alignment_loss: relaxed mode needs equal sizes");
      const auto forward = relaxed_ot_1d(sp, sq, mode.beta, mode.metric);
      const auto backward = relaxed_ot_1d(sq, sp, mode.beta, mode.metric);
      out.loss = forward.cost + backward.cost;
      accumulate_plan_gradient(forward, v_p, v_q, mode.metric, out.grad_p, out.grad_q);
      accumulate_plan_gradient(backward, v_q, v_p, mode.metric, out.grad_q, out.grad_p);
      break;
    }
    case AlignKind::distribution: {
      if (v_p.size() != v_q.size())
        throw std::invalid_argument("alignment_loss: distribution mode needs equal sizes");
      const auto plan = wasserstein1_1d(sp, sq, mode.metric);
      out.loss = plan.cost;
      accumulate_plan_gradient(plan, v_p, v_q, mode.metric, out.grad_p, out.grad_q);
      break;
    }
  }

  // History entries never carry gradient.
  out.grad_p.head(history_p).setZero();
  out.grad_q.head(history_q).setZero();
  return out;
}

Eigen::MatrixXd ShiftGenerator::map_q(const Eigen::MatrixXd& raw) {
  return raw.array() + theta_;
}

void ShiftGenerator::step(Optimizer& opt) {
  Eigen::VectorXd param(1), grad(1);
  param[0] = theta_;
  grad[0] = grad_;
  opt.step(param, grad);
  theta_ = param[0];
}

Eigen::VectorXd ShiftGenerator::snapshot() const {
  Eigen::VectorXd s(1);
  s[0] = theta_;
  return s;
}

Eigen::MatrixXd MlpGenerator::map_q(const Eigen::MatrixXd& raw) {
  return net_.forward(raw.transpose()).transpose();
}

void MlpGenerator::backward_q(const Eigen::MatrixXd& d_mapped) {
  net_.backward(d_mapped.transpose());
}

Eigen::VectorXd MlpGenerator::snapshot() const {
  Eigen::VectorXd s(1);
  s[0] = net_.flat_parameters().norm();
  return s;
}

StepMetrics asa_step(AsaState& state, Generator& gen, const Samplers& samplers,
                     const TrainConfig& config, const AlignmentMode& mode) {
  const int m = config.batch_size;

  // line 2: sample mini-batches
  const Eigen::MatrixXd raw_p = samplers.sample_p(m, state.rng);
  const Eigen::MatrixXd raw_q = samplers.sample_q(m, state.rng);
  const Eigen::MatrixXd x_p = gen.map_p(raw_p);
  const Eigen::MatrixXd x_q = gen.map_q(raw_q);

  // line 3: discriminator step on the logistic loss
  state.disc.zero_grad();
  const Eigen::VectorXd logits_p = state.disc.forward(x_p.transpose()).row(0);
  const Eigen::VectorXd logits_q = state.disc.forward(x_q.transpose()).row(0);
  const auto disc_loss = logistic_discriminator_loss(logits_p, logits_q);
  state.disc.backward(disc_loss.grad_q.transpose());
  state.disc.forward(x_p.transpose());
  state.disc.backward(disc_loss.grad_p.transpose());
  optimizer_step(state.opt_disc, state.disc);

  // line 4: 1D outputs under the updated discriminator, widened by history
  const Eigen::VectorXd out_p = state.disc.forward(x_p.transpose()).row(0);
  const Eigen::VectorXd out_q = state.disc.forward(x_q.transpose()).row(0);
  const Eigen::VectorXd hist_p = state.h_p.values();
  const Eigen::VectorXd hist_q = state.h_q.values();
  Eigen::VectorXd v_p(hist_p.size() + m), v_q(hist_q.size() + m);
  v_p << hist_p, out_p;
  v_q << hist_q, out_q;

  // lines 5-6: assignment-based alignment loss, one generator step
  const auto align = alignment_loss(v_p, v_q, mode, state.h_p.size(), state.h_q.size());
  if (!std::isfinite(align.loss) || !std::isfinite(disc_loss.loss)) {
    throw std::runtime_error("asa_step: non-finite loss at step " + std::to_string(state.step) +
                             " (disc " + std::to_string(disc_loss.loss) + ", align " +
                             std::to_string(align.loss) + ")");
  }
  // Only the current q-batch flows back into the generator: the source side
  // is fixed and history entries are masked off inside alignment_loss.
  const Eigen::VectorXd grad_q_live = config.lambda_align * align.grad_q.tail(m);
  state.disc.zero_grad();
  state.disc.forward(x_q.transpose());
  const Eigen::MatrixXd d_xq = state.disc.backward(grad_q_live.transpose()).transpose();
  gen.zero_grad();
  gen.backward_q(d_xq);
  gen.step(state.opt_gen);

  // line 7: histories learn this step's outputs, detached
  state.h_p.push(out_p);
  state.h_q.push(out_q);

  ++state.step;
  return {state.step, disc_loss.loss, align.loss};
}

TrainResult run_training(const Samplers& samplers, Generator& gen, const TrainConfig& config,
                         const AlignmentMode& mode, const Evaluator& evaluator) {
  if (config.batch_size < 1) throw std::invalid_argument("run_training: batch_size < 1");
  if (config.lambda_align < 0) throw std::invalid_argument("run_training: lambda_align < 0");

  Rng init_rng(config.seed);
  std::vector<int> dims{samplers.dim};
  std::vector<Activation> acts;
  for (int h : config.disc_hidden) {
    dims.push_back(h);
    acts.push_back(Activation::leaky_relu);
  }
  dims.push_back(1);
  acts.push_back(Activation::identity);

  AsaState state{
      Network(dims, acts, init_rng),
      Optimizer::adam(config.disc_lr, config.adam_beta1),
      Optimizer::adam(config.gen_lr, config.adam_beta1),
      HistoryBuffer(config.history_capacity),
      HistoryBuffer(config.history_capacity),
      Rng(config.seed ^ 0x5851f42d4c957f2dull),
      0,
  };

  const std::uint64_t eval_seed = config.seed ^ 0x9e3779b97f4a7c15ull;
  TrainResult result;
  auto checkpoint = [&](int step) {
    CheckpointRow row;
    row.step = step;
    row.snapshot = gen.snapshot();
    if (evaluator) row.eval = evaluator(gen, state.disc, eval_seed);
    result.trace.checkpoints.push_back(std::move(row));
  };

  checkpoint(0);
  for (int step = 0; step < config.steps; ++step) {
    result.trace.steps.push_back(asa_step(state, gen, samplers, config, mode));
    const bool last = step + 1 == config.steps;
    if ((config.eval_every > 0 && (step + 1) % config.eval_every == 0 && !last) || last) {
      checkpoint(step + 1);
    }
  }
  result.discriminator = std::move(state.disc);
  return result;
}

void write_trace_csv(std::ostream& out, const TrainingTrace& trace) {
  out.precision(12);
  int snapshot_cols = 0;
  for (const auto& row : trace.checkpoints)
    snapshot_cols = std::max(snapshot_cols, static_cast<int>(row.snapshot.size()));
  out << "step,disc_loss,align_loss,D_W_eval,D_ssd_eval";
  for (int k = 0; k < snapshot_cols; ++k) out << ",snapshot_" << k;
  out << "\n";

  auto write_checkpoint = [&](const CheckpointRow& row) {
    out << row.step << ",,," << row.eval.d_w << "," << row.eval.d_ssd;
    for (int k = 0; k < snapshot_cols; ++k) {
      out << ",";
      if (k < row.snapshot.size()) out << row.snapshot[k];
    }
    out << "\n";
  };

  size_t next_checkpoint = 0;
  if (!trace.checkpoints.empty() && trace.checkpoints[0].step == 0) {
    write_checkpoint(trace.checkpoints[0]);
    next_checkpoint = 1;
  }
  for (const auto& s : trace.steps) {
    out << s.step << "," << s.disc_loss << "," << s.align_loss << ",,";
    for (int k = 0; k < snapshot_cols; ++k) out << ",";
    out << "\n";
    while (next_checkpoint < trace.checkpoints.size() &&
           trace.checkpoints[next_checkpoint].step == s.step) {
      write_checkpoint(trace.checkpoints[next_checkpoint]);
      ++next_checkpoint;
    }
  }
}

}  // namespace salign
