#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "salign/rng.hpp"

namespace salign {

enum class Activation { identity, leaky_relu, tanh_act };  // leaky slope 0.2

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::identity;
};

// Minimal feed-forward network with exact reverse-mode gradients. Columns of
// every matrix are samples. Single-writer: training mutates it in place;
// forward caches the activations the next backward consumes, and mutating the
// parameters invalidates that cache.
class Network {
 public:
  Network() = default;
  // dims = {in, h1, ..., out}; one activation per layer. Weights start
  // Kaiming-style uniform in +-sqrt(6 / fan_in), biases at zero.
  Network(const std::vector<int>& dims, const std::vector<Activation>& activations, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs);
  // Propagates d loss / d outputs back through the cached forward pass,
  // accumulating parameter gradients; returns d loss / d inputs so alignment
  // losses can flow through the discriminator into a generator.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& output_grad);

  void zero_grad();

  int input_dim() const;
  int output_dim() const;
  int parameter_count() const;
  const std::vector<Layer>& layers() const { return layers_; }

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& params);
  Eigen::VectorXd flat_gradients() const;

  // Snapshot format: one header line with the layer shapes and activations,
  // then one line per weight row / bias vector.
  void save(std::ostream& out) const;
  static Network load(std::istream& in);

 private:
  std::vector<Layer> layers_;
  std::vector<Eigen::MatrixXd> weight_grads_;
  std::vector<Eigen::VectorXd> bias_grads_;
  std::vector<Eigen::MatrixXd> inputs_;    // forward cache, per layer
  std::vector<Eigen::MatrixXd> preacts_;
  bool cache_valid_ = false;

  friend void optimizer_step(class Optimizer&, Network&);
};

struct LogisticLossResult {
  double loss = 0.0;
  Eigen::VectorXd grad_p;  // d loss / d logits_p
  Eigen::VectorXd grad_q;
};

// Mean softplus(-g(x^p)) + mean softplus(g(x^q)): the log-loss discriminator
// objective in logit form. Softplus branches at |z| > 30 to stay finite.
LogisticLossResult logistic_discriminator_loss(const Eigen::VectorXd& logits_p,
                                               const Eigen::VectorXd& logits_q);

double stable_softplus(double z);
double stable_sigmoid(double z);

// SGD-with-momentum / Adam over a flat parameter vector. Moment buffers are
// sized on first use and must keep matching the parameter count afterwards.
class Optimizer {
 public:
  enum class Kind { sgd_momentum, adam };

  static Optimizer sgd(double lr, double momentum = 0.9);
  static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads);
  long step_count() const { return steps_; }

 private:
  Kind kind_ = Kind::adam;
  double lr_ = 1e-3, momentum_ = 0.9, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  Eigen::VectorXd m_, v_;
  long steps_ = 0;
};

// One optimizer step on the network's own gradient buffers.
void optimizer_step(Optimizer& opt, Network& net);

}  // namespace salign
