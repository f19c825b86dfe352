#include "salign/diffnet.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace salign {

namespace {

double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::identity: return z;
    case Activation::leaky_relu: return z > 0.0 ? z : 0.2 * z;
    case Activation::tanh_act: return std::tanh(z);
  }
  return z;
}

double activation_slope(Activation act, double z) {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::leaky_relu: return z > 0.0 ? 1.0 : 0.2;
    case Activation::tanh_act: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh_act: return "tanh";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh_act;
  throw std::invalid_argument("Network: unknown activation '" + name + "'");
}

}  // namespace

Network::Network(const std::vector<int>& dims, const std::vector<Activation>& activations,
                 Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("Network: need at least one layer");
  if (activations.size() != dims.size() - 1)
    throw std::invalid_argument("Network: one activation per layer required");
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("Network: bad layer width");
    Layer layer;
    layer.weight.resize(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = activations[l];
    layers_.push_back(std::move(layer));
  }
  zero_grad();
}

int Network::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Network::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

int Network::parameter_count() const {
  int n = 0;
  for (const auto& layer : layers_) n += static_cast<int>(layer.weight.size() + layer.bias.size());
  return n;
}

void Network::zero_grad() {
  weight_grads_.resize(layers_.size());
  bias_grads_.resize(layers_.size());
  for (size_t l = 0; l < layers_.size(); ++l) {
    weight_grads_[l] = Eigen::MatrixXd::Zero(layers_[l].weight.rows(), layers_[l].weight.cols());
    bias_grads_[l] = Eigen::VectorXd::Zero(layers_[l].bias.size());
  }
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& inputs) {
  if (layers_.empty()) throw std::logic_error("Network: empty");
  if (inputs.rows() != input_dim()) throw std::invalid_argument("Network: input width mismatch");
  inputs_.assign(layers_.size(), {});
  preacts_.assign(layers_.size(), {});
  Eigen::MatrixXd x = inputs;
  for (size_t l = 0; l < layers_.size(); ++l) {
    inputs_[l] = x;
    Eigen::MatrixXd z = (layers_[l].weight * x).colwise() + layers_[l].bias;
    preacts_[l] = z;
    x = z.unaryExpr([&](double v) { return apply_activation(layers_[l].activation, v); });
  }
  cache_valid_ = true;
  return x;
}

Eigen::MatrixXd Network::backward(const Eigen::MatrixXd& output_grad) {
  if (!cache_valid_) throw std::logic_error("Network: backward without a cached forward pass");
  if (output_grad.rows() != output_dim() || output_grad.cols() != preacts_.back().cols())
    throw std::invalid_argument("Network: output gradient shape mismatch");
  Eigen::MatrixXd dx = output_grad;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd dz = dx.array() * preacts_[l].unaryExpr([&](double v) {
                                                return activation_slope(layers_[l].activation, v);
                                              }).array();
    weight_grads_[l].noalias() += dz * inputs_[l].transpose();
    bias_grads_[l] += dz.rowwise().sum();
    dx.noalias() = layers_[l].weight.transpose() * dz;
  }
  cache_valid_ = false;
  return dx;
}

Eigen::VectorXd Network::flat_parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (const auto& layer : layers_) {
    flat.segment(at, layer.weight.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.weight.data(), layer.weight.size());
    at += layer.weight.size();
    flat.segment(at, layer.bias.size()) = layer.bias;
    at += layer.bias.size();
  }
  return flat;
}

void Network::set_flat_parameters(const Eigen::VectorXd& params) {
  if (params.size() != parameter_count())
    throw std::invalid_argument("Network: flat parameter size mismatch");
  Eigen::Index at = 0;
  for (auto& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()) =
        params.segment(at, layer.weight.size());
    at += layer.weight.size();
    layer.bias = params.segment(at, layer.bias.size());
    at += layer.bias.size();
  }
  cache_valid_ = false;
  if (!params.allFinite()) throw std::invalid_argument("Network: non-finite parameters");
}

Eigen::VectorXd Network::flat_gradients() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    flat.segment(at, weight_grads_[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weight_grads_[l].data(), weight_grads_[l].size());
    at += weight_grads_[l].size();
    flat.segment(at, bias_grads_[l].size()) = bias_grads_[l];
    at += bias_grads_[l].size();
  }
  return flat;
}

void Network::save(std::ostream& out) const {
  out.precision(17);
  out << "layers " << layers_.size() << "\n";
  for (const auto& layer : layers_) {
    out << layer.weight.rows() << " " << layer.weight.cols() << " "
        << activation_name(layer.activation) << "\n";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        out << layer.weight(r, c) << (c + 1 < layer.weight.cols() ? " " : "\n");
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      out << layer.bias[r] << (r + 1 < layer.bias.size() ? " " : "");
    }
    out << "\n";
  }
}

Network Network::load(std::istream& in) {
  std::string tag;
  size_t n_layers = 0;
  in >> tag >> n_layers;
  if (tag != "layers" || !in) throw std::invalid_argument("Network: bad snapshot header");
  Network net;
  for (size_t l = 0; l < n_layers; ++l) {
    Eigen::Index rows = 0, cols = 0;
    std::string act;
    in >> rows >> cols >> act;
    if (!in || rows < 1 || cols < 1) throw std::invalid_argument("Network: bad layer header");
    Layer layer;
    layer.activation = activation_from_name(act);
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) in >> layer.weight(r, c);
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) in >> layer.bias[r];
    if (!in) throw std::invalid_argument("Network: truncated snapshot");
    net.layers_.push_back(std::move(layer));
  }
  net.zero_grad();
  return net;
}

double stable_softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticLossResult logistic_discriminator_loss(const Eigen::VectorXd& logits_p,
                                               const Eigen::VectorXd& logits_q) {
  if (logits_p.size() == 0 || logits_q.size() == 0)
    throw std::invalid_argument("logistic_discriminator_loss: empty batch");
  if (!logits_p.allFinite() || !logits_q.allFinite())
    throw std::invalid_argument("logistic_discriminator_loss: non-finite logit");
  LogisticLossResult out;
  const double np = static_cast<double>(logits_p.size());
  const double nq = static_cast<double>(logits_q.size());
  out.grad_p.resize(logits_p.size());
  out.grad_q.resize(logits_q.size());
  for (Eigen::Index i = 0; i < logits_p.size(); ++i) {
    out.loss += stable_softplus(-logits_p[i]) / np;
    out.grad_p[i] = -stable_sigmoid(-logits_p[i]) / np;
  }
  for (Eigen::Index i = 0; i < logits_q.size(); ++i) {
    out.loss += stable_softplus(logits_q[i]) / nq;
    out.grad_q[i] = stable_sigmoid(logits_q[i]) / nq;
  }
  return out;
}

Optimizer Optimizer::sgd(double lr, double momentum) {
  Optimizer opt;
  opt.kind_ = Kind::sgd_momentum;
  opt.lr_ = lr;
  opt.momentum_ = momentum;
  return opt;
}

Optimizer Optimizer::adam(double lr, double beta1, double beta2, double eps) {
  Optimizer opt;
  opt.kind_ = Kind::adam;
  opt.lr_ = lr;
  opt.beta1_ = beta1;
  opt.beta2_ = beta2;
  opt.eps_ = eps;
  return opt;
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Optimizer: shape mismatch");
  if (m_.size() == 0) {
    m_ = Eigen::VectorXd::Zero(params.size());
    if (kind_ == Kind::adam) v_ = Eigen::VectorXd::Zero(params.size());
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Optimizer: parameter count changed");
  ++steps_;
  if (kind_ == Kind::sgd_momentum) {
    m_ = momentum_ * m_ + grads;
    params -= lr_ * m_;
    return;
  }
  m_ = beta1_ * m_ + (1.0 - beta1_) * grads;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

void optimizer_step(Optimizer& opt, Network& net) {
  Eigen::VectorXd params = net.flat_parameters();
  opt.step(params, net.flat_gradients());
  net.set_flat_parameters(params);
}

}  // namespace salign
