#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "salign/diffnet.hpp"
#include "salign/rng.hpp"

using namespace salign;

namespace {

Network tiny_identity_net() {
  Rng rng(1);
  Network net({1, 1}, {Activation::identity}, rng);
  Eigen::VectorXd params(2);
  params << 1.0, 0.0;  // weight 1, bias 0
  net.set_flat_parameters(params);
  return net;
}

Network random_net(Rng& rng, const std::vector<int>& dims,
                   const std::vector<Activation>& acts) {
  return Network(dims, acts, rng);
}

// Central finite differences of a scalar loss over the flat parameters.
Eigen::VectorXd finite_difference_grad(Network& net, const std::function<double(Network&)>& loss,
                                       double h) {
  const Eigen::VectorXd base = net.flat_parameters();
  Eigen::VectorXd grad(base.size());
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    Eigen::VectorXd bumped = base;
    bumped[k] = base[k] + h;
    net.set_flat_parameters(bumped);
    const double up = loss(net);
    bumped[k] = base[k] - h;
    net.set_flat_parameters(bumped);
    const double down = loss(net);
    grad[k] = (up - down) / (2.0 * h);
  }
  net.set_flat_parameters(base);
  return grad;
}

double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double denom = std::max({std::abs(a[k]), std::abs(b[k]), 1e-4});
    worst = std::max(worst, std::abs(a[k] - b[k]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("forward examples") {
  Rng rng(5);
  Network zero({2, 3}, {Activation::identity}, rng);
  zero.set_flat_parameters(Eigen::VectorXd::Zero(zero.parameter_count()));
  Eigen::MatrixXd x(2, 4);
  x.setRandom();
  CHECK(zero.forward(x).cwiseAbs().maxCoeff() == 0.0);

  Network affine({1, 1}, {Activation::identity}, rng);
  Eigen::VectorXd params(2);
  params << 2.0, 1.0;
  affine.set_flat_parameters(params);
  Eigen::MatrixXd in(1, 1);
  in << 3.0;
  CHECK(affine.forward(in)(0, 0) == doctest::Approx(7.0));

  Network tanh_net({1, 1}, {Activation::tanh_act}, rng);
  params << 1.5, 0.0;
  tanh_net.set_flat_parameters(params);
  in << 0.0;
  CHECK(tanh_net.forward(in)(0, 0) == doctest::Approx(0.0));

  Eigen::MatrixXd wrong(3, 1);
  wrong.setZero();
  CHECK_THROWS(affine.forward(wrong));
}

TEST_CASE("logistic loss values and gradients") {
  Eigen::VectorXd zeros1(1);
  zeros1 << 0.0;
  auto r = logistic_discriminator_loss(zeros1, zeros1);
  CHECK(r.loss == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(r.grad_p[0] == doctest::Approx(-0.5));
  CHECK(r.grad_q[0] == doctest::Approx(0.5));

  Eigen::VectorXd big(1), small(1);
  big << 40.0;
  small << -40.0;
  CHECK(logistic_discriminator_loss(big, small).loss == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(logistic_discriminator_loss(zeros1, one).loss ==
        doctest::Approx(std::log(2.0) + std::log(1.0 + std::exp(1.0))));

  // branching changes nothing beyond 1e-13
  CHECK(std::abs(stable_softplus(30.5) - (30.5 + std::log1p(std::exp(-30.5)))) < 1e-13);
  CHECK(std::abs(stable_softplus(-30.5) - std::log1p(std::exp(-30.5))) < 1e-13);
  CHECK(stable_sigmoid(500.0) == doctest::Approx(1.0));
  CHECK(stable_sigmoid(-500.0) == doctest::Approx(0.0));

  Eigen::VectorXd nan1(1);
  nan1 << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(logistic_discriminator_loss(nan1, one));
}

TEST_CASE("backward basics") {
  auto net = tiny_identity_net();
  Eigen::MatrixXd in(1, 1);
  in << 0.3;
  net.forward(in);
  Eigen::MatrixXd og(1, 1);
  og << 1.0;
  const auto input_grad = net.backward(og);
  CHECK(input_grad(0, 0) == doctest::Approx(1.0));

  // cache is consumed by backward and invalidated by parameter writes
  CHECK_THROWS(net.backward(og));
  net.forward(in);
  net.set_flat_parameters(net.flat_parameters());
  CHECK_THROWS(net.backward(og));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(90210);
  const std::vector<std::vector<int>> shapes = {{1, 8, 1}, {2, 6, 6, 1}, {3, 5, 1}};
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto& dims = shapes[trial % shapes.size()];
    std::vector<Activation> acts(dims.size() - 1, trial % 2 == 0 ? Activation::leaky_relu
                                                                 : Activation::tanh_act);
    acts.back() = Activation::identity;
    Network net(dims, acts, rng);
    Eigen::MatrixXd xp(dims.front(), 5), xq(dims.front(), 5);
    for (Eigen::Index i = 0; i < xp.size(); ++i) xp.data()[i] = rng.uniform(-1.5, 1.5);
    for (Eigen::Index i = 0; i < xq.size(); ++i) xq.data()[i] = rng.uniform(-1.5, 1.5);

    auto loss_fn = [&](Network& n) {
      const Eigen::VectorXd lp = n.forward(xp).row(0);
      const Eigen::VectorXd lq = n.forward(xq).row(0);
      return logistic_discriminator_loss(lp, lq).loss;
    };

    net.zero_grad();
    const Eigen::VectorXd lp = net.forward(xp).row(0);
    auto loss = logistic_discriminator_loss(lp, net.forward(xq).row(0));
    // q side is cached; run its backward first, then redo p's forward.
    net.backward(loss.grad_q.transpose());
    net.forward(xp);
    net.backward(loss.grad_p.transpose());

    const Eigen::VectorXd analytic = net.flat_gradients();
    const Eigen::VectorXd numeric = finite_difference_grad(net, loss_fn, 1e-5);
    CHECK(max_rel_error(analytic, numeric) < 1e-4);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("multi-output gradients match finite differences") {
  Rng rng(314);
  Network net({2, 6, 3}, {Activation::tanh_act, Activation::identity}, rng);
  Eigen::MatrixXd x(2, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);

  auto loss_fn = [&](Network& n) {
    const Eigen::MatrixXd y = n.forward(x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += stable_softplus(y.data()[i]);
    return total;
  };

  net.zero_grad();
  const Eigen::MatrixXd y = net.forward(x);
  net.backward(y.unaryExpr([](double v) { return stable_sigmoid(v); }));
  CHECK(max_rel_error(net.flat_gradients(), finite_difference_grad(net, loss_fn, 1e-5)) < 1e-4);
}

TEST_CASE("input gradients match finite differences") {
  Rng rng(777);
  Network net({2, 8, 1}, {Activation::leaky_relu, Activation::identity}, rng);
  Eigen::MatrixXd x(2, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);

  net.forward(x);
  Eigen::MatrixXd og = Eigen::MatrixXd::Ones(1, 3);
  const Eigen::MatrixXd dx = net.backward(og);

  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd xb = x;
    xb.data()[i] = x.data()[i] + h;
    const double up = net.forward(xb).sum();
    xb.data()[i] = x.data()[i] - h;
    const double down = net.forward(xb).sum();
    CHECK(dx.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4));
  }
}

TEST_CASE("optimizer updates") {
  Eigen::VectorXd p(1), g(1);

  // zero gradient leaves parameters alone
  auto adam = Optimizer::adam(0.1);
  p << 1.0;
  g << 0.0;
  adam.step(p, g);
  CHECK(p[0] == doctest::Approx(1.0));

  auto sgd = Optimizer::sgd(0.1, 0.9);
  p << 1.0;
  g << 2.0;
  sgd.step(p, g);
  CHECK(p[0] == doctest::Approx(0.8));

  // Adam's first bias-corrected step is ~ -lr * sign(gradient)
  auto adam2 = Optimizer::adam(0.01);
  p << 0.5;
  g << -3.7;
  adam2.step(p, g);
  CHECK(p[0] == doctest::Approx(0.5 + 0.01).epsilon(1e-5));

  Eigen::VectorXd p2(2);
  p2.setZero();
  CHECK_THROWS(adam2.step(p2, Eigen::VectorXd::Zero(2)));  // parameter count changed
}

TEST_CASE("discriminator training drives separable loss down") {
  Rng rng(8);
  Network net({1, 64, 64, 1},
              {Activation::leaky_relu, Activation::leaky_relu, Activation::identity}, rng);
  auto opt = Optimizer::adam(0.05);
  Eigen::MatrixXd xp(1, 32), xq(1, 32);
  for (int i = 0; i < 32; ++i) {
    xp(0, i) = 2.0 + rng.uniform(-0.1, 0.1);
    xq(0, i) = -2.0 + rng.uniform(-0.1, 0.1);
  }
  double loss = 0.0;
  for (int step = 0; step < 200; ++step) {
    net.zero_grad();
    const Eigen::VectorXd lp = net.forward(xp).row(0);
    auto r = logistic_discriminator_loss(lp, net.forward(xq).row(0));
    net.backward(r.grad_q.transpose());
    net.forward(xp);
    net.backward(r.grad_p.transpose());
    optimizer_step(opt, net);
    loss = r.loss;
  }
  CHECK(loss < 0.05);
}

TEST_CASE("identical seeds give identical trajectories") {
  auto run = [] {
    Rng rng(4711);
    Network net({2, 16, 1}, {Activation::tanh_act, Activation::identity}, rng);
    auto opt = Optimizer::adam(1e-3);
    Eigen::MatrixXd xp(2, 8), xq(2, 8);
    for (int step = 0; step < 25; ++step) {
      for (Eigen::Index i = 0; i < xp.size(); ++i) xp.data()[i] = rng.uniform(-1, 1);
      for (Eigen::Index i = 0; i < xq.size(); ++i) xq.data()[i] = rng.uniform(-1, 1);
      net.zero_grad();
      const Eigen::VectorXd lp = net.forward(xp).row(0);
      auto r = logistic_discriminator_loss(lp, net.forward(xq).row(0));
      net.backward(r.grad_q.transpose());
      net.forward(xp);
      net.backward(r.grad_p.transpose());
      optimizer_step(opt, net);
    }
    return net.flat_parameters();
  };
  const Eigen::VectorXd a = run();
  const Eigen::VectorXd b = run();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // bit-identical
}

TEST_CASE("snapshot round-trip") {
  Rng rng(15);
  Network net({3, 5, 2}, {Activation::leaky_relu, Activation::tanh_act}, rng);
  std::stringstream buffer;
  net.save(buffer);
  Network copy = Network::load(buffer);
  CHECK((copy.flat_parameters() - net.flat_parameters()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd x(3, 4);
  x.setRandom();
  Eigen::MatrixXd orig_x = x;
  CHECK((copy.forward(x) - net.forward(orig_x)).cwiseAbs().maxCoeff() == 0.0);

  std::stringstream bad("layers 1\n2 2 bogus\n");
  CHECK_THROWS(Network::load(bad));
}
