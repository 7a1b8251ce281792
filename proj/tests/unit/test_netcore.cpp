#include <doctest.h>

#include "oracles.hpp"

#include "socsrl/errors.hpp"
#include "socsrl/netcore.hpp"
#include "socsrl/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace socsrl;

namespace {

Network single_layer(Eigen::MatrixXd w, Eigen::VectorXd b, Activation a = Activation::identity) {
  Network n;
  n.layers.push_back({std::move(w), std::move(b), a});
  return n;
}

// Random chain with 1-3 layers and dims in [1, 8].
Layout random_layout(Rng& rng, bool smooth_only) {
  std::uniform_int_distribution<std::size_t> depth(1, 3), dim(1, 8);
  std::uniform_int_distribution<int> act(0, 3);
  std::vector<std::size_t> dims{dim(rng)};
  std::vector<Activation> acts;
  const auto layers = depth(rng);
  for (std::size_t k = 0; k < layers; ++k) {
    dims.push_back(dim(rng));
    auto a = static_cast<Activation>(act(rng));
    if (smooth_only && a == Activation::relu) a = Activation::tanh;
    acts.push_back(a);
  }
  return make_layout(dims, acts);
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = u(rng);
  return m;
}

// Scalar objective sum(G .* net(X)) evaluated by the straight-line oracle.
double probe_objective(const ParamVector& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& g,
                       std::string* signs) {
  double s = 0;
  const auto cols = oracle::columns(x);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto y = oracle::mlp(p, cols[c], signs);
    for (std::size_t r = 0; r < y.size(); ++r) s += g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * y[r];
  }
  return s;
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

}  // namespace

TEST_CASE("forward: identity and affine single layers") {
  auto id = single_layer(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  Eigen::MatrixXd x(2, 1);
  x << 0.5, -0.5;
  const auto y = forward(id, x).output;
  CHECK(y(0, 0) == 0.5);
  CHECK(y(1, 0) == -0.5);

  auto aff = single_layer(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 1.0));
  CHECK(forward(aff, Eigen::MatrixXd::Constant(1, 1, 3.0)).output(0, 0) == 7.0);
}

TEST_CASE("forward matches the straight-line evaluator on random networks") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng = make_rng(seed, "fwd");
    const auto layout = random_layout(rng, false);
    const auto params = init_params(layout, seed);
    const auto net = to_network(params);
    const auto x = random_matrix(static_cast<Eigen::Index>(layout.front().in_dim), 3, rng);
    const auto fr = forward(net, x);
    const auto cols = oracle::columns(x);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto ref = oracle::mlp(params, cols[c]);
      for (std::size_t r = 0; r < ref.size(); ++r)
        CHECK(fr.output(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ==
              doctest::Approx(ref[r]).epsilon(1e-12));
    }
    CHECK(evaluate(net, x) == fr.output);
    CHECK(forward(net, x).output == fr.output);
  }
}

TEST_CASE("forward rejects mismatched input") {
  const auto net = to_network(init_params(make_layout({3, 2}, {Activation::relu}), 1));
  CHECK_THROWS_AS(forward(net, Eigen::MatrixXd::Zero(4, 1)), ShapeError);
  CHECK_THROWS_AS(evaluate(net, Eigen::MatrixXd::Zero(2, 1)), ShapeError);
}

TEST_CASE("backward: linear layer calculus and zero output gradient") {
  auto id = single_layer(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  Eigen::MatrixXd x(2, 1);
  x << 0.3, -0.7;
  const auto fr = forward(id, x);
  Eigen::MatrixXd g(2, 1);
  g << 1, 0;
  const auto br = backward(id, fr.tape, g);
  CHECK(br.input_grad(0, 0) == 1.0);
  CHECK(br.input_grad(1, 0) == 0.0);
  // Row-major weight block then bias: outer(g, x) = [[0.3, -0.7], [0, 0]], bias = g.
  const std::vector<double> expect{0.3, -0.7, 0.0, 0.0, 1.0, 0.0};
  CHECK(br.param_grad.values == expect);

  Rng rng = make_rng(3, "zero");
  const auto layout = random_layout(rng, false);
  const auto net = to_network(init_params(layout, 3));
  const auto xr = random_matrix(static_cast<Eigen::Index>(layout.front().in_dim), 4, rng);
  const auto f = forward(net, xr);
  const auto z = backward(net, f.tape, Eigen::MatrixXd::Zero(f.output.rows(), f.output.cols()));
  for (double v : z.param_grad.values) CHECK(v == 0.0);
  CHECK(z.input_grad.isZero(0.0));
}

TEST_CASE("backward without input gradient returns an empty matrix") {
  const auto net = to_network(init_params(make_layout({3, 2}, {Activation::tanh}), 1));
  const auto f = forward(net, Eigen::MatrixXd::Ones(3, 2));
  const auto b = backward(net, f.tape, Eigen::MatrixXd::Ones(2, 2), false);
  CHECK(b.input_grad.size() == 0);
  CHECK(b.param_grad.size() == parameter_count(net.layout()));
}

TEST_CASE("backward rejects a tape from another network") {
  const auto a = to_network(init_params(make_layout({3, 2}, {Activation::tanh}), 1));
  const auto b = to_network(init_params(make_layout({3, 4, 2}, {Activation::tanh, Activation::tanh}), 1));
  const auto f = forward(a, Eigen::MatrixXd::Ones(3, 1));
  CHECK_THROWS_AS(backward(b, f.tape, Eigen::MatrixXd::Ones(2, 1)), ShapeError);
  CHECK_THROWS_AS(backward(a, f.tape, Eigen::MatrixXd::Ones(3, 1)), ShapeError);
}

TEST_CASE("backward matches central finite differences (layers <= 3, dims <= 8)") {
  const double h = 1e-5;
  std::size_t checked = 0, skipped = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng = make_rng(seed, "fd");
    const auto layout = random_layout(rng, false);
    auto params = init_params(layout, seed);
    const auto net = to_network(params);
    auto x = random_matrix(static_cast<Eigen::Index>(layout.front().in_dim), 2, rng);
    const auto g = random_matrix(static_cast<Eigen::Index>(layout.back().out_dim), 2, rng);
    const auto br = backward(net, forward(net, x).tape, g);

    std::string base_signs;
    probe_objective(params, x, g, &base_signs);
    auto fd_check = [&](double& slot, double analytic) {
      const double keep = slot;
      std::string up_s, down_s;
      slot = keep + h;
      const double up = probe_objective(params, x, g, &up_s);
      slot = keep - h;
      const double down = probe_objective(params, x, g, &down_s);
      slot = keep;
      if (up_s != base_signs || down_s != base_signs) {
        ++skipped;
        return;
      }
      const double e = rel_err(analytic, (up - down) / (2 * h));
      worst = std::max(worst, e);
      ++checked;
      CHECK(e < 1e-4);
    };
    for (std::size_t k = 0; k < params.size(); ++k) fd_check(params.values[k], br.param_grad.values[k]);
    for (Eigen::Index k = 0; k < x.size(); ++k) fd_check(x(k), br.input_grad(k));
  }
  MESSAGE("checked " << checked << " components, skipped " << skipped << " at relu kinks, worst " << worst);
  CHECK(checked > 500);
  CHECK(skipped * 20 < checked);
}

TEST_CASE("chained backward through a message equals finite differences of the composite") {
  const double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, "chain");
    const auto enc_layout = make_layout({5, 6, 3}, {Activation::tanh, Activation::identity});
    const auto dec_layout = make_layout({3, 6, 5}, {Activation::tanh, Activation::sigmoid});
    auto pe = init_params(enc_layout, derive_seed(seed, "e"));
    auto pd = init_params(dec_layout, derive_seed(seed, "d"));
    const auto x = random_matrix(5, 2, rng, 0, 1);
    const auto g = random_matrix(5, 2, rng);
    const auto enc = to_network(pe), dec = to_network(pd);
    const auto fe = forward(enc, x);
    const auto fdec = forward(dec, fe.output);
    const auto bd = backward(dec, fdec.tape, g);
    const auto be = backward(enc, fe.tape, bd.input_grad);

    auto composite = [&] {
      double s = 0;
      const auto cols = oracle::columns(x);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto y = oracle::mlp(pd, oracle::mlp(pe, cols[c]));
        for (std::size_t r = 0; r < y.size(); ++r) s += g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * y[r];
      }
      return s;
    };
    for (std::size_t k = 0; k < pe.size(); ++k) {
      const double keep = pe.values[k];
      pe.values[k] = keep + h;
      const double up = composite();
      pe.values[k] = keep - h;
      const double down = composite();
      pe.values[k] = keep;
      CHECK(rel_err(be.param_grad.values[k], (up - down) / (2 * h)) < 1e-4);
    }
  }
}

TEST_CASE("parameter vectors: layout arithmetic, round trip and row-major order") {
  const auto layout = make_layout({4, 3, 4}, {Activation::relu, Activation::sigmoid});
  const auto p = init_params(layout, 7);
  CHECK(p.size() == 4 * 3 + 3 + 3 * 4 + 4);
  CHECK(parameter_count(layout) == 31);
  const auto net = to_network(p);
  CHECK(to_params(net) == p);
  CHECK(to_params(to_network(to_params(net))) == p);
  CHECK(net.layers[0].weight(1, 2) == p.values[1 * 4 + 2]);
  CHECK(net.layers[1].bias(3) == p.values[p.size() - 1]);

  Network copy = net;
  auto shifted = p;
  for (auto& v : shifted.values) v += 1.0;
  assign_params(copy, shifted);
  CHECK(to_params(copy) == shifted);
  auto wrong = init_params(make_layout({4, 2}, {Activation::relu}), 1);
  CHECK_THROWS_AS(assign_params(copy, wrong), ShapeError);
}

TEST_CASE("layouts are validated") {
  CHECK_THROWS_AS(validate_layout({}), ShapeError);
  CHECK_THROWS_AS(validate_layout({{3, 0, Activation::relu}}), ShapeError);
  CHECK_THROWS_AS(validate_layout({{3, 2, Activation::relu}, {3, 1, Activation::relu}}), ShapeError);
  CHECK_THROWS_AS(make_layout({3, 2, 1}, {Activation::relu}), ShapeError);
  CHECK(activation_from_string(to_string(Activation::sigmoid)) == Activation::sigmoid);
  CHECK_THROWS_AS(activation_from_string("gelu"), FormatError);
}

TEST_CASE("init_params: deterministic, seed-sensitive, fan-in scaled, zero biases") {
  const auto layout = make_layout({8, 6, 3}, {Activation::relu, Activation::identity});
  const auto a = init_params(layout, 11), b = init_params(layout, 11), c = init_params(layout, 12);
  CHECK(a == b);
  CHECK(a.values != c.values);
  const auto net = to_network(a);
  for (const auto& l : net.layers) {
    const double bound = std::sqrt(3.0 / static_cast<double>(l.weight.cols()));
    CHECK(l.weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(l.bias.isZero(0.0));
  }
  // Zero mean: average over a large layer.
  const auto big = to_network(init_params(make_layout({400, 400}, {Activation::identity}), 5));
  CHECK(std::fabs(big.layers[0].weight.mean()) < 0.01 * std::sqrt(3.0 / 400));
}

TEST_CASE("adam: fixed point, first step and hand-recursion trajectory") {
  ParamVector p{make_layout({1, 1}, {Activation::identity}), {0.0, 0.0}};
  auto st = make_adam_state(2);
  adam_step(p, ParamVector{p.layout, {0.0, 0.0}}, st);
  CHECK(p.values == std::vector<double>{0.0, 0.0});

  ParamVector q{p.layout, {0.0, 0.0}};
  auto st2 = make_adam_state(2);
  adam_step(q, ParamVector{q.layout, {1.0, 0.0}}, st2);
  CHECK(q.values[0] == doctest::Approx(-0.001).epsilon(1e-6));

  const std::vector<std::vector<double>> grads{{0.5, -2.0}, {-0.25, 1.0}, {3.0, 0.125}};
  ParamVector r{p.layout, {0.2, -0.4}};
  auto st3 = make_adam_state(2);
  oracle::AdamTrace ref{{0.2, -0.4}, {}, {}, 0};
  const AdamConfig cfg{0.01, 0.8, 0.95, 1e-6};
  for (const auto& g : grads) {
    adam_step(r, ParamVector{r.layout, g}, st3, cfg);
    oracle::adam(ref, g, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    for (int k = 0; k < 2; ++k) {
      CHECK(r.values[k] == doctest::Approx(ref.params[k]).epsilon(1e-14));
      CHECK(st3.m[k] == doctest::Approx(ref.m[k]).epsilon(1e-14));
      CHECK(st3.v[k] == doctest::Approx(ref.v[k]).epsilon(1e-14));
    }
  }
  CHECK(st3.t == 3);
}

TEST_CASE("adam rejects non-finite gradients without touching state") {
  ParamVector p{make_layout({1, 1}, {Activation::identity}), {0.5, 0.5}};
  auto st = make_adam_state(2);
  const auto before = p;
  const auto st_before = st;
  for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
    CHECK_THROWS_AS(adam_step(p, ParamVector{p.layout, {0.1, bad}}, st), NumericError);
    CHECK(p == before);
    CHECK(st == st_before);
  }
  CHECK_THROWS_AS(adam_step(p, ParamVector{p.layout, {0.1}}, st), ShapeError);
}
