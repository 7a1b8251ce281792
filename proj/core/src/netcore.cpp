#include "socsrl/netcore.hpp"

#include "socsrl/errors.hpp"
#include "socsrl/rng.hpp"

#include <cmath>
#include <random>

namespace socsrl {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

void validate_layout(const Layout& layout) {
  if (layout.empty()) throw ShapeError("layout has no layers");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].in_dim == 0 || layout[k].out_dim == 0)
      throw ShapeError("layer " + std::to_string(k) + " has a zero dimension");
    if (k + 1 < layout.size() && layout[k].out_dim != layout[k + 1].in_dim)
      throw ShapeError("layer " + std::to_string(k) + " output dim " +
                       std::to_string(layout[k].out_dim) + " does not chain into input dim " +
                       std::to_string(layout[k + 1].in_dim));
  }
}

std::size_t parameter_count(const Layout& layout) {
  std::size_t n = 0;
  for (const auto& l : layout) n += l.in_dim * l.out_dim + l.out_dim;
  return n;
}

Layout make_layout(const std::vector<std::size_t>& dims,
                   const std::vector<Activation>& activations) {
  if (dims.size() < 2 || activations.size() + 1 != dims.size())
    throw ShapeError("make_layout needs one activation per consecutive dim pair");
  Layout layout;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k)
    layout.push_back({dims[k], dims[k + 1], activations[k]});
  validate_layout(layout);
  return layout;
}

std::size_t Network::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t Network::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

Layout Network::layout() const {
  Layout out;
  out.reserve(layers.size());
  for (const auto& l : layers)
    out.push_back({static_cast<std::size_t>(l.weight.cols()),
                   static_cast<std::size_t>(l.weight.rows()), l.activation});
  return out;
}

ParamVector to_params(const Network& net) {
  ParamVector p{net.layout(), {}};
  p.values.reserve(parameter_count(p.layout));
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) p.values.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) p.values.push_back(l.bias(r));
  }
  return p;
}

void assign_params(Network& net, const ParamVector& params) {
  if (net.layout() != params.layout) throw ShapeError("parameter layout does not match network");
  if (params.values.size() != parameter_count(params.layout))
    throw ShapeError("parameter vector length does not match its layout");
  std::size_t at = 0;
  for (auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = params.values[at++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = params.values[at++];
  }
}

Network to_network(const ParamVector& params) {
  validate_layout(params.layout);
  Network net;
  for (const auto& spec : params.layout) {
    Layer l;
    l.weight.resize(static_cast<Eigen::Index>(spec.out_dim), static_cast<Eigen::Index>(spec.in_dim));
    l.bias.resize(static_cast<Eigen::Index>(spec.out_dim));
    l.activation = spec.activation;
    net.layers.push_back(std::move(l));
  }
  assign_params(net, params);
  return net;
}

namespace {

void apply_activation(Activation a, const Eigen::MatrixXd& z, Eigen::MatrixXd& out) {
  switch (a) {
    case Activation::identity: out = z; break;
    case Activation::relu: out = z.cwiseMax(0.0); break;
    case Activation::tanh: out = z.array().tanh().matrix(); break;
    case Activation::sigmoid: out = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
  }
}

// dL/dz given dL/dy, the pre-activation z and the activation y.
Eigen::MatrixXd activation_backward(Activation a, const Eigen::MatrixXd& grad_y,
                                    const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::identity: return grad_y;
    case Activation::relu: return (z.array() > 0.0).select(grad_y, 0.0);
    case Activation::tanh: return (grad_y.array() * (1.0 - y.array().square())).matrix();
    case Activation::sigmoid: return (grad_y.array() * y.array() * (1.0 - y.array())).matrix();
  }
  return grad_y;
}

void check_input(const Network& net, const Eigen::MatrixXd& input) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  if (static_cast<std::size_t>(input.rows()) != net.input_dim())
    throw ShapeError("input dim " + std::to_string(input.rows()) + " != network input dim " +
                     std::to_string(net.input_dim()));
}

}  // namespace

ForwardResult forward(const Network& net, const Eigen::MatrixXd& input) {
  check_input(net, input);
  ForwardResult r;
  auto& tape = r.tape;
  tape.activations.reserve(net.layers.size() + 1);
  tape.pre_activations.reserve(net.layers.size());
  tape.activations.push_back(input);
  for (const auto& l : net.layers) {
    Eigen::MatrixXd z = l.weight * tape.activations.back();
    z.colwise() += l.bias;
    Eigen::MatrixXd y;
    apply_activation(l.activation, z, y);
    tape.pre_activations.push_back(std::move(z));
    tape.activations.push_back(std::move(y));
  }
  r.output = tape.activations.back();
  return r;
}

Eigen::MatrixXd evaluate(const Network& net, const Eigen::MatrixXd& input) {
  check_input(net, input);
  Eigen::MatrixXd x = input;
  for (const auto& l : net.layers) {
    Eigen::MatrixXd z = l.weight * x;
    z.colwise() += l.bias;
    apply_activation(l.activation, z, x);
  }
  return x;
}

BackwardResult backward(const Network& net, const GradientTape& tape,
                        const Eigen::MatrixXd& output_grad, bool need_input_grad) {
  const std::size_t n_layers = net.layers.size();
  if (tape.activations.size() != n_layers + 1 || tape.pre_activations.size() != n_layers)
    throw ShapeError("gradient tape does not belong to this network");
  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto& l = net.layers[k];
    if (tape.activations[k].rows() != l.weight.cols() ||
        tape.pre_activations[k].rows() != l.weight.rows())
      throw ShapeError("gradient tape shapes do not match layer " + std::to_string(k));
  }
  if (output_grad.rows() != tape.activations.back().rows() ||
      output_grad.cols() != tape.activations.back().cols())
    throw ShapeError("output gradient shape does not match forward output");

  BackwardResult r;
  r.param_grad.layout = net.layout();
  r.param_grad.values.assign(parameter_count(r.param_grad.layout), 0.0);

  // Offsets of each layer's block in the flat vector.
  std::vector<std::size_t> offset(n_layers);
  std::size_t at = 0;
  for (std::size_t k = 0; k < n_layers; ++k) {
    offset[k] = at;
    at += static_cast<std::size_t>(net.layers[k].weight.size() + net.layers[k].bias.size());
  }

  Eigen::MatrixXd grad = output_grad;
  for (std::size_t k = n_layers; k-- > 0;) {
    const auto& l = net.layers[k];
    Eigen::MatrixXd dz =
        activation_backward(l.activation, grad, tape.pre_activations[k], tape.activations[k + 1]);
    // Row-major weight block: map as a row-major matrix.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMajor> dw(r.param_grad.values.data() + offset[k], l.weight.rows(), l.weight.cols());
    dw.noalias() = dz * tape.activations[k].transpose();
    Eigen::Map<Eigen::VectorXd> db(r.param_grad.values.data() + offset[k] + l.weight.size(),
                                   l.bias.size());
    db = dz.rowwise().sum();
    if (k > 0 || need_input_grad) grad.noalias() = l.weight.transpose() * dz;
  }
  if (need_input_grad) r.input_grad = std::move(grad);
  return r;
}

ParamVector init_params(const Layout& layout, std::uint64_t seed) {
  validate_layout(layout);
  ParamVector p{layout, {}};
  p.values.reserve(parameter_count(layout));
  Rng rng(derive_seed(seed, "init_params"));
  for (const auto& spec : layout) {
    const double limit = std::sqrt(3.0 / static_cast<double>(spec.in_dim));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < spec.in_dim * spec.out_dim; ++i) p.values.push_back(u(rng));
    for (std::size_t i = 0; i < spec.out_dim; ++i) p.values.push_back(0.0);
  }
  return p;
}

AdamState make_adam_state(std::size_t n) {
  return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
}

bool all_finite(const ParamVector& params) {
  for (double x : params.values)
    if (!std::isfinite(x)) return false;
  return true;
}

void adam_step(ParamVector& params, const ParamVector& grads, AdamState& state,
               const AdamConfig& config) {
  const std::size_t n = params.values.size();
  if (grads.values.size() != n || state.m.size() != n || state.v.size() != n)
    throw ShapeError("adam_step: params, grads and optimizer state are not congruent");
  if (!all_finite(grads)) throw NumericError("adam_step: non-finite gradient");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params.values[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

}  // namespace socsrl
