#pragma once

// Dense feed-forward networks with an explicit reverse pass.
//
// Batches are column-major: an input batch of B observations of dimension D is
// a D x B matrix, one observation per column.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace socsrl {

enum class Activation { identity, relu, tanh, sigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::identity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using Layout = std::vector<LayerSpec>;

/// Throws ShapeError unless the layout is non-empty, has no zero dims and chains.
void validate_layout(const Layout& layout);

/// Sum over layers of in*out + out.
std::size_t parameter_count(const Layout& layout);

/// Builds a chain `dims[0] -> dims[1] -> ...` with one activation per layer.
Layout make_layout(const std::vector<std::size_t>& dims,
                   const std::vector<Activation>& activations);

/// Flat parameters. Per layer, the weight matrix in row-major order followed
/// by the bias.
struct ParamVector {
  Layout layout;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct Layer {
  Eigen::MatrixXd weight;  // out_dim x in_dim
  Eigen::VectorXd bias;    // out_dim
  Activation activation = Activation::identity;
};

struct Network {
  std::vector<Layer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  Layout layout() const;
};

/// Values cached by one forward pass: activations[0] is the input,
/// activations[k+1] the output of layer k, pre_activations[k] its affine part.
struct GradientTape {
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre_activations;

  std::size_t batch_size() const {
    return activations.empty() ? 0 : static_cast<std::size_t>(activations.front().cols());
  }
};

struct ForwardResult {
  Eigen::MatrixXd output;
  GradientTape tape;
};

struct BackwardResult {
  ParamVector param_grad;
  Eigen::MatrixXd input_grad;
};

ParamVector to_params(const Network& net);
Network to_network(const ParamVector& params);

/// Overwrites the parameters of `net` in place; layouts must match.
void assign_params(Network& net, const ParamVector& params);

ForwardResult forward(const Network& net, const Eigen::MatrixXd& input);

/// Output only, no tape; bitwise-identical to forward(net, input).output.
Eigen::MatrixXd evaluate(const Network& net, const Eigen::MatrixXd& input);

/// Reverse pass. `output_grad` is dLoss/dOutput with the same shape as the
/// forward output. Parameter gradients are summed over the batch columns.
/// With `need_input_grad == false` the returned input_grad is empty.
BackwardResult backward(const Network& net, const GradientTape& tape,
                        const Eigen::MatrixXd& output_grad,
                        bool need_input_grad = true);

/// Zero-mean uniform weights in +-sqrt(3 / fan_in), zero biases.
ParamVector init_params(const Layout& layout, std::uint64_t seed);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;  // steps taken so far

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam_state(std::size_t parameter_count);

/// One bias-corrected Adam update; increments state.t before use.
/// Throws NumericError on non-finite gradients and leaves params untouched.
void adam_step(ParamVector& params, const ParamVector& grads, AdamState& state,
               const AdamConfig& config = {});

bool all_finite(const ParamVector& params);

}  // namespace socsrl
