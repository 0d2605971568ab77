#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include <Eigen/Dense>

namespace lucid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class OutputKind { Softmax, Linear };

/// Dense feed-forward net with tanh hidden layers. weights[l] is
/// (out x in); the last layer feeds a softmax (classifier) or nothing
/// (decoder).
struct DenseNet {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;
  OutputKind output = OutputKind::Softmax;

  Eigen::Index input_dim() const { return weights.front().cols(); }
  Eigen::Index output_dim() const { return weights.back().rows(); }
  std::vector<int> layer_sizes() const;
};

/// Labeled samples, one per row of `inputs`.
struct Dataset {
  MatrixXd inputs;
  std::vector<int> labels;

  Eigen::Index size() const { return inputs.rows(); }
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  int batch_size = 0;  ///< 0 = full batch
  std::uint64_t seed = 1;
};

struct Gradients {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;
  double loss = 0.0;  ///< mean cross-entropy of the batch
};

struct TrainResult {
  DenseNet net;
  std::vector<double> loss_trace;  ///< full-dataset loss after each epoch
};

/// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
DenseNet make_net(const std::vector<int>& layer_sizes, std::uint64_t seed,
                  OutputKind output = OutputKind::Softmax);

/// Softmax probabilities (classifier) or raw outputs (linear head).
VectorXd forward(const DenseNet& net, const VectorXd& x);

/// Final-layer pre-activations.
VectorXd logits(const DenseNet& net, const VectorXd& x);

/// log p(c | x), computed through a stable log-sum-exp.
double log_probability(const DenseNet& net, const VectorXd& x, int c);

int predict(const DenseNet& net, const VectorXd& x);

/// Exact gradient of the mean cross-entropy over the rows of `batch`.
Gradients param_gradients(const DenseNet& net, const Dataset& batch);

double mean_loss(const DenseNet& net, const Dataset& data);

double accuracy(const DenseNet& net, const Dataset& data);

/// Mini-batch SGD. Shuffling draws from Rng(config.seed), so runs are
/// bit-reproducible.
TrainResult train(DenseNet net, const Dataset& data, const TrainConfig& config);

/// Vector-Jacobian product: given dL/d(final pre-activation) at x, returns
/// dL/dx.
VectorXd backprop_to_input(const DenseNet& net, const VectorXd& x, const VectorXd& output_grad);

/// grad_x log p(c | x).
VectorXd input_gradient(const DenseNet& net, const VectorXd& x, int c);

/// Product of layer spectral norms; an upper bound on the Lipschitz constant
/// since tanh is 1-Lipschitz.
double lipschitz_bound(const DenseNet& net);

nlohmann::json to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

}  // namespace lucid
