#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lucid/rng.hpp"
#include "lucid/tinynet.hpp"

namespace lucid {
namespace {

void check_input(const DenseNet& net, const VectorXd& x) {
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("net: input has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(net.input_dim()));
  }
}

void check_label(const DenseNet& net, int c) {
  if (c < 0 || c >= net.output_dim()) throw std::invalid_argument("net: class index " + std::to_string(c) + " out of range");
}

VectorXd log_softmax(const VectorXd& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

// Column-wise forward pass over a batch; keeps every layer's activation.
std::vector<MatrixXd> forward_batch(const DenseNet& net, const MatrixXd& inputs_by_col) {
  std::vector<MatrixXd> acts;
  acts.reserve(net.weights.size() + 1);
  acts.push_back(inputs_by_col);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    MatrixXd z = net.weights[l] * acts.back();
    z.colwise() += net.biases[l];
    if (l + 1 < net.weights.size()) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

std::vector<int> DenseNet::layer_sizes() const {
  std::vector<int> sizes;
  if (weights.empty()) return sizes;
  sizes.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

DenseNet make_net(const std::vector<int>& layer_sizes, std::uint64_t seed, OutputKind output) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("make_net: need at least input and output sizes");
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("make_net: layer sizes must be positive");
  }
  Rng rng(seed);
  DenseNet net;
  net.output = output;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    MatrixXd w(out, in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    VectorXd b(out);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

VectorXd logits(const DenseNet& net, const VectorXd& x) {
  check_input(net, x);
  VectorXd a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    VectorXd z = net.weights[l] * a + net.biases[l];
    a = l + 1 < net.weights.size() ? VectorXd(z.array().tanh()) : z;
  }
  return a;
}

VectorXd forward(const DenseNet& net, const VectorXd& x) {
  const VectorXd z = logits(net, x);
  if (net.output == OutputKind::Linear) return z;
  return log_softmax(z).array().exp();
}

double log_probability(const DenseNet& net, const VectorXd& x, int c) {
  check_label(net, c);
  return log_softmax(logits(net, x))(c);
}

int predict(const DenseNet& net, const VectorXd& x) {
  Eigen::Index best = 0;
  logits(net, x).maxCoeff(&best);
  return static_cast<int>(best);
}

Gradients param_gradients(const DenseNet& net, const Dataset& batch) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("param_gradients: empty batch");
  if (net.output != OutputKind::Softmax) throw std::invalid_argument("param_gradients: cross-entropy needs a softmax head");
  if (batch.inputs.cols() != net.input_dim()) throw std::invalid_argument("param_gradients: input dimension mismatch");
  for (int y : batch.labels) check_label(net, y);

  const std::vector<MatrixXd> acts = forward_batch(net, batch.inputs.transpose());
  const MatrixXd& z_out = acts.back();

  // delta = (softmax - onehot) / n, column per sample.
  MatrixXd delta(z_out.rows(), n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorXd logp = log_softmax(z_out.col(i));
    const int y = batch.labels[static_cast<std::size_t>(i)];
    loss -= logp(y);
    delta.col(i) = logp.array().exp();
    delta(y, i) -= 1.0;
  }
  delta /= static_cast<double>(n);

  Gradients g;
  const std::size_t layers = net.weights.size();
  g.weights.resize(layers);
  g.biases.resize(layers);
  g.loss = loss / static_cast<double>(n);
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      const MatrixXd& a = acts[l];
      delta = ((net.weights[l].transpose() * delta).array() * (1.0 - a.array().square())).matrix();
    }
  }
  return g;
}

double mean_loss(const DenseNet& net, const Dataset& data) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    loss -= log_probability(net, data.inputs.row(i).transpose(), data.labels[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(data.size());
}

double accuracy(const DenseNet& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (predict(net, data.inputs.row(i).transpose()) == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(DenseNet net, const Dataset& data, const TrainConfig& config) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (static_cast<std::size_t>(data.size()) != data.labels.size()) throw std::invalid_argument("train: label count mismatch");
  if (!(config.learning_rate > 0.0) || config.epochs < 0 || config.batch_size < 0) {
    throw std::invalid_argument("train: invalid configuration");
  }

  const Eigen::Index n = data.size();
  const Eigen::Index batch = config.batch_size == 0 ? n : std::min<Eigen::Index>(config.batch_size, n);
  Rng rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < n) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Dataset mb;
      mb.inputs.resize(len, data.inputs.cols());
      mb.labels.resize(static_cast<std::size_t>(len));
      for (Eigen::Index i = 0; i < len; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        mb.inputs.row(i) = data.inputs.row(src);
        mb.labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(src)];
      }
      const Gradients g = param_gradients(net, mb);
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        net.weights[l] -= config.learning_rate * g.weights[l];
        net.biases[l] -= config.learning_rate * g.biases[l];
      }
    }
    result.loss_trace.push_back(mean_loss(net, data));
  }
  result.net = std::move(net);
  return result;
}

VectorXd backprop_to_input(const DenseNet& net, const VectorXd& x, const VectorXd& output_grad) {
  check_input(net, x);
  if (output_grad.size() != net.output_dim()) throw std::invalid_argument("backprop_to_input: gradient size mismatch");
  const std::vector<MatrixXd> acts = forward_batch(net, x);
  VectorXd delta = output_grad;
  for (std::size_t l = net.weights.size(); l-- > 0;) {
    delta = net.weights[l].transpose() * delta;
    if (l > 0) delta = (delta.array() * (1.0 - acts[l].col(0).array().square())).matrix();
  }
  return delta;
}

VectorXd input_gradient(const DenseNet& net, const VectorXd& x, int c) {
  check_label(net, c);
  VectorXd grad = -log_softmax(logits(net, x)).array().exp().matrix();
  grad(c) += 1.0;
  return backprop_to_input(net, x, grad);
}

double lipschitz_bound(const DenseNet& net) {
  double bound = 1.0;
  for (const MatrixXd& w : net.weights) {
    Eigen::JacobiSVD<MatrixXd> svd(w);
    bound *= svd.singularValues()(0);
  }
  return bound;
}

nlohmann::json to_json(const DenseNet& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<double> flat;
    const MatrixXd& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(flat);
    biases.push_back(std::vector<double>(net.biases[l].data(), net.biases[l].data() + net.biases[l].size()));
  }
  return {{"layer_sizes", net.layer_sizes()},
          {"activation", "tanh"},
          {"output", net.output == OutputKind::Softmax ? "softmax" : "linear"},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

DenseNet net_from_json(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (sizes.size() < 2) throw std::invalid_argument("net json: need at least two layer sizes");
  const std::string output = j.value("output", "softmax");
  if (output != "softmax" && output != "linear") throw std::invalid_argument("net json: unknown output kind " + output);
  DenseNet net;
  net.output = output == "softmax" ? OutputKind::Softmax : OutputKind::Linear;
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1) {
    throw std::invalid_argument("net json: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto flat = weights[l].get<std::vector<double>>();
    const auto b = biases[l].get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(sizes[l]) * static_cast<std::size_t>(sizes[l + 1]) ||
        b.size() != static_cast<std::size_t>(sizes[l + 1])) {
      throw std::invalid_argument("net json: layer " + std::to_string(l) + " has the wrong shape");
    }
    MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[static_cast<std::size_t>(r * w.cols() + c)];
    }
    if (!w.allFinite()) throw std::invalid_argument("net json: non-finite weight");
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  return net;
}

nlohmann::json to_json(const Dataset& data) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(data.inputs.cols()));
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) row[static_cast<std::size_t>(c)] = data.inputs(i, c);
    rows.push_back(std::move(row));
  }
  return {{"inputs", std::move(rows)}, {"labels", data.labels}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  const auto rows = j.at("inputs").get<std::vector<std::vector<double>>>();
  Dataset data;
  data.labels = j.at("labels").get<std::vector<int>>();
  if (rows.size() != data.labels.size()) throw std::invalid_argument("dataset json: label count mismatch");
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw std::invalid_argument("dataset json: ragged rows");
    for (std::size_t c = 0; c < dim; ++c) data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return data;
}

}  // namespace lucid
