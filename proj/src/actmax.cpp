#include <cmath>
#include <stdexcept>
#include <string>

#include "lucid/actmax.hpp"
#include "lucid/error.hpp"
#include "lucid/rng.hpp"

namespace lucid {
namespace {

bool finite(const VectorXd& v) { return v.allFinite(); }

void check_init(const VectorXd& init, Eigen::Index dim, const char* who) {
  if (init.size() != dim) {
    throw std::invalid_argument(std::string(who) + ": initial point has dimension " + std::to_string(init.size()) +
                                ", expected " + std::to_string(dim));
  }
  if (!finite(init)) throw std::invalid_argument(std::string(who) + ": initial point is not finite");
}

void check_options(const AscentOptions& o) {
  if (!(o.step > 0.0) || !std::isfinite(o.step)) throw std::invalid_argument("ascent: step must be positive");
  if (o.max_iters < 0) throw std::invalid_argument("ascent: max_iters must be non-negative");
  if (!(o.tol >= 0.0)) throw std::invalid_argument("ascent: tol must be non-negative");
  if (o.max_halvings < 0) throw std::invalid_argument("ascent: max_halvings must be non-negative");
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
}

void check_expert(const RbmExpert& e) {
  if (e.weights.rows() != e.hidden_bias.size()) throw std::invalid_argument("expert: weights/bias size mismatch");
  if (e.weights.cols() != e.variance.size()) throw std::invalid_argument("expert: weights/variance size mismatch");
  if (!e.weights.allFinite() || !e.hidden_bias.allFinite() || !e.variance.allFinite()) {
    throw std::invalid_argument("expert: parameters must be finite");
  }
  if ((e.variance.array() <= 0.0).any()) throw std::invalid_argument("expert: variance must be positive");
}

// log p(c|x) - lambda ||x||^2. Shared by every regime so the reductions
// stay bit-identical.
ValueAndGradient class_term(const DenseNet& net, int c, double lambda, const VectorXd& x) {
  ValueAndGradient out;
  out.value = log_probability(net, x, c) - lambda * x.squaredNorm();
  out.gradient = input_gradient(net, x, c) - 2.0 * lambda * x;
  return out;
}

}  // namespace

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

PrototypeResult gradient_ascent(const Objective& objective, const VectorXd& init, const AscentOptions& options) {
  check_options(options);
  PrototypeResult result;
  VectorXd x = init;
  ValueAndGradient cur = objective(x);
  if (!std::isfinite(cur.value) || !finite(cur.gradient)) throw NumericalError("ascent: non-finite objective at start", 0);
  if (options.record_iterates) result.iterates.push_back(x);

  while (result.iterations < options.max_iters) {
    if (cur.gradient.norm() < options.tol) {
      result.converged = true;
      break;
    }
    double s = options.step;
    bool any_finite = false;
    bool accepted = false;
    VectorXd candidate;
    ValueAndGradient next;
    for (int h = 0; h <= options.max_halvings; ++h, s *= 0.5) {
      candidate = x + s * cur.gradient;
      next = objective(candidate);
      if (!std::isfinite(next.value) || !finite(next.gradient) || !finite(candidate)) continue;
      any_finite = true;
      if (next.value >= cur.value) {
        accepted = true;
        break;
      }
    }
    if (!any_finite) throw NumericalError("ascent: non-finite objective", result.iterations + 1);
    if (!accepted) break;  // stalled at floating-point resolution
    x = std::move(candidate);
    cur = std::move(next);
    result.objective_trace.push_back(cur.value);
    ++result.iterations;
    if (options.record_iterates) result.iterates.push_back(x);
  }
  if (!result.converged && cur.gradient.norm() < options.tol) result.converged = true;
  result.x = std::move(x);
  return result;
}

ValueAndGradient rbm_log_density(const RbmExpert& expert, const VectorXd& x) {
  if (x.size() != expert.variance.size()) throw std::invalid_argument("rbm_log_density: dimension mismatch");
  const VectorXd pre = expert.weights * x + expert.hidden_bias;
  ValueAndGradient out;
  double factors = 0.0;
  VectorXd act(pre.size());
  for (Eigen::Index j = 0; j < pre.size(); ++j) {
    factors += softplus(pre[j]);
    act[j] = logistic(pre[j]);
  }
  const VectorXd scaled = x.cwiseQuotient(expert.variance);
  out.value = factors - 0.5 * x.dot(scaled);
  out.gradient = expert.weights.transpose() * act - scaled;
  return out;
}

PrototypeResult maximize_class(const DenseNet& net, int c, double lambda, const VectorXd& init,
                               const AscentOptions& options) {
  check_lambda(lambda);
  check_init(init, net.input_dim(), "maximize_class");
  return gradient_ascent([&](const VectorXd& x) { return class_term(net, c, lambda, x); }, init, options);
}

PrototypeResult maximize_with_expert(const DenseNet& net, int c, const RbmExpert& expert, double alpha,
                                     const VectorXd& init, const AscentOptions& options, double lambda) {
  check_lambda(lambda);
  check_expert(expert);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("maximize_with_expert: alpha must be >= 0");
  if (expert.variance.size() != net.input_dim()) throw std::invalid_argument("maximize_with_expert: expert dimension mismatch");
  check_init(init, net.input_dim(), "maximize_with_expert");
  if (alpha == 0.0) return maximize_class(net, c, lambda, init, options);
  return gradient_ascent(
      [&](const VectorXd& x) {
        ValueAndGradient out = class_term(net, c, lambda, x);
        const ValueAndGradient prior = rbm_log_density(expert, x);
        out.value += alpha * prior.value;
        out.gradient += alpha * prior.gradient;
        return out;
      },
      init, options);
}

VectorXd decode(const Decoder& decoder, const VectorXd& z) { return forward(decoder.net, z); }

PrototypeResult maximize_in_code_space(const DenseNet& net, int c, const Decoder& decoder, double lambda,
                                       const VectorXd& init_z, const AscentOptions& options) {
  check_lambda(lambda);
  if (decoder.net.output != OutputKind::Linear) throw std::invalid_argument("decoder must have a linear head");
  if (decoder.net.output_dim() != net.input_dim()) throw std::invalid_argument("decoder output does not match classifier input");
  check_init(init_z, decoder.net.input_dim(), "maximize_in_code_space");
  PrototypeResult result = gradient_ascent(
      [&](const VectorXd& z) {
        const VectorXd x = decode(decoder, z);
        ValueAndGradient out;
        out.value = log_probability(net, x, c) - lambda * z.squaredNorm();
        out.gradient = backprop_to_input(decoder.net, z, input_gradient(net, x, c)) - 2.0 * lambda * z;
        return out;
      },
      init_z, options);
  result.z = result.x;
  result.x = decode(decoder, *result.z);
  return result;
}

Decoder identity_decoder(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("identity_decoder: dimension must be positive");
  Decoder d;
  d.net.weights.push_back(MatrixXd::Identity(dim, dim));
  d.net.biases.push_back(VectorXd::Zero(dim));
  d.net.output = OutputKind::Linear;
  return d;
}

RbmTraining train_rbm(const MatrixXd& data, int hidden, int epochs, double learning_rate, std::uint64_t seed) {
  if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("train_rbm: empty data");
  if (!data.allFinite()) throw std::invalid_argument("train_rbm: data must be finite");
  if (hidden < 0 || epochs < 0) throw std::invalid_argument("train_rbm: hidden and epochs must be non-negative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train_rbm: learning rate must be positive");

  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  RbmTraining out;
  RbmExpert& e = out.expert;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  e.variance = ((data.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n)).transpose();
  e.variance = e.variance.cwiseMax(1e-6);

  Rng rng(seed);
  e.weights.resize(hidden, d);
  for (Eigen::Index j = 0; j < hidden; ++j)
    for (Eigen::Index i = 0; i < d; ++i) e.weights(j, i) = 0.01 * rng.normal();
  e.hidden_bias = VectorXd::Zero(hidden);

  const MatrixXd x0 = data.transpose();  // d x n
  for (int epoch = 0; epoch < epochs; ++epoch) {
    MatrixXd h0p = e.weights * x0;
    h0p.colwise() += e.hidden_bias;
    h0p = h0p.unaryExpr([](double t) { return logistic(t); });
    MatrixXd h0 = h0p.unaryExpr([&](double p) { return rng.uniform() < p ? 1.0 : 0.0; });
    // Mean-field reconstruction of the visible layer.
    const MatrixXd v1 = e.variance.asDiagonal() * (e.weights.transpose() * h0);
    MatrixXd h1p = e.weights * v1;
    h1p.colwise() += e.hidden_bias;
    h1p = h1p.unaryExpr([](double t) { return logistic(t); });

    out.reconstruction_error.push_back((x0 - v1).squaredNorm() / static_cast<double>(n * d));
    const double scale = learning_rate / static_cast<double>(n);
    e.weights += scale * (h0p * x0.transpose() - h1p * v1.transpose());
    e.hidden_bias += scale * (h0p - h1p).rowwise().sum();
  }
  return out;
}

RbmExpert peaked_expert(const VectorXd& mean) {
  if (mean.size() == 0 || !finite(mean)) throw std::invalid_argument("peaked_expert: mean must be finite and non-empty");
  const Eigen::Index d = mean.size();
  RbmExpert e;
  e.weights = MatrixXd::Zero(d, d);
  e.hidden_bias = VectorXd::Zero(d);
  e.variance = VectorXd::Ones(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double mu = mean[i];
    if (mu == 0.0) continue;
    const double var = std::max(1.0, (4.0 * mu / 3.0) * (4.0 * mu / 3.0));
    const double kappa = std::copysign(1.5 / std::sqrt(var), mu);
    // Stationary point at mu: kappa * logistic(kappa mu + b) = mu / var, with
    // the target activation in (0, 0.5].
    const double r = mu / (var * kappa);
    e.variance[i] = var;
    e.weights(i, i) = kappa;
    e.hidden_bias[i] = std::log(r / (1.0 - r)) - kappa * mu;
  }
  return e;
}

nlohmann::json to_json(const RbmExpert& expert) {
  nlohmann::json w = nlohmann::json::array();
  for (Eigen::Index j = 0; j < expert.weights.rows(); ++j) {
    w.push_back(std::vector<double>(expert.weights.row(j).begin(), expert.weights.row(j).end()));
  }
  return {{"hidden", expert.weights.rows()},
          {"visible", expert.variance.size()},
          {"weights", w},
          {"hidden_bias", std::vector<double>(expert.hidden_bias.begin(), expert.hidden_bias.end())},
          {"variance", std::vector<double>(expert.variance.begin(), expert.variance.end())}};
}

RbmExpert rbm_from_json(const nlohmann::json& j) {
  RbmExpert e;
  try {
    const auto var = j.at("variance").get<std::vector<double>>();
    const auto bias = j.at("hidden_bias").get<std::vector<double>>();
    const auto& w = j.at("weights");
    e.variance = Eigen::Map<const VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
    e.hidden_bias = Eigen::Map<const VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    e.weights.resize(static_cast<Eigen::Index>(w.size()), e.variance.size());
    for (std::size_t r = 0; r < w.size(); ++r) {
      const auto row = w[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != e.variance.size()) throw std::invalid_argument("expert: ragged weights");
      for (std::size_t c = 0; c < row.size(); ++c) e.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("expert: ") + ex.what());
  }
  check_expert(e);
  return e;
}

nlohmann::json to_json(const PrototypeResult& result) {
  nlohmann::json j = {{"x_star", std::vector<double>(result.x.begin(), result.x.end())},
                      {"x_star_norm", result.x.norm()},
                      {"objective_trace", result.objective_trace},
                      {"iterations", result.iterations},
                      {"converged", result.converged}};
  if (result.z) {
    j["z_star"] = std::vector<double>(result.z->begin(), result.z->end());
    j["z_star_norm"] = result.z->norm();
  }
  return j;
}

}  // namespace lucid
