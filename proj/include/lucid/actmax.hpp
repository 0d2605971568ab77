#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "lucid/tinynet.hpp"

namespace lucid {

/// Gaussian-visible RBM density expert:
///   log p(x) = sum_j softplus(w_j^T x + b_j) - 1/2 x^T diag(variance)^-1 x + const.
struct RbmExpert {
  MatrixXd weights;      ///< J x d, row j is w_j
  VectorXd hidden_bias;  ///< J
  VectorXd variance;     ///< d, diagonal of Sigma, all > 0
};

/// Maps codes to inputs. The wrapped net must have a linear head.
struct Decoder {
  DenseNet net;
};

struct ValueAndGradient {
  double value = 0.0;
  VectorXd gradient;
};

struct AscentOptions {
  double step = 0.1;
  int max_iters = 10000;
  double tol = 1e-6;          ///< stop once the gradient norm falls below
  int max_halvings = 30;      ///< backtracking retries per iteration
  bool record_iterates = false;
};

struct PrototypeResult {
  VectorXd x;                    ///< prototype in input space
  std::optional<VectorXd> z;     ///< code, for code-space searches
  std::vector<double> objective_trace;  ///< objective after each accepted step
  std::vector<VectorXd> iterates;       ///< filled when record_iterates is set
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<ValueAndGradient(const VectorXd&)>;

/// Fixed-step gradient ascent. A step that would lower the objective (or
/// make it non-finite) is halved and retried, so the recorded trace never
/// decreases. Throws NumericalError if the starting objective is non-finite
/// or no finite value is found after max_halvings.
PrototypeResult gradient_ascent(const Objective& objective, const VectorXd& init, const AscentOptions& options);

/// Overflow-safe log(1 + exp(t)).
double softplus(double t);
double logistic(double t);

/// Unnormalized log density and its gradient.
ValueAndGradient rbm_log_density(const RbmExpert& expert, const VectorXd& x);

/// max_x log p(c|x) - lambda ||x||^2
PrototypeResult maximize_class(const DenseNet& net, int c, double lambda, const VectorXd& init,
                               const AscentOptions& options = {});

/// max_x log p(c|x) + alpha log p_expert(x) - lambda ||x||^2. With alpha == 0
/// the expert is skipped entirely and the iterates coincide with
/// maximize_class for the same lambda.
PrototypeResult maximize_with_expert(const DenseNet& net, int c, const RbmExpert& expert, double alpha,
                                     const VectorXd& init, const AscentOptions& options = {}, double lambda = 0.0);

/// max_z log p(c|g(z)) - lambda ||z||^2, returning z* and x* = g(z*).
PrototypeResult maximize_in_code_space(const DenseNet& net, int c, const Decoder& decoder, double lambda,
                                       const VectorXd& init_z, const AscentOptions& options = {});

VectorXd decode(const Decoder& decoder, const VectorXd& z);

/// Single linear layer with identity weights and zero bias.
Decoder identity_decoder(Eigen::Index dim);

struct RbmTraining {
  RbmExpert expert;
  std::vector<double> reconstruction_error;  ///< mean squared error per epoch
};

/// CD-1 with Gaussian visible units. Variance is fixed to the per-dimension
/// population variance of `data` (floored at 1e-6); hidden states are
/// sampled from Rng(seed).
RbmTraining train_rbm(const MatrixXd& data, int hidden, int epochs, double learning_rate, std::uint64_t seed);

/// Expert whose density has its unique maximum at `mean`: one hidden unit
/// per non-zero coordinate, variance max(1, (4 mean_i / 3)^2).
RbmExpert peaked_expert(const VectorXd& mean);

nlohmann::json to_json(const RbmExpert& expert);
RbmExpert rbm_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PrototypeResult& result);

}  // namespace lucid
