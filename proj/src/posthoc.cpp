#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lucid/error.hpp"
#include "lucid/posthoc.hpp"
#include "lucid/rng.hpp"

namespace lucid {
namespace {

struct Centered {
  MatrixXd gram;   // Zc^T W Zc
  VectorXd cross;  // Zc^T W yc
  double total = 0.0;  // yc^T W yc
  VectorXd z_mean;
  double y_mean = 0.0;
};

bool constant(const VectorXd& y) { return y.size() == 0 || y.maxCoeff() == y.minCoeff(); }

Centered center(const MatrixXd& Z, const VectorXd& y, const VectorXd& w) {
  Centered c;
  const double wsum = w.sum();
  c.z_mean = (Z.transpose() * w) / wsum;
  c.y_mean = constant(y) ? y[0] : w.dot(y) / wsum;
  const MatrixXd Zc = Z.rowwise() - c.z_mean.transpose();
  const VectorXd yc = y.array() - c.y_mean;
  const MatrixXd WZc = w.asDiagonal() * Zc;
  c.gram = Zc.transpose() * WZc;
  c.cross = WZc.transpose() * yc;
  c.total = yc.dot(w.cwiseProduct(yc));
  return c;
}

VectorXd solve_subset(const Centered& c, const std::vector<int>& subset) {
  const auto k = static_cast<Eigen::Index>(subset.size());
  MatrixXd A(k, k);
  VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    b[i] = c.cross[subset[i]];
    for (Eigen::Index j = 0; j < k; ++j) A(i, j) = c.gram(subset[i], subset[j]);
  }
  A.diagonal().array() += kRidge;
  return A.ldlt().solve(b);
}

double subset_rss(const Centered& c, const std::vector<int>& subset) {
  const VectorXd beta = solve_subset(c, subset);
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    lin += beta[static_cast<Eigen::Index>(i)] * c.cross[subset[i]];
    for (std::size_t j = 0; j < subset.size(); ++j) {
      quad += beta[static_cast<Eigen::Index>(i)] * c.gram(subset[i], subset[j]) * beta[static_cast<Eigen::Index>(j)];
    }
  }
  return c.total - 2.0 * lin + quad;
}

}  // namespace

InterpretableMapping tabular_mapping(const VectorXd& instance) {
  if (instance.size() == 0) throw std::invalid_argument("tabular_mapping: empty instance");
  InterpretableMapping m;
  m.d_prime = static_cast<int>(instance.size());
  m.realize = [instance](const VectorXd& z) -> VectorXd {
    if (z.size() != instance.size()) throw std::invalid_argument("tabular_mapping: wrong mask size");
    return (z.array() != 0.0).select(instance, 0.0);
  };
  return m;
}

IndexGrid block_labels(Eigen::Index rows, Eigen::Index cols, int block) {
  if (block < 1) throw std::invalid_argument("block size must be positive");
  const Eigen::Index per_row = (cols + block - 1) / block;
  IndexGrid labels(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) labels(r, c) = static_cast<int>((r / block) * per_row + c / block);
  return labels;
}

InterpretableMapping image_block_mapping(const ImageGrid& image, int block) {
  if (image.size() == 0) throw std::invalid_argument("image_block_mapping: empty image");
  const IndexGrid labels = block_labels(image.rows(), image.cols(), block);
  const double mean = image.mean();
  InterpretableMapping m;
  m.d_prime = labels.maxCoeff() + 1;
  const VectorXd flat = Eigen::Map<const VectorXd>(image.data(), image.size());
  const Eigen::VectorXi flat_labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), labels.size());
  m.realize = [flat, flat_labels, mean, d = m.d_prime](const VectorXd& z) -> VectorXd {
    if (z.size() != d) throw std::invalid_argument("image_block_mapping: wrong mask size");
    VectorXd out = flat;
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (z[flat_labels[i]] == 0.0) out[i] = mean;
    return out;
  };
  return m;
}

MatrixXd sample_perturbations(int d_prime, int n, std::uint64_t seed) {
  if (d_prime < 1) throw std::invalid_argument("sample_perturbations: d' must be positive");
  if (n < d_prime + 1) {
    throw std::invalid_argument("sample_perturbations: need at least " + std::to_string(d_prime + 1) + " samples");
  }
  MatrixXd Z = MatrixXd::Zero(n, d_prime);
  Z.row(0).setOnes();
  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(d_prime));
  for (int s = 1; s < n; ++s) {
    const int active = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_prime)));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < active; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_prime - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      Z(s, order[static_cast<std::size_t>(i)]) = 1.0;
    }
  }
  return Z;
}

double proximity_weight(const VectorXd& z, double kernel_width) {
  if (!(kernel_width > 0.0)) throw std::invalid_argument("proximity_weight: kernel width must be positive");
  if (z.size() == 0) throw std::invalid_argument("proximity_weight: empty vector");
  const double off = static_cast<double>((z.array() == 0.0).count());
  const double dist = off / static_cast<double>(z.size());
  return std::exp(-(dist * dist) / (kernel_width * kernel_width));
}

double weighted_r2(const VectorXd& y, const VectorXd& fitted, const VectorXd& w) {
  if (constant(y)) return 1.0;
  const double mean = w.dot(y) / w.sum();
  const double tss = w.dot((y.array() - mean).square().matrix());
  const double rss = w.dot((y - fitted).array().square().matrix());
  if (tss == 0.0) return 1.0;
  return 1.0 - rss / tss;
}

LocalExplanation fit_weighted_surrogate(const MatrixXd& Z, const VectorXd& y, const VectorXd& w, int budget) {
  const auto d = static_cast<int>(Z.cols());
  if (Z.rows() == 0 || d == 0) throw std::invalid_argument("surrogate: empty design");
  if (y.size() != Z.rows() || w.size() != Z.rows()) throw std::invalid_argument("surrogate: size mismatch");
  if (budget < 0 || budget > d) throw std::invalid_argument("surrogate: budget must lie in [0, d']");
  if ((w.array() < 0.0).any() || !(w.sum() > 0.0)) throw std::invalid_argument("surrogate: weights must be non-negative");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i])) throw NumericalError("surrogate: non-finite score", static_cast<long>(i));

  const Centered c = center(Z, y, w);
  LocalExplanation out;
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  for (int step = 0; step < budget; ++step) {
    int best = -1;
    double best_rss = 0.0;
    std::vector<int> trial = out.selected;
    trial.push_back(0);
    for (int j = 0; j < d; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      trial.back() = j;
      const double rss = subset_rss(c, trial);
      if (best < 0 || rss < best_rss) {
        best = j;
        best_rss = rss;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.selected.push_back(best);
  }

  out.feature_weights = VectorXd::Zero(d);
  const VectorXd beta = solve_subset(c, out.selected);
  double shift = 0.0;
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    out.feature_weights[out.selected[i]] = beta[static_cast<Eigen::Index>(i)];
    shift += beta[static_cast<Eigen::Index>(i)] * c.z_mean[out.selected[i]];
  }
  out.intercept = c.y_mean - shift;
  const VectorXd fitted = (Z * out.feature_weights).array() + out.intercept;
  out.local_fidelity = weighted_r2(y, fitted, w);
  return out;
}

LocalExplanation fit_local_surrogate(const BlackBox& blackbox, const InterpretableMapping& mapping,
                                     const SurrogateOptions& options) {
  if (!blackbox || !mapping.realize) throw std::invalid_argument("surrogate: missing black box or mapping");
  const int budget = options.budget == 0 ? mapping.d_prime : options.budget;
  if (budget < 1 || budget > mapping.d_prime) throw std::invalid_argument("surrogate: budget must lie in [1, d']");
  const MatrixXd Z = sample_perturbations(mapping.d_prime, options.samples, options.seed);
  VectorXd y(Z.rows());
  VectorXd w(Z.rows());
  for (Eigen::Index s = 0; s < Z.rows(); ++s) {
    const VectorXd z = Z.row(s).transpose();
    y[s] = blackbox(mapping.realize(z));
    if (!std::isfinite(y[s])) throw NumericalError("surrogate: black box returned a non-finite score", static_cast<long>(s));
    w[s] = proximity_weight(z, options.kernel_width);
  }
  return fit_weighted_surrogate(Z, y, w, budget);
}

ImageGrid block_heatmap(const LocalExplanation& explanation, Eigen::Index rows, Eigen::Index cols, int block) {
  const IndexGrid labels = block_labels(rows, cols, block);
  if (labels.maxCoeff() + 1 != explanation.feature_weights.size()) {
    throw std::invalid_argument("block_heatmap: explanation does not match the block grid");
  }
  return labels.unaryExpr([&](int l) { return explanation.feature_weights[l]; });
}

nlohmann::json to_json(const LocalExplanation& e) {
  return {{"feature_weights", std::vector<double>(e.feature_weights.begin(), e.feature_weights.end())},
          {"intercept", e.intercept},
          {"selected", e.selected},
          {"local_fidelity", e.local_fidelity}};
}

}  // namespace lucid
