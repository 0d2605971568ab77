#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include <Eigen/Dense>

#include "lucid/image.hpp"

namespace lucid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Binary interpretable representation of one instance. realize() must
/// return the instance itself for the all-ones vector.
struct InterpretableMapping {
  int d_prime = 0;
  std::function<VectorXd(const VectorXd&)> realize;
};

/// Feature i switched off means coordinate i is zeroed.
InterpretableMapping tabular_mapping(const VectorXd& instance);

inline constexpr int kDefaultBlockSize = 8;

/// One feature per block x block tile (edge tiles may be smaller). Switched
/// off tiles are filled with the image mean. Vectors are row-major pixels.
InterpretableMapping image_block_mapping(const ImageGrid& image, int block = kDefaultBlockSize);

/// Tile index of each pixel under image_block_mapping.
IndexGrid block_labels(Eigen::Index rows, Eigen::Index cols, int block = kDefaultBlockSize);

using BlackBox = std::function<double(const VectorXd&)>;

struct LocalExplanation {
  VectorXd feature_weights;  ///< d', exactly zero outside `selected`
  double intercept = 0.0;
  std::vector<int> selected;  ///< in order of selection
  double local_fidelity = 0.0;  ///< weighted R^2
};

struct SurrogateOptions {
  int budget = 0;  ///< K; 0 means d'
  int samples = 1000;
  double kernel_width = 0.25;
  std::uint64_t seed = 1;
};

inline constexpr double kRidge = 1e-8;

/// Rows are binary vectors; row 0 is all ones. Needs n >= d' + 1.
MatrixXd sample_perturbations(int d_prime, int n, std::uint64_t seed);

/// exp(-(hamming(z, 1) / d')^2 / width^2)
double proximity_weight(const VectorXd& z, double kernel_width);

/// Sparse weighted least squares on fixed data: greedy forward selection of
/// `budget` columns of Z, then a ridge-stabilized fit with intercept.
LocalExplanation fit_weighted_surrogate(const MatrixXd& Z, const VectorXd& y, const VectorXd& w, int budget);

LocalExplanation fit_local_surrogate(const BlackBox& blackbox, const InterpretableMapping& mapping,
                                     const SurrogateOptions& options = {});

/// Weighted R^2; 1 when the target has zero weighted variance.
double weighted_r2(const VectorXd& y, const VectorXd& fitted, const VectorXd& w);

/// Per-pixel weight of the tile covering it.
ImageGrid block_heatmap(const LocalExplanation& explanation, Eigen::Index rows, Eigen::Index cols,
                        int block = kDefaultBlockSize);

nlohmann::json to_json(const LocalExplanation& explanation);

}  // namespace lucid
