#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace lucid::testing {

inline constexpr double kStep = 1e-5;

/// Central differences of a scalar function.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = kStep) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest elementwise |a - b| / max(|a|, |b|, floor). The floor keeps
/// near-zero entries from turning truncation noise into large ratios.
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-3) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace lucid::testing
