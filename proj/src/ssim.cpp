#include <cmath>
#include <stdexcept>
#include <vector>

#include "lucid/image.hpp"

namespace lucid {
namespace {

Eigen::VectorXd gaussian_window(int size, double sigma) {
  Eigen::VectorXd w(size);
  const double centre = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) {
    const double d = i - centre;
    w(i) = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return w / w.sum();
}

// Separable "valid" correlation: output is (rows-size+1) x (cols-size+1).
ImageGrid filter_valid(const ImageGrid& in, const Eigen::VectorXd& w) {
  const Index size = w.size();
  const Index out_rows = in.rows() - size + 1;
  const Index out_cols = in.cols() - size + 1;
  ImageGrid horizontal(in.rows(), out_cols);
  for (Index r = 0; r < in.rows(); ++r) {
    for (Index c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (Index k = 0; k < size; ++k) acc += w(k) * in(r, c + k);
      horizontal(r, c) = acc;
    }
  }
  ImageGrid out(out_rows, out_cols);
  for (Index r = 0; r < out_rows; ++r) {
    for (Index c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (Index k = 0; k < size; ++k) acc += w(k) * horizontal(r + k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const ImageGrid& a, const ImageGrid& b, int window, double dynamic_range, double sigma) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("ssim: dimension mismatch");
  }
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("ssim: window must be a positive odd count");
  if (window > std::min(a.rows(), a.cols())) throw std::invalid_argument("ssim: window larger than image");
  if (!(dynamic_range > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("ssim: non-positive parameter");

  const Eigen::VectorXd w = gaussian_window(window, sigma);
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);

  const ImageGrid mu_a = filter_valid(a, w);
  const ImageGrid mu_b = filter_valid(b, w);
  const ImageGrid e_aa = filter_valid(a * a, w);
  const ImageGrid e_bb = filter_valid(b * b, w);
  const ImageGrid e_ab = filter_valid(a * b, w);

  // Every term below is written so that swapping a and b reproduces the
  // same floating-point operations.
  const ImageGrid mu_ab = mu_a * mu_b;
  const ImageGrid var_a = e_aa - mu_a * mu_a;
  const ImageGrid var_b = e_bb - mu_b * mu_b;
  const ImageGrid cov = e_ab - mu_ab;
  const ImageGrid num = (2.0 * mu_ab + c1) * (2.0 * cov + c2);
  const ImageGrid den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return (num / den).mean();
}

}  // namespace lucid
