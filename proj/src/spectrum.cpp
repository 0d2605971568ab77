#include <numbers>
#include <stdexcept>

#include "lucid/image.hpp"

namespace lucid {
namespace {

void require_transformable(Index rows, Index cols) {
  if (rows < kMinGridEdge || cols < kMinGridEdge) {
    throw std::invalid_argument("transform: grid must be at least 8x8");
  }
}

}  // namespace

void Fft2::transform_rows(ComplexGrid& grid, bool inverse) {
  const Index cols = grid.cols();
  in_.resize(static_cast<std::size_t>(cols));
  out_.resize(static_cast<std::size_t>(cols));
  for (Index r = 0; r < grid.rows(); ++r) {
    std::copy_n(&grid(r, 0), cols, in_.begin());
    if (inverse) {
      fft_.inv(out_.data(), in_.data(), cols);
    } else {
      fft_.fwd(out_.data(), in_.data(), cols);
    }
    std::copy(out_.begin(), out_.end(), &grid(r, 0));
  }
}

void Fft2::transform_cols(ComplexGrid& grid, bool inverse) {
  const Index rows = grid.rows();
  in_.resize(static_cast<std::size_t>(rows));
  out_.resize(static_cast<std::size_t>(rows));
  for (Index c = 0; c < grid.cols(); ++c) {
    for (Index r = 0; r < rows; ++r) in_[static_cast<std::size_t>(r)] = grid(r, c);
    if (inverse) {
      fft_.inv(out_.data(), in_.data(), rows);
    } else {
      fft_.fwd(out_.data(), in_.data(), rows);
    }
    for (Index r = 0; r < rows; ++r) grid(r, c) = out_[static_cast<std::size_t>(r)];
  }
}

SpectrumGrid Fft2::forward(const ImageGrid& image) {
  return forward(ComplexGrid(image.cast<std::complex<double>>()));
}

SpectrumGrid Fft2::forward(const ComplexGrid& grid) {
  require_transformable(grid.rows(), grid.cols());
  SpectrumGrid spectrum = grid;
  transform_rows(spectrum, false);
  transform_cols(spectrum, false);
  return spectrum;
}

ComplexGrid Fft2::inverse(const SpectrumGrid& spectrum) {
  require_transformable(spectrum.rows(), spectrum.cols());
  // Eigen's inverse already divides by the 1D length on each pass.
  ComplexGrid grid = spectrum;
  transform_rows(grid, true);
  transform_cols(grid, true);
  return grid;
}

SpectrumGrid forward_transform(const ImageGrid& image) {
  Fft2 fft;
  return fft.forward(image);
}

ComplexGrid inverse_transform(const SpectrumGrid& spectrum) {
  Fft2 fft;
  return fft.inverse(spectrum);
}

double bin_frequency(Index k, Index n) {
  const Index wrapped = k < (n + 1) / 2 ? k : k - n;
  return 2.0 * std::numbers::pi * static_cast<double>(wrapped) / static_cast<double>(n);
}

}  // namespace lucid
