#pragma once

#include <filesystem>
#include <utility>

#include <unsupported/Eigen/FFT>

#include "lucid/grid.hpp"

namespace lucid {

// ---------------------------------------------------------------------------
// Portable graymap I/O

/// Reads a P5 (binary) or P2 (ASCII) graymap and scales samples to [0,1]
/// by the file's maxval. Throws FormatError for malformed headers,
/// truncated payloads and unsupported magic numbers; IoError if the file
/// cannot be opened.
ImageGrid load_raster(const std::filesystem::path& path);

/// Writes an 8-bit P5 graymap. Samples are clamped to [0,1] and quantized
/// with round-half-away-from-zero.
void save_raster(const ImageGrid& image, const std::filesystem::path& path);

/// Byte value save_raster writes for a sample.
unsigned char quantize_sample(double sample);

/// Linear range mapping used when dumping non-intensity layers.
struct LayerScale {
  double min = 0.0;
  double max = 1.0;
};

/// Maps [scale.min, scale.max] onto [0,1] and saves. A degenerate range
/// writes mid-gray.
void save_scaled_raster(const ImageGrid& layer, LayerScale scale, const std::filesystem::path& path);

/// Min/max normalization; returns the constants so the layer can be restored.
LayerScale save_normalized_raster(const ImageGrid& layer, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// 2D discrete Fourier transform
//
// Forward is unnormalized, inverse carries the 1/(W*H) factor, so a pointwise
// gain applied between the two acts with exact unit scale.

/// Reusable 2D transform. Holds cached 1D plans and scratch buffers, so one
/// instance must not be shared between threads.
class Fft2 {
 public:
  SpectrumGrid forward(const ImageGrid& image);
  SpectrumGrid forward(const ComplexGrid& grid);
  ComplexGrid inverse(const SpectrumGrid& spectrum);

 private:
  void transform_rows(ComplexGrid& grid, bool inverse);
  void transform_cols(ComplexGrid& grid, bool inverse);

  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> in_;
  std::vector<std::complex<double>> out_;
};

SpectrumGrid forward_transform(const ImageGrid& image);
ComplexGrid inverse_transform(const SpectrumGrid& spectrum);

/// Angular frequency in radians/sample of bin `k` on an `n`-point axis,
/// wrapped into [-pi, pi).
double bin_frequency(Index k, Index n);

/// Moves DC to the grid centre (display convention).
template <typename Scalar>
Grid<Scalar> fft_shift(const Grid<Scalar>& grid) {
  const Index rows = grid.rows();
  const Index cols = grid.cols();
  Grid<Scalar> shifted(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Index src_r = (r + (rows + 1) / 2) % rows;
    for (Index c = 0; c < cols; ++c) {
      shifted(r, c) = grid(src_r, (c + (cols + 1) / 2) % cols);
    }
  }
  return shifted;
}

// ---------------------------------------------------------------------------
// Structural similarity

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean local SSIM over every valid placement of a Gaussian window
/// (no padding). Stabilizers are C1 = (0.01 L)^2, C2 = (0.03 L)^2.
/// Symmetric in (a, b) bit-for-bit.
double ssim(const ImageGrid& a, const ImageGrid& b, int window = kSsimWindow,
            double dynamic_range = 1.0, double sigma = kSsimSigma);

}  // namespace lucid
