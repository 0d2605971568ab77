#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lucid {

using Eigen::Index;

/// Dense 2D raster, row-major so that (row, col) == (x2, x1) and the
/// storage order matches the on-disk raster order.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageGrid = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;
using IndexGrid = Grid<int>;
using MaskGrid = Grid<bool>;

/// Spectrum of an ImageGrid: DC at (0,0), bin k of an n-point axis maps to
/// 2*pi*k/n wrapped into [-pi, pi).
using SpectrumGrid = ComplexGrid;

/// Smallest edge accepted by transform and decomposition operations.
inline constexpr Index kMinGridEdge = 8;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& values) {
  return values.derived().allFinite();
}

}  // namespace lucid
