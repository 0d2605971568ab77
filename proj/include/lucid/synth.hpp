#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lucid/grid.hpp"
#include "lucid/tinynet.hpp"

namespace lucid {

/// a cos(u x1 + v x2 + phase), with x1 the column and x2 the row index.
struct Harmonic {
  double amplitude = 1.0;
  double u = 0.0;
  double v = 0.0;
  double phase = 0.0;
};

/// Exact per-component fields.
struct ComponentTruth {
  ImageGrid amplitude;
  ImageGrid phase;  ///< unwrapped
  ImageGrid omega1;
  ImageGrid omega2;
};

struct SyntheticImage {
  ImageGrid image;
  std::vector<ComponentTruth> truth;
  IndexGrid winner;  ///< half_split only: index of the dominant harmonic
};

enum class ImageKind { PureCosine, MultiHarmonic, RadialChirp, HalfSplit };
enum class DatasetKind { TwoBlob, Xor };

inline constexpr int kSeamWidth = 8;

struct ImageSpec {
  ImageKind kind = ImageKind::PureCosine;
  Index rows = 256;
  Index cols = 256;
  std::vector<Harmonic> harmonics;  ///< one for pure_cosine, two for half_split
  double offset = 0.0;              ///< constant added to the image
  double chirp_rate = 0.002;
};

struct DatasetSpec {
  DatasetKind kind = DatasetKind::TwoBlob;
  int points = 200;
  std::vector<double> mean0 = {-3.0, 0.0};
  std::vector<double> mean1 = {3.0, 0.0};
  double stddev = 1.0;
  double min_margin = 1.0;
  std::uint64_t seed = 1;
};

SyntheticImage pure_cosine(double amplitude, double u, double v, Index rows = 256, Index cols = 256);
SyntheticImage multi_harmonic(const std::vector<Harmonic>& harmonics, Index rows = 256, Index cols = 256,
                              double offset = 0.0);

/// cos(alpha (x1^2 + x2^2)) in coordinates centred at (cols/2, rows/2).
SyntheticImage radial_chirp(double alpha, Index rows = 256, Index cols = 256);

/// Left and right harmonics blended across the vertical centre line with a
/// raised-cosine ramp of `seam` pixels.
SyntheticImage half_split(const Harmonic& left, const Harmonic& right, Index rows = 256, Index cols = 256,
                          int seam = kSeamWidth);

/// Five in-band harmonics with distinct scales and orientations.
std::vector<Harmonic> default_harmonics();

/// Coordinates of pixel (row, col) for radial_chirp.
double chirp_x1(Index col, Index cols);
double chirp_x2(Index row, Index rows);

SyntheticImage generate_image(const ImageSpec& spec);

/// Labels alternate 0/1. Whole draws are repeated from the same seeded
/// stream until every point clears the means' bisector by min_margin.
Dataset two_blob(const DatasetSpec& spec);

Dataset xor_dataset();

Dataset generate_dataset(const DatasetSpec& spec);

std::string to_string(ImageKind kind);
std::string to_string(DatasetKind kind);
ImageKind image_kind_from_string(const std::string& name);
DatasetKind dataset_kind_from_string(const std::string& name);

nlohmann::json to_json(const ImageSpec& spec);
ImageSpec image_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

}  // namespace lucid
