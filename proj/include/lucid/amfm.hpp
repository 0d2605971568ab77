#pragma once

#include <span>
#include <string>
#include <vector>

#include "lucid/gabor.hpp"
#include "lucid/grid.hpp"

namespace lucid {

/// Instantaneous amplitude, phase and frequency of one channel output.
struct AmfmComponent {
  ImageGrid amplitude;  ///< A >= 0
  ImageGrid phase;      ///< phi in (-pi, pi]
  ImageGrid omega1;     ///< d phi / d x1, rad/sample, in [-pi, pi]
  ImageGrid omega2;     ///< d phi / d x2
  int channel_id = -1;
};

struct FrequencyField {
  ImageGrid omega1;
  ImageGrid omega2;
  MaskGrid flagged;  ///< |z| at or below the amplitude floor
  Index flagged_count = 0;
};

inline constexpr double kAmplitudeFloorRatio = 1e-8;

/// Quasi-eigenfunction estimate of grad(arg z): per axis
/// |omega| = arccos(Re[(z(x+e) + z(x-e)) / 2 z(x)]) with the sign of the
/// wrapped phase step arg(z(x+e) conj z(x)). Border rows/columns copy the
/// nearest interior estimate; pixels with |z| <= floor_ratio * max|z| copy
/// the nearest unflagged pixel (all-flagged grids yield zero).
FrequencyField estimate_frequency(const ComplexGrid& analytic, double floor_ratio = kAmplitudeFloorRatio);

/// Amplitude, phase and frequency of an analytic (or lowpass) channel output.
AmfmComponent component_from_analytic(const ComplexGrid& z, bool lowpass, int channel_id = -1);

/// Filters `image` through the raw response of one standalone channel.
/// Bandpass output is scaled by 2 to restore the suppressed half-plane.
AmfmComponent demodulate_channel(const ImageGrid& image, const GaborChannel& channel);

struct Decomposition {
  std::vector<AmfmComponent> components;  ///< aligned with bank.channels
  FilterBank bank;
  Index rows = 0;
  Index cols = 0;
};

struct DecomposeOptions {
  /// Worker threads for per-channel demodulation. 0 means one per hardware
  /// thread. Output does not depend on this value.
  unsigned threads = 1;
};

/// Demodulates every bank channel through the bank's normalized responses.
Decomposition decompose(const ImageGrid& image, const FilterBank& bank, const DecomposeOptions& options = {});

struct DominantMap {
  int scale_id = 0;  ///< -1 when taken across all scales
  IndexGrid winner;  ///< bank channel index per pixel
  AmfmComponent dominant;
};

/// Per-pixel argmax of amplitude over one scale's channels, ties to the
/// lowest channel index.
DominantMap dominant_analysis(const Decomposition& decomposition, int scale_id);

/// Same argmax over every bandpass channel of the bank; scale_id is -1.
DominantMap dominant_bandpass(const Decomposition& decomposition);

enum class ReconstructionMode { AmFm, FmOnly };

/// AmFm: sum A cos(phi). FmOnly: sum cos(phi). An empty list yields a
/// rows x cols zero image.
ImageGrid reconstruct(std::span<const AmfmComponent> components, ReconstructionMode mode, Index rows = 0,
                      Index cols = 0);

/// Reconstruction from the listed channel ids of a decomposition.
ImageGrid reconstruct(const Decomposition& decomposition, std::span<const int> channel_ids,
                      ReconstructionMode mode);

/// Sum of A^2 over the grid, the ordering key for dominant-filter selection.
double component_energy(const AmfmComponent& component);

struct FilterSelection {
  std::vector<int> channels;  ///< in the order they were added
  ImageGrid reconstruction;
  std::vector<double> ssim_trace;
  bool reached = false;
  double threshold = 0.0;
};

inline constexpr double kSsimAcceptance = 0.85;

/// Greedy selection: channels sorted by descending energy are added one at
/// a time until the AM-FM reconstruction's SSIM against `image` exceeds
/// `threshold`.
FilterSelection select_dominant_filters(const ImageGrid& image, const FilterBank& bank,
                                        double threshold = kSsimAcceptance,
                                        const DecomposeOptions& options = {});

/// Same greedy loop on an existing decomposition.
FilterSelection select_dominant_filters(const ImageGrid& image, const Decomposition& decomposition,
                                        double threshold = kSsimAcceptance);

struct FeatureLayer {
  std::string name;
  int scale_id = 0;
  ImageGrid data;
};

/// Per scale: dominant amplitude, |omega| and atan2(omega2, omega1).
std::vector<FeatureLayer> export_features(const Decomposition& decomposition);

}  // namespace lucid
