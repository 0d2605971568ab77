#pragma once

#include <numbers>
#include <span>
#include <vector>

#include <json.hpp>

#include "lucid/grid.hpp"

namespace lucid {

/// One polar-Gaussian bandpass channel (or the single isotropic lowpass).
/// Bandpass centres live in the upper half-plane (v > 0, or v == 0 and
/// u > 0); filtering with the one-sided gain yields the analytic component.
struct GaborChannel {
  double u = 0.0;  ///< centre frequency along x1 (columns), rad/sample
  double v = 0.0;  ///< centre frequency along x2 (rows), rad/sample
  double radial_sigma = 1.0;
  double angular_sigma = 1.0;
  int scale_id = -1;        ///< -1 for the lowpass channel
  int orientation_id = -1;  ///< -1 for the lowpass channel
  bool is_lowpass = false;

  double radius() const;
  double angle() const;
};

struct FilterBank {
  std::vector<GaborChannel> channels;  ///< lowpass first, then scale-major
  int scales = 0;
  int orientations = 0;
  double lowpass_cutoff = 0.0;
  std::vector<double> scale_band_edges;  ///< scales + 1 radial edges, last is pi

  int lowpass_index() const;
  std::vector<int> channels_in_scale(int scale_id) const;
};

inline constexpr int kDefaultScales = 3;
inline constexpr int kDefaultOrientations = 8;
inline constexpr double kDefaultLowpassCutoff = std::numbers::pi / 16.0;

/// Raw gain of two neighbouring channels at their shared boundary. Bank
/// responses are normalized to a partition of unity, which turns this into
/// an exact half-amplitude crossing while keeping peaks close to 1.
inline constexpr double kRawCrossing = 1.0 / 16.0;

/// Builds 1 + scales*orientations channels: radial bands geometrically
/// spaced from `lowpass_cutoff` to pi, orientations at pi*k/orientations.
FilterBank design_bank(int scales = kDefaultScales, int orientations = kDefaultOrientations,
                       double lowpass_cutoff = kDefaultLowpassCutoff);

/// Standalone bandpass channel centred at (u, v), which must lie in the
/// upper half-plane.
GaborChannel make_channel(double u, double v, double radial_sigma, double angular_sigma);

GaborChannel make_lowpass(double sigma);

/// Raw separable polar Gaussian G(rho, theta) of one channel sampled on the
/// DFT lattice of a rows x cols grid. Angular distance wraps modulo pi;
/// bandpass gain is zero outside the upper half-plane.
ImageGrid channel_response(const GaborChannel& channel, Index rows, Index cols);

/// Normalized responses of every bank channel (bank order): each raw gain
/// divided by the summed raw gain of the bank at that bin. The mirrored sum
/// over all channels is 1 everywhere except the Nyquist row.
std::vector<ImageGrid> bank_responses(const FilterBank& bank, Index rows, Index cols);

/// Normalized gains of every channel at one frequency; matches
/// bank_responses at lattice points.
std::vector<double> bank_gains(const FilterBank& bank, double u, double v);

/// Summed mirrored normalized gain of the chosen channels, DC at the grid
/// centre. Empty `channel_ids` selects nothing (zero map).
ImageGrid coverage_map(const FilterBank& bank, Index rows, Index cols, std::span<const int> channel_ids);

/// Coverage of the whole bank.
ImageGrid coverage_map(const FilterBank& bank, Index rows, Index cols);

/// True when (u, v) is on the retained half of the frequency plane.
inline bool in_upper_half_plane(double u, double v) { return v > 0.0 || (v == 0.0 && u > 0.0); }

nlohmann::json to_json(const FilterBank& bank);
FilterBank bank_from_json(const nlohmann::json& j);

/// Checks the structural invariants; throws std::invalid_argument.
void validate(const FilterBank& bank);

}  // namespace lucid
