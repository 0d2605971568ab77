#include <cmath>
#include <stdexcept>
#include <string>

#include "lucid/gabor.hpp"
#include "lucid/image.hpp"

namespace lucid {
namespace {

constexpr double kPi = std::numbers::pi;

// Distance between orientations, wrapped into [-pi/2, pi/2).
double orientation_distance(double theta, double theta0) {
  const double d = theta - theta0;
  return d - kPi * std::floor(d / kPi + 0.5);
}

double gaussian(double d, double sigma) { return std::exp(-d * d / (2.0 * sigma * sigma)); }

// sigma for which a Gaussian falls to kRawCrossing at distance `half_width`.
double sigma_for_crossing(double half_width) {
  return half_width / std::sqrt(2.0 * std::log(1.0 / kRawCrossing));
}

// Polar coordinates and half-plane membership of every DFT bin.
struct PolarLattice {
  ImageGrid rho;
  ImageGrid theta;
  MaskGrid upper;

  PolarLattice(Index rows, Index cols) : rho(rows, cols), theta(rows, cols), upper(rows, cols) {
    for (Index r = 0; r < rows; ++r) {
      const double v = bin_frequency(r, rows);
      for (Index c = 0; c < cols; ++c) {
        const double u = bin_frequency(c, cols);
        rho(r, c) = std::hypot(u, v);
        theta(r, c) = std::atan2(v, u);
        upper(r, c) = in_upper_half_plane(u, v);
      }
    }
  }
};

// Raw gain at one polar frequency, without the half-plane mask.
double raw_point(const GaborChannel& ch, double rho, double theta) {
  if (ch.is_lowpass) return gaussian(rho, ch.radial_sigma);
  return gaussian(rho - ch.radius(), ch.radial_sigma) * gaussian(orientation_distance(theta, ch.angle()), ch.angular_sigma);
}

ImageGrid raw_gain(const GaborChannel& ch, const PolarLattice& lattice) {
  ImageGrid gain(lattice.rho.rows(), lattice.rho.cols());
  for (Index i = 0; i < gain.size(); ++i) gain.data()[i] = raw_point(ch, lattice.rho.data()[i], lattice.theta.data()[i]);
  return gain;
}

void require_lattice(Index rows, Index cols) {
  if (rows < kMinGridEdge || cols < kMinGridEdge) {
    throw std::invalid_argument("channel response: grid must be at least 8x8");
  }
}

}  // namespace

double GaborChannel::radius() const { return std::hypot(u, v); }
double GaborChannel::angle() const { return std::atan2(v, u); }

int FilterBank::lowpass_index() const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].is_lowpass) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> FilterBank::channels_in_scale(int scale_id) const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (!channels[i].is_lowpass && channels[i].scale_id == scale_id) ids.push_back(static_cast<int>(i));
  }
  return ids;
}

GaborChannel make_channel(double u, double v, double radial_sigma, double angular_sigma) {
  if (!in_upper_half_plane(u, v)) throw std::invalid_argument("make_channel: centre must lie in the upper half-plane");
  if (std::abs(u) > kPi || std::abs(v) > kPi) throw std::invalid_argument("make_channel: centre beyond pi");
  if (!(radial_sigma > 0.0) || !(angular_sigma > 0.0)) throw std::invalid_argument("make_channel: sigmas must be positive");
  GaborChannel ch;
  ch.u = u;
  ch.v = v;
  ch.radial_sigma = radial_sigma;
  ch.angular_sigma = angular_sigma;
  return ch;
}

GaborChannel make_lowpass(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("make_lowpass: sigma must be positive");
  GaborChannel ch;
  ch.radial_sigma = sigma;
  ch.angular_sigma = kPi;
  ch.is_lowpass = true;
  return ch;
}

FilterBank design_bank(int scales, int orientations, double lowpass_cutoff) {
  if (scales < 1) throw std::invalid_argument("design_bank: scales must be >= 1");
  if (orientations < 2) throw std::invalid_argument("design_bank: orientations must be >= 2");
  if (!(lowpass_cutoff > 0.0 && lowpass_cutoff < kPi / 4.0)) {
    throw std::invalid_argument("design_bank: lowpass cutoff must lie in (0, pi/4)");
  }

  FilterBank bank;
  bank.scales = scales;
  bank.orientations = orientations;
  bank.lowpass_cutoff = lowpass_cutoff;
  const double ratio = kPi / lowpass_cutoff;
  for (int s = 0; s <= scales; ++s) {
    bank.scale_band_edges.push_back(s == scales ? kPi : lowpass_cutoff * std::pow(ratio, double(s) / scales));
  }

  bank.channels.push_back(make_lowpass(sigma_for_crossing(lowpass_cutoff)));

  const double angular_sigma = sigma_for_crossing(kPi / (2.0 * orientations));
  for (int s = 0; s < scales; ++s) {
    const double lo = bank.scale_band_edges[s];
    const double hi = bank.scale_band_edges[s + 1];
    const double centre = 0.5 * (lo + hi);
    const double radial_sigma = sigma_for_crossing(0.5 * (hi - lo));
    for (int k = 0; k < orientations; ++k) {
      const double theta = kPi * k / orientations;
      GaborChannel ch;
      ch.u = centre * std::cos(theta);
      ch.v = k == 0 ? 0.0 : centre * std::sin(theta);
      ch.radial_sigma = radial_sigma;
      ch.angular_sigma = angular_sigma;
      ch.scale_id = s;
      ch.orientation_id = k;
      bank.channels.push_back(ch);
    }
  }
  return bank;
}

ImageGrid channel_response(const GaborChannel& channel, Index rows, Index cols) {
  require_lattice(rows, cols);
  const PolarLattice lattice(rows, cols);
  ImageGrid gain = raw_gain(channel, lattice);
  if (!channel.is_lowpass) gain = lattice.upper.select(gain, 0.0);
  return gain;
}

std::vector<ImageGrid> bank_responses(const FilterBank& bank, Index rows, Index cols) {
  require_lattice(rows, cols);
  std::vector<ImageGrid> responses;
  responses.reserve(bank.channels.size());
  const PolarLattice lattice(rows, cols);
  ImageGrid total = ImageGrid::Zero(rows, cols);
  for (const GaborChannel& ch : bank.channels) {
    responses.push_back(raw_gain(ch, lattice));
    total += responses.back();
  }

  const ImageGrid inverse_total = (total > 0.0).select(total.inverse(), 0.0);
  for (std::size_t i = 0; i < responses.size(); ++i) {
    ImageGrid& g = responses[i];
    g *= inverse_total;
    if (!bank.channels[i].is_lowpass) g = lattice.upper.select(g, 0.0);
  }
  return responses;
}

std::vector<double> bank_gains(const FilterBank& bank, double u, double v) {
  const double rho = std::hypot(u, v);
  const double theta = std::atan2(v, u);
  std::vector<double> gains;
  gains.reserve(bank.channels.size());
  double total = 0.0;
  for (const GaborChannel& ch : bank.channels) {
    gains.push_back(raw_point(ch, rho, theta));
    total += gains.back();
  }
  const bool upper = in_upper_half_plane(u, v);
  for (std::size_t i = 0; i < gains.size(); ++i) {
    gains[i] = total > 0.0 ? gains[i] * (1.0 / total) : 0.0;
    if (!bank.channels[i].is_lowpass && !upper) gains[i] = 0.0;
  }
  return gains;
}

ImageGrid coverage_map(const FilterBank& bank, Index rows, Index cols, std::span<const int> channel_ids) {
  require_lattice(rows, cols);
  ImageGrid sum = ImageGrid::Zero(rows, cols);
  if (channel_ids.empty()) return sum;
  const std::vector<ImageGrid> responses = bank_responses(bank, rows, cols);
  for (int id : channel_ids) {
    if (id < 0 || id >= static_cast<int>(responses.size())) {
      throw std::invalid_argument("coverage_map: channel id " + std::to_string(id) + " out of range");
    }
    const ImageGrid& g = responses[static_cast<std::size_t>(id)];
    if (bank.channels[static_cast<std::size_t>(id)].is_lowpass) {
      sum += g;
      continue;
    }
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) sum(r, c) += g(r, c) + g((rows - r) % rows, (cols - c) % cols);
    }
  }
  return fft_shift(sum);
}

ImageGrid coverage_map(const FilterBank& bank, Index rows, Index cols) {
  std::vector<int> all(bank.channels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return coverage_map(bank, rows, cols, all);
}

void validate(const FilterBank& bank) {
  int lowpass = 0;
  for (const GaborChannel& ch : bank.channels) {
    if (!(ch.radial_sigma > 0.0) || !(ch.angular_sigma > 0.0)) throw std::invalid_argument("bank: non-positive sigma");
    if (ch.is_lowpass) {
      ++lowpass;
      continue;
    }
    if (!in_upper_half_plane(ch.u, ch.v)) throw std::invalid_argument("bank: bandpass centre outside the upper half-plane");
    if (ch.scale_id < 0 || ch.scale_id >= bank.scales) throw std::invalid_argument("bank: scale id out of range");
    if (bank.scale_band_edges.size() == static_cast<std::size_t>(bank.scales) + 1) {
      const double rho = ch.radius();
      if (rho < bank.scale_band_edges[ch.scale_id] || rho > bank.scale_band_edges[ch.scale_id + 1]) {
        throw std::invalid_argument("bank: channel centre outside its scale band");
      }
    }
  }
  if (lowpass != 1) throw std::invalid_argument("bank: exactly one lowpass channel required");
}

nlohmann::json to_json(const FilterBank& bank) {
  nlohmann::json channels = nlohmann::json::array();
  for (std::size_t i = 0; i < bank.channels.size(); ++i) {
    const GaborChannel& ch = bank.channels[i];
    channels.push_back({{"id", i},
                        {"u", ch.u},
                        {"v", ch.v},
                        {"radial_sigma", ch.radial_sigma},
                        {"angular_sigma", ch.angular_sigma},
                        {"scale_id", ch.scale_id},
                        {"orientation_id", ch.orientation_id},
                        {"is_lowpass", ch.is_lowpass}});
  }
  return {{"scales", bank.scales},
          {"orientations", bank.orientations},
          {"lowpass_cutoff", bank.lowpass_cutoff},
          {"scale_band_edges", bank.scale_band_edges},
          {"channels", std::move(channels)}};
}

FilterBank bank_from_json(const nlohmann::json& j) {
  FilterBank bank;
  bank.scales = j.at("scales").get<int>();
  bank.orientations = j.at("orientations").get<int>();
  bank.lowpass_cutoff = j.at("lowpass_cutoff").get<double>();
  bank.scale_band_edges = j.at("scale_band_edges").get<std::vector<double>>();
  for (const auto& c : j.at("channels")) {
    GaborChannel ch;
    ch.u = c.at("u").get<double>();
    ch.v = c.at("v").get<double>();
    ch.radial_sigma = c.at("radial_sigma").get<double>();
    ch.angular_sigma = c.at("angular_sigma").get<double>();
    ch.scale_id = c.at("scale_id").get<int>();
    ch.orientation_id = c.at("orientation_id").get<int>();
    ch.is_lowpass = c.at("is_lowpass").get<bool>();
    bank.channels.push_back(ch);
  }
  validate(bank);
  return bank;
}

}  // namespace lucid
