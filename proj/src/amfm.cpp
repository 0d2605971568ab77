#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "lucid/amfm.hpp"
#include "lucid/error.hpp"
#include "lucid/image.hpp"

namespace lucid {
namespace {

constexpr double kPi = std::numbers::pi;

// One axis of the QEA estimator at an interior pixel.
double axis_frequency(std::complex<double> prev, std::complex<double> here, std::complex<double> next) {
  const double ratio = std::real((next + prev) / (2.0 * here));
  const double magnitude = std::acos(std::clamp(ratio, -1.0, 1.0));
  return std::arg(next * std::conj(here)) < 0.0 ? -magnitude : magnitude;
}

// Multi-source BFS from unflagged pixels; each flagged pixel takes the value
// of the first unflagged pixel that reaches it.
void fill_flagged(FrequencyField& field) {
  const Index rows = field.flagged.rows();
  const Index cols = field.flagged.cols();
  MaskGrid known = !field.flagged;
  std::deque<std::pair<Index, Index>> queue;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (known(r, c)) queue.emplace_back(r, c);
    }
  }
  if (queue.empty()) {
    field.omega1.setZero();
    field.omega2.setZero();
    return;
  }
  constexpr Index dr[] = {-1, 1, 0, 0};
  constexpr Index dc[] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const Index nr = r + dr[k];
      const Index nc = c + dc[k];
      if (nr < 0 || nr >= rows || nc < 0 || nc >= cols || known(nr, nc)) continue;
      known(nr, nc) = true;
      field.omega1(nr, nc) = field.omega1(r, c);
      field.omega2(nr, nc) = field.omega2(r, c);
      queue.emplace_back(nr, nc);
    }
  }
}

void require_same_shape(const AmfmComponent& a, Index rows, Index cols) {
  if (a.amplitude.rows() != rows || a.amplitude.cols() != cols) {
    throw std::invalid_argument("reconstruct: component dimension mismatch");
  }
}

AmfmComponent demodulate_spectrum(Fft2& fft, const SpectrumGrid& spectrum, const ImageGrid& gain, bool lowpass,
                                  int channel_id) {
  const double scale = lowpass ? 1.0 : 2.0;
  const ComplexGrid z = fft.inverse(spectrum * (scale * gain).cast<std::complex<double>>());
  return component_from_analytic(z, lowpass, channel_id);
}

}  // namespace

FrequencyField estimate_frequency(const ComplexGrid& z, double floor_ratio) {
  const Index rows = z.rows();
  const Index cols = z.cols();
  if (rows < 3 || cols < 3) throw std::invalid_argument("estimate_frequency: grid must be at least 3x3");

  FrequencyField field;
  field.omega1.setZero(rows, cols);
  field.omega2.setZero(rows, cols);

  for (Index r = 0; r < rows; ++r) {
    for (Index c = 1; c + 1 < cols; ++c) field.omega1(r, c) = axis_frequency(z(r, c - 1), z(r, c), z(r, c + 1));
    field.omega1(r, 0) = field.omega1(r, 1);
    field.omega1(r, cols - 1) = field.omega1(r, cols - 2);
  }
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 1; r + 1 < rows; ++r) field.omega2(r, c) = axis_frequency(z(r - 1, c), z(r, c), z(r + 1, c));
    field.omega2(0, c) = field.omega2(1, c);
    field.omega2(rows - 1, c) = field.omega2(rows - 2, c);
  }

  const ImageGrid magnitude = z.abs();
  const double floor = floor_ratio * magnitude.maxCoeff();
  field.flagged = magnitude <= floor;
  field.flagged_count = field.flagged.count();
  if (field.flagged_count > 0) fill_flagged(field);
  return field;
}

AmfmComponent component_from_analytic(const ComplexGrid& z, bool lowpass, int channel_id) {
  AmfmComponent out;
  out.channel_id = channel_id;
  out.amplitude = z.abs();
  out.phase = z.arg();
  // std::arg returns -pi for a negative real with signed-zero imaginary part.
  out.phase = (out.phase <= -kPi).select(kPi, out.phase);
  if (lowpass) {
    out.omega1.setZero(z.rows(), z.cols());
    out.omega2.setZero(z.rows(), z.cols());
  } else {
    FrequencyField field = estimate_frequency(z);
    out.omega1 = std::move(field.omega1);
    out.omega2 = std::move(field.omega2);
  }
  return out;
}

AmfmComponent demodulate_channel(const ImageGrid& image, const GaborChannel& channel) {
  if (image.rows() < kMinGridEdge || image.cols() < kMinGridEdge) {
    throw std::invalid_argument("demodulate_channel: image must be at least 8x8");
  }
  Fft2 fft;
  const SpectrumGrid spectrum = fft.forward(image);
  return demodulate_spectrum(fft, spectrum, channel_response(channel, image.rows(), image.cols()),
                             channel.is_lowpass, -1);
}

Decomposition decompose(const ImageGrid& image, const FilterBank& bank, const DecomposeOptions& options) {
  if (image.rows() < kMinGridEdge || image.cols() < kMinGridEdge) {
    throw std::invalid_argument("decompose: image must be at least 8x8");
  }
  if (!all_finite(image)) throw std::invalid_argument("decompose: non-finite sample");
  validate(bank);

  Decomposition out;
  out.bank = bank;
  out.rows = image.rows();
  out.cols = image.cols();
  out.components.resize(bank.channels.size());

  const SpectrumGrid spectrum = forward_transform(image);
  const std::vector<ImageGrid> responses = bank_responses(bank, image.rows(), image.cols());

  const std::size_t count = bank.channels.size();
  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    Fft2 fft;
    for (std::size_t i = next++; i < count; i = next++) {
      out.components[i] = demodulate_spectrum(fft, spectrum, responses[i], bank.channels[i].is_lowpass,
                                              static_cast<int>(i));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  return out;
}

namespace {

DominantMap argmax_over(const Decomposition& decomposition, const std::vector<int>& ids, int scale_id) {
  DominantMap map;
  map.scale_id = scale_id;
  map.winner = IndexGrid::Constant(decomposition.rows, decomposition.cols, ids.front());
  map.dominant = decomposition.components[static_cast<std::size_t>(ids.front())];
  map.dominant.channel_id = -1;

  AmfmComponent& dom = map.dominant;
  for (std::size_t k = 1; k < ids.size(); ++k) {
    const AmfmComponent& cand = decomposition.components[static_cast<std::size_t>(ids[k])];
    for (Index i = 0; i < dom.amplitude.size(); ++i) {
      // Strict comparison keeps the lowest index on ties.
      if (cand.amplitude.data()[i] > dom.amplitude.data()[i]) {
        dom.amplitude.data()[i] = cand.amplitude.data()[i];
        dom.phase.data()[i] = cand.phase.data()[i];
        dom.omega1.data()[i] = cand.omega1.data()[i];
        dom.omega2.data()[i] = cand.omega2.data()[i];
        map.winner.data()[i] = ids[k];
      }
    }
  }
  return map;
}

}  // namespace

DominantMap dominant_analysis(const Decomposition& decomposition, int scale_id) {
  const std::vector<int> ids = decomposition.bank.channels_in_scale(scale_id);
  if (ids.empty()) throw std::invalid_argument("dominant_analysis: scale " + std::to_string(scale_id) + " not in bank");
  return argmax_over(decomposition, ids, scale_id);
}

DominantMap dominant_bandpass(const Decomposition& decomposition) {
  std::vector<int> ids;
  for (std::size_t k = 0; k < decomposition.bank.channels.size(); ++k)
    if (!decomposition.bank.channels[k].is_lowpass) ids.push_back(static_cast<int>(k));
  if (ids.empty()) throw std::invalid_argument("dominant_bandpass: bank has no bandpass channels");
  return argmax_over(decomposition, ids, -1);
}

ImageGrid reconstruct(std::span<const AmfmComponent> components, ReconstructionMode mode, Index rows, Index cols) {
  if (!components.empty()) {
    rows = components.front().amplitude.rows();
    cols = components.front().amplitude.cols();
  }
  ImageGrid out = ImageGrid::Zero(rows, cols);
  for (const AmfmComponent& comp : components) {
    require_same_shape(comp, rows, cols);
    if (mode == ReconstructionMode::AmFm) {
      out += comp.amplitude * comp.phase.cos();
    } else {
      out += comp.phase.cos();
    }
  }
  return out;
}

ImageGrid reconstruct(const Decomposition& decomposition, std::span<const int> channel_ids, ReconstructionMode mode) {
  ImageGrid out = ImageGrid::Zero(decomposition.rows, decomposition.cols);
  for (int id : channel_ids) {
    if (id < 0 || id >= static_cast<int>(decomposition.components.size())) {
      throw std::invalid_argument("reconstruct: channel id out of range");
    }
    const AmfmComponent& comp = decomposition.components[static_cast<std::size_t>(id)];
    out += mode == ReconstructionMode::AmFm ? ImageGrid(comp.amplitude * comp.phase.cos()) : ImageGrid(comp.phase.cos());
  }
  return out;
}

double component_energy(const AmfmComponent& component) { return component.amplitude.square().sum(); }

FilterSelection select_dominant_filters(const ImageGrid& image, const FilterBank& bank, double threshold,
                                        const DecomposeOptions& options) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("select_dominant_filters: threshold must lie in (0,1)");
  return select_dominant_filters(image, decompose(image, bank, options), threshold);
}

FilterSelection select_dominant_filters(const ImageGrid& image, const Decomposition& decomposition, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("select_dominant_filters: threshold must lie in (0,1)");
  if (image.rows() != decomposition.rows || image.cols() != decomposition.cols) {
    throw std::invalid_argument("select_dominant_filters: image does not match decomposition");
  }

  const std::size_t count = decomposition.components.size();
  std::vector<double> energy(count);
  for (std::size_t i = 0; i < count; ++i) energy[i] = component_energy(decomposition.components[i]);
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energy[a] > energy[b]; });

  FilterSelection sel;
  sel.threshold = threshold;
  sel.reconstruction = ImageGrid::Zero(image.rows(), image.cols());
  for (int id : order) {
    const AmfmComponent& comp = decomposition.components[static_cast<std::size_t>(id)];
    sel.reconstruction += comp.amplitude * comp.phase.cos();
    sel.channels.push_back(id);
    sel.ssim_trace.push_back(ssim(sel.reconstruction, image));
    if (sel.ssim_trace.back() > threshold) {
      sel.reached = true;
      break;
    }
  }
  return sel;
}

std::vector<FeatureLayer> export_features(const Decomposition& decomposition) {
  std::vector<FeatureLayer> layers;
  for (int s = 0; s < decomposition.bank.scales; ++s) {
    const DominantMap dom = dominant_analysis(decomposition, s);
    const AmfmComponent& c = dom.dominant;
    const std::string prefix = "scale" + std::to_string(s) + "_";
    ImageGrid orientation(c.omega1.rows(), c.omega1.cols());
    for (Index i = 0; i < orientation.size(); ++i) {
      const double a = std::atan2(c.omega2.data()[i], c.omega1.data()[i]);
      orientation.data()[i] = a <= -kPi ? kPi : a;
    }
    layers.push_back({prefix + "amplitude", s, c.amplitude});
    layers.push_back({prefix + "frequency_magnitude", s, (c.omega1.square() + c.omega2.square()).sqrt()});
    layers.push_back({prefix + "orientation", s, std::move(orientation)});
  }
  return layers;
}

}  // namespace lucid
