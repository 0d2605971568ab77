#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lucid/rng.hpp"
#include "lucid/synth.hpp"

namespace lucid {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxBlobAttempts = 1000;

void check_dims(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("synth: image dimensions must be positive");
}

void check_harmonic(const Harmonic& h) {
  if (!std::isfinite(h.amplitude) || h.amplitude < 0.0) throw std::invalid_argument("synth: amplitude must be >= 0");
  if (!std::isfinite(h.phase)) throw std::invalid_argument("synth: phase must be finite");
  const double norm = std::hypot(h.u, h.v);
  if (!(std::abs(h.u) < kPi && std::abs(h.v) < kPi && norm > 0.0 && norm < kPi)) {
    throw std::invalid_argument("synth: harmonic frequency must lie strictly inside (0, pi)");
  }
}

ComponentTruth harmonic_truth(const Harmonic& h, Index rows, Index cols) {
  ComponentTruth t;
  t.amplitude = ImageGrid::Constant(rows, cols, h.amplitude);
  t.omega1 = ImageGrid::Constant(rows, cols, h.u);
  t.omega2 = ImageGrid::Constant(rows, cols, h.v);
  t.phase.resize(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      t.phase(r, c) = h.u * static_cast<double>(c) + h.v * static_cast<double>(r) + h.phase;
  return t;
}

}  // namespace

double chirp_x1(Index col, Index cols) { return static_cast<double>(col) - static_cast<double>(cols / 2); }
double chirp_x2(Index row, Index rows) { return static_cast<double>(row) - static_cast<double>(rows / 2); }

SyntheticImage pure_cosine(double amplitude, double u, double v, Index rows, Index cols) {
  return multi_harmonic({{amplitude, u, v, 0.0}}, rows, cols);
}

SyntheticImage multi_harmonic(const std::vector<Harmonic>& harmonics, Index rows, Index cols, double offset) {
  check_dims(rows, cols);
  if (harmonics.empty()) throw std::invalid_argument("synth: at least one harmonic is required");
  if (!std::isfinite(offset)) throw std::invalid_argument("synth: offset must be finite");
  SyntheticImage out;
  out.image = ImageGrid::Constant(rows, cols, offset);
  for (const Harmonic& h : harmonics) {
    check_harmonic(h);
    ComponentTruth t = harmonic_truth(h, rows, cols);
    out.image += h.amplitude * t.phase.cos();
    out.truth.push_back(std::move(t));
  }
  return out;
}

SyntheticImage radial_chirp(double alpha, Index rows, Index cols) {
  check_dims(rows, cols);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("synth: chirp rate must be positive");
  const double reach = std::max(std::abs(chirp_x1(0, cols)), std::abs(chirp_x1(cols - 1, cols))) +
                       std::max(std::abs(chirp_x2(0, rows)), std::abs(chirp_x2(rows - 1, rows)));
  if (2.0 * alpha * reach >= kPi) throw std::invalid_argument("synth: chirp frequency exceeds pi inside the image");
  SyntheticImage out;
  ComponentTruth t;
  t.amplitude = ImageGrid::Ones(rows, cols);
  t.phase.resize(rows, cols);
  t.omega1.resize(rows, cols);
  t.omega2.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const double x2 = chirp_x2(r, rows);
    for (Index c = 0; c < cols; ++c) {
      const double x1 = chirp_x1(c, cols);
      t.phase(r, c) = alpha * (x1 * x1 + x2 * x2);
      t.omega1(r, c) = 2.0 * alpha * x1;
      t.omega2(r, c) = 2.0 * alpha * x2;
    }
  }
  out.image = t.phase.cos();
  out.truth.push_back(std::move(t));
  return out;
}

SyntheticImage half_split(const Harmonic& left, const Harmonic& right, Index rows, Index cols, int seam) {
  check_dims(rows, cols);
  check_harmonic(left);
  check_harmonic(right);
  if (seam < 0) throw std::invalid_argument("synth: seam width must be non-negative");
  ImageGrid right_weight(rows, cols);
  const double centre = static_cast<double>(cols) / 2.0;
  for (Index c = 0; c < cols; ++c) {
    const double x = static_cast<double>(c) + 0.5 - centre;  // pixel centre relative to the seam
    const double half = 0.5 * seam;
    double w = x < 0.0 ? 0.0 : 1.0;
    if (seam > 0 && std::abs(x) < half) w = 0.5 - 0.5 * std::cos(kPi * (x + half) / seam);
    right_weight.col(c).setConstant(w);
  }
  SyntheticImage out;
  ComponentTruth l = harmonic_truth(left, rows, cols);
  ComponentTruth r = harmonic_truth(right, rows, cols);
  l.amplitude *= 1.0 - right_weight;
  r.amplitude *= right_weight;
  out.image = l.amplitude * l.phase.cos() + r.amplitude * r.phase.cos();
  out.winner = (right_weight > 0.5).cast<int>();
  out.truth.push_back(std::move(l));
  out.truth.push_back(std::move(r));
  return out;
}

std::vector<Harmonic> default_harmonics() {
  return {{1.0, 0.9, 0.3, 0.0},
          {0.8, -0.35, 0.2, 0.7},
          {0.6, 0.4, 1.9, 1.3},
          {0.5, -1.6, 0.9, 2.1},
          {0.4, 0.15, 0.45, 0.4}};
}

SyntheticImage generate_image(const ImageSpec& spec) {
  switch (spec.kind) {
    case ImageKind::PureCosine:
      if (spec.harmonics.size() != 1) throw std::invalid_argument("synth: pure_cosine takes exactly one harmonic");
      return multi_harmonic(spec.harmonics, spec.rows, spec.cols, spec.offset);
    case ImageKind::MultiHarmonic:
      return multi_harmonic(spec.harmonics.empty() ? default_harmonics() : spec.harmonics, spec.rows, spec.cols,
                            spec.offset);
    case ImageKind::RadialChirp:
      return radial_chirp(spec.chirp_rate, spec.rows, spec.cols);
    case ImageKind::HalfSplit:
      if (spec.harmonics.size() != 2) throw std::invalid_argument("synth: half_split takes exactly two harmonics");
      return half_split(spec.harmonics[0], spec.harmonics[1], spec.rows, spec.cols);
  }
  throw std::invalid_argument("synth: unknown image kind");
}

Dataset two_blob(const DatasetSpec& spec) {
  const auto d = static_cast<Index>(spec.mean0.size());
  if (d < 1 || spec.mean1.size() != spec.mean0.size()) throw std::invalid_argument("synth: blob means must share a dimension");
  if (spec.points < 2) throw std::invalid_argument("synth: two_blob needs at least two points");
  if (!(spec.stddev >= 0.0)) throw std::invalid_argument("synth: stddev must be >= 0");
  const VectorXd m0 = Eigen::Map<const VectorXd>(spec.mean0.data(), d);
  const VectorXd m1 = Eigen::Map<const VectorXd>(spec.mean1.data(), d);
  const VectorXd normal = m1 - m0;
  if (normal.norm() == 0.0) throw std::invalid_argument("synth: blob means coincide");
  const VectorXd unit = normal.normalized();
  const VectorXd mid = 0.5 * (m0 + m1);

  Rng rng(spec.seed);
  for (int attempt = 0; attempt < kMaxBlobAttempts; ++attempt) {
    Dataset data;
    data.inputs.resize(spec.points, d);
    data.labels.resize(static_cast<std::size_t>(spec.points));
    bool separated = true;
    for (int i = 0; i < spec.points; ++i) {
      const int label = i % 2;
      const VectorXd& m = label == 0 ? m0 : m1;
      for (Index k = 0; k < d; ++k) data.inputs(i, k) = m[k] + spec.stddev * rng.normal();
      data.labels[static_cast<std::size_t>(i)] = label;
      const double side = (data.inputs.row(i).transpose() - mid).dot(unit);
      if ((label == 0 ? -side : side) < spec.min_margin) separated = false;
    }
    if (separated) return data;
  }
  throw std::invalid_argument("synth: no separable two_blob sample found; widen the means or lower min_margin");
}

Dataset xor_dataset() {
  Dataset data;
  data.inputs.resize(4, 2);
  data.inputs << 0, 0, 0, 1, 1, 0, 1, 1;
  data.labels = {0, 1, 1, 0};
  return data;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  return spec.kind == DatasetKind::Xor ? xor_dataset() : two_blob(spec);
}

std::string to_string(ImageKind kind) {
  switch (kind) {
    case ImageKind::PureCosine: return "pure_cosine";
    case ImageKind::MultiHarmonic: return "multi_harmonic";
    case ImageKind::RadialChirp: return "radial_chirp";
    case ImageKind::HalfSplit: return "half_split";
  }
  return "unknown";
}

std::string to_string(DatasetKind kind) { return kind == DatasetKind::Xor ? "xor" : "two_blob"; }

ImageKind image_kind_from_string(const std::string& name) {
  if (name == "pure_cosine") return ImageKind::PureCosine;
  if (name == "multi_harmonic") return ImageKind::MultiHarmonic;
  if (name == "radial_chirp") return ImageKind::RadialChirp;
  if (name == "half_split") return ImageKind::HalfSplit;
  throw std::invalid_argument("unknown image kind '" + name + "'");
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "two_blob") return DatasetKind::TwoBlob;
  if (name == "xor") return DatasetKind::Xor;
  throw std::invalid_argument("unknown dataset kind '" + name + "'");
}

nlohmann::json to_json(const ImageSpec& spec) {
  nlohmann::json hs = nlohmann::json::array();
  for (const Harmonic& h : spec.harmonics) hs.push_back({{"amplitude", h.amplitude}, {"u", h.u}, {"v", h.v}, {"phase", h.phase}});
  return {{"kind", to_string(spec.kind)}, {"rows", spec.rows},     {"cols", spec.cols},
          {"harmonics", hs},              {"offset", spec.offset}, {"chirp_rate", spec.chirp_rate}};
}

ImageSpec image_spec_from_json(const nlohmann::json& j) {
  ImageSpec s;
  try {
    s.kind = image_kind_from_string(j.value("kind", to_string(s.kind)));
    s.rows = j.value("rows", s.rows);
    s.cols = j.value("cols", s.cols);
    s.offset = j.value("offset", s.offset);
    s.chirp_rate = j.value("chirp_rate", s.chirp_rate);
    if (j.contains("harmonics")) {
      for (const auto& h : j.at("harmonics")) {
        s.harmonics.push_back({h.value("amplitude", 1.0), h.at("u").get<double>(), h.at("v").get<double>(),
                               h.value("phase", 0.0)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("image spec: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const DatasetSpec& spec) {
  return {{"kind", to_string(spec.kind)}, {"points", spec.points}, {"mean0", spec.mean0},
          {"mean1", spec.mean1},          {"stddev", spec.stddev}, {"min_margin", spec.min_margin},
          {"seed", spec.seed}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec s;
  try {
    s.kind = dataset_kind_from_string(j.value("kind", to_string(s.kind)));
    s.points = j.value("points", s.points);
    s.mean0 = j.value("mean0", s.mean0);
    s.mean1 = j.value("mean1", s.mean1);
    s.stddev = j.value("stddev", s.stddev);
    s.min_margin = j.value("min_margin", s.min_margin);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("dataset spec: ") + e.what());
  }
  return s;
}

}  // namespace lucid
