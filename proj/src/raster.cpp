#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lucid/error.hpp"
#include "lucid/image.hpp"

namespace lucid {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const unsigned char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) throw FormatError(std::string(what) + " out of range", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size()) throw FormatError(std::string("truncated file: missing ") + what, pos_);
      throw FormatError(std::string("expected ") + what, pos_);
    }
    return value;
  }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ImageGrid load_raster(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P') throw FormatError("not a portable graymap", 0);
  const unsigned char kind = bytes[1];
  if (kind != '2' && kind != '5') {
    throw FormatError(std::string("unsupported magic number P") + static_cast<char>(kind), 0);
  }

  HeaderReader header(bytes);
  header.advance(2);
  const long width = header.read_uint("width");
  const long height = header.read_uint("height");
  const long maxval = header.read_uint("maxval");
  if (width <= 0 || height <= 0) throw FormatError("zero image dimension", header.pos());
  if (maxval < 1 || maxval > (kind == '5' ? 255 : 65535)) {
    throw FormatError("unsupported maxval " + std::to_string(maxval), header.pos());
  }

  ImageGrid image(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

  if (kind == '5') {
    // Exactly one whitespace byte separates maxval from the payload.
    if (header.pos() >= bytes.size() || !std::isspace(bytes[header.pos()])) {
      throw FormatError("missing whitespace before payload", header.pos());
    }
    const std::size_t start = header.pos() + 1;
    if (bytes.size() - start < count) {
      throw FormatError("truncated payload: expected " + std::to_string(count) + " bytes", bytes.size());
    }
    for (std::size_t i = 0; i < count; ++i) image.data()[i] = bytes[start + i] * scale;
    return image;
  }

  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = header.pos();
    const long value = header.read_uint("sample");
    if (value > maxval) throw FormatError("sample exceeds maxval", at);
    image.data()[i] = static_cast<double>(value) * scale;
  }
  return image;
}

unsigned char quantize_sample(double sample) {
  const double clamped = std::clamp(sample, 0.0, 1.0);
  return static_cast<unsigned char>(std::round(clamped * 255.0));
}

void save_raster(const ImageGrid& image, const std::filesystem::path& path) {
  if (!all_finite(image)) throw std::invalid_argument("save_raster: non-finite sample");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<char> payload(static_cast<std::size_t>(image.size()));
  for (Index i = 0; i < image.size(); ++i) {
    payload[static_cast<std::size_t>(i)] = static_cast<char>(quantize_sample(image.data()[i]));
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void save_scaled_raster(const ImageGrid& layer, LayerScale scale, const std::filesystem::path& path) {
  const double span = scale.max - scale.min;
  if (!(span > 0.0)) {
    save_raster(ImageGrid::Constant(layer.rows(), layer.cols(), 0.5), path);
    return;
  }
  save_raster((layer - scale.min) / span, path);
}

LayerScale save_normalized_raster(const ImageGrid& layer, const std::filesystem::path& path) {
  if (!all_finite(layer)) throw std::invalid_argument("save_normalized_raster: non-finite sample");
  const LayerScale scale{layer.size() ? layer.minCoeff() : 0.0, layer.size() ? layer.maxCoeff() : 0.0};
  save_scaled_raster(layer, scale, path);
  return scale;
}

}  // namespace lucid
