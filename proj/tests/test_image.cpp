#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "lucid/error.hpp"
#include "lucid/image.hpp"
#include "lucid/rng.hpp"

using namespace lucid;

namespace {

constexpr double kPi = std::numbers::pi;

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lucid_test_image";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write_bytes(const std::string& name, const std::string& bytes) {
  const auto path = temp_file(name);
  std::ofstream(path, std::ios::binary) << bytes;
  return path;
}

ImageGrid random_grid(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  ImageGrid g(rows, cols);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform();
  return g;
}

// O(N^2) direct sum, independent of the library transform.
SpectrumGrid naive_dft(const ImageGrid& x) {
  const Index h = x.rows();
  const Index w = x.cols();
  SpectrumGrid out(h, w);
  for (Index kr = 0; kr < h; ++kr) {
    for (Index kc = 0; kc < w; ++kc) {
      std::complex<double> acc = 0.0;
      for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c)
          acc += x(r, c) * std::polar(1.0, -2.0 * kPi * (static_cast<double>(kr * r) / h + static_cast<double>(kc * c) / w));
      out(kr, kc) = acc;
    }
  }
  return out;
}

// Mean local SSIM by explicit window loops.
double naive_ssim(const ImageGrid& a, const ImageGrid& b, int win, double sigma) {
  const int half = win / 2;
  std::vector<double> kernel(static_cast<std::size_t>(win * win));
  double total = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double d2 = (i - half) * (i - half) + (j - half) * (j - half);
      kernel[static_cast<std::size_t>(i * win + j)] = std::exp(-d2 / (2 * sigma * sigma));
      total += kernel[static_cast<std::size_t>(i * win + j)];
    }
  for (double& k : kernel) k /= total;
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double sum = 0.0;
  int count = 0;
  for (Index r = 0; r + win <= a.rows(); ++r) {
    for (Index c = 0; c + win <= a.cols(); ++c) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double k = kernel[static_cast<std::size_t>(i * win + j)];
          const double x = a(r + i, c + j);
          const double y = b(r + i, c + j);
          ma += k * x;
          mb += k * y;
          saa += k * x * x;
          sbb += k * y * y;
          sab += k * x * y;
        }
      const double va = saa - ma * ma;
      const double vb = sbb - mb * mb;
      const double cov = sab - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return sum / count;
}

}  // namespace

TEST_CASE("P5 with maxval 255 loads as unit samples") {
  const auto path = write_bytes("ones.pgm", "P5\n8 8\n255\n" + std::string(64, '\xff'));
  const ImageGrid img = load_raster(path);
  CHECK(img.rows() == 8);
  CHECK(img.cols() == 8);
  CHECK((img == 1.0).all());
}

TEST_CASE("P2 samples scale by maxval") {
  const auto path = write_bytes("p2.pgm", "P2 2 2 255\n0 255 0 255\n");
  const ImageGrid img = load_raster(path);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(0, 1) == 1.0);
  CHECK(img(1, 0) == 0.0);
  CHECK(img(1, 1) == 1.0);
}

TEST_CASE("header comments and 16-bit ascii maxval") {
  const auto path = write_bytes("comment.pgm", "P2\n# made by hand\n2 1\n# max\n1000\n250 1000\n");
  const ImageGrid img = load_raster(path);
  CHECK(img(0, 0) == doctest::Approx(0.25));
  CHECK(img(0, 1) == 1.0);
}

TEST_CASE("unsupported magic is rejected at byte 0") {
  const auto path = write_bytes("color.ppm", "P6\n2 2\n255\n" + std::string(12, '\0'));
  try {
    load_raster(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("truncated payload reports the end of the file") {
  const std::string bytes = "P5\n4 4\n255\n" + std::string(10, 'a');
  const auto path = write_bytes("short.pgm", bytes);
  try {
    load_raster(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == bytes.size());
  }
}

TEST_CASE("P2 sample above maxval is malformed") {
  CHECK_THROWS_AS(load_raster(write_bytes("over.pgm", "P2 1 1 10\n11\n")), FormatError);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(load_raster(temp_file("does_not_exist.pgm")), IoError);
}

TEST_CASE("quantization rounds half away from zero and clamps") {
  CHECK(quantize_sample(0.5) == 128);
  CHECK(quantize_sample(1.7) == 255);
  CHECK(quantize_sample(-0.3) == 0);
  CHECK(quantize_sample(0.0) == 0);
  CHECK(quantize_sample(1.0) == 255);
}

TEST_CASE("save then load stays within half a quantization step") {
  ImageGrid img = random_grid(12, 9, 3) * 1.4 - 0.2;
  const auto path = temp_file("roundtrip.pgm");
  save_raster(img, path);
  const ImageGrid back = load_raster(path);
  const ImageGrid clamped = img.cwiseMax(0.0).cwiseMin(1.0);
  CHECK((back - clamped).abs().maxCoeff() <= 1.0 / 510.0 + 1e-15);
}

TEST_CASE("saved header is canonical") {
  const auto path = temp_file("header.pgm");
  save_raster(ImageGrid::Constant(2, 3, 0.5), path);
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(bytes == "P5\n3 2\n255\n" + std::string(6, '\x80'));
}

TEST_CASE("DFT of a constant has only a DC bin") {
  const SpectrumGrid s = forward_transform(ImageGrid::Constant(8, 16, 0.3));
  CHECK(std::abs(s(0, 0) - std::complex<double>(0.3 * 128, 0)) < 1e-12);
  SpectrumGrid rest = s;
  rest(0, 0) = 0.0;
  CHECK(rest.abs().maxCoeff() < 1e-12);
}

TEST_CASE("DFT of a lattice cosine has two bins") {
  ImageGrid img(8, 16);
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 16; ++c) img(r, c) = std::cos(2 * kPi * 3 * c / 16.0);
  const SpectrumGrid s = forward_transform(img);
  CHECK(std::abs(s(0, 3) - 64.0) < 1e-10);
  CHECK(std::abs(s(0, 13) - 64.0) < 1e-10);
  SpectrumGrid rest = s;
  rest(0, 3) = rest(0, 13) = 0.0;
  CHECK(rest.abs().maxCoeff() < 1e-10);
}

TEST_CASE("forward transform matches a direct sum") {
  const ImageGrid img = random_grid(8, 12, 11);
  const SpectrumGrid fast = forward_transform(img);
  const SpectrumGrid slow = naive_dft(img);
  CHECK((fast - slow).abs().maxCoeff() < 1e-9);
}

TEST_CASE("round trip and Parseval on random grids") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ImageGrid img = random_grid(16, 16 + static_cast<Index>(seed), seed);
    const SpectrumGrid s = forward_transform(img);
    const ComplexGrid back = inverse_transform(s);
    CHECK((back.real() - img).matrix().norm() / img.matrix().norm() < 1e-9);
    CHECK(back.imag().abs().maxCoeff() < 1e-9);
    const double space = img.square().sum();
    const double freq = s.abs2().sum() / static_cast<double>(img.size());
    CHECK(std::abs(space - freq) / space < 1e-9);
  }
}

TEST_CASE("single bin inverts to a complex exponential") {
  SpectrumGrid s = SpectrumGrid::Zero(8, 8);
  s(0, 2) = 1.0;
  const ComplexGrid z = inverse_transform(s);
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 8; ++c) CHECK(std::abs(z(r, c) - std::polar(1.0 / 64, 2 * kPi * 2 * c / 8.0)) < 1e-15);
  CHECK(inverse_transform(SpectrumGrid::Zero(8, 8)).abs().maxCoeff() == 0.0);
}

TEST_CASE("transforms reject grids below the minimum edge") {
  CHECK_THROWS_AS(forward_transform(ImageGrid::Zero(7, 8)), std::invalid_argument);
}

TEST_CASE("bin frequencies wrap into [-pi, pi)") {
  CHECK(bin_frequency(0, 8) == 0.0);
  CHECK(bin_frequency(1, 8) == doctest::Approx(kPi / 4));
  CHECK(bin_frequency(4, 8) == doctest::Approx(-kPi));
  CHECK(bin_frequency(7, 8) == doctest::Approx(-kPi / 4));
  CHECK(bin_frequency(4, 9) == doctest::Approx(2 * kPi * 4 / 9));
  CHECK(bin_frequency(5, 9) == doctest::Approx(-2 * kPi * 4 / 9));
}

TEST_CASE("fft_shift centres DC") {
  IndexGrid g(4, 5);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = static_cast<int>(i);
  const IndexGrid s = fft_shift(g);
  CHECK(s(2, 2) == g(0, 0));
}

TEST_CASE("ssim identity, symmetry and constant closed form") {
  const ImageGrid a = random_grid(24, 20, 5);
  const ImageGrid b = random_grid(24, 20, 6);
  CHECK(ssim(a, a) == 1.0);
  CHECK(ssim(a, b) == ssim(b, a));
  const double c1 = 1e-4;
  const double expected = (2 * 0.2 * 0.4 + c1) / (0.04 + 0.16 + c1);
  CHECK(ssim(ImageGrid::Constant(16, 16, 0.2), ImageGrid::Constant(16, 16, 0.4)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim matches a windowed-loop oracle") {
  const ImageGrid a = random_grid(20, 24, 7);
  const ImageGrid b = (a + 0.3 * random_grid(20, 24, 8)).eval();
  CHECK(ssim(a, b) == doctest::Approx(naive_ssim(a, b, 11, 1.5)).epsilon(1e-12));
  CHECK(ssim(a, b, 7, 1.0, 1.0) == doctest::Approx(naive_ssim(a, b, 7, 1.0)).epsilon(1e-12));
}

TEST_CASE("ssim preconditions") {
  const ImageGrid a = ImageGrid::Zero(16, 16);
  CHECK_THROWS_AS(ssim(a, ImageGrid::Zero(16, 15)), std::invalid_argument);
  CHECK_THROWS_AS(ssim(a, a, 10), std::invalid_argument);
  CHECK_THROWS_AS(ssim(a, a, 17), std::invalid_argument);
}
