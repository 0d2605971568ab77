#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lucid/gabor.hpp"
#include "lucid/image.hpp"

using namespace lucid;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("default bank has 25 channels in lowpass-first scale-major order") {
  const FilterBank bank = design_bank();
  REQUIRE(bank.channels.size() == 25);
  CHECK(bank.lowpass_index() == 0);
  CHECK(bank.channels[0].is_lowpass);
  CHECK(bank.channels[0].scale_id == -1);
  int expected = 1;
  for (int s = 0; s < 3; ++s) {
    const auto ids = bank.channels_in_scale(s);
    REQUIRE(ids.size() == 8);
    for (int k = 0; k < 8; ++k) {
      CHECK(ids[static_cast<std::size_t>(k)] == expected++);
      CHECK(bank.channels[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])].orientation_id == k);
    }
  }
}

TEST_CASE("band edges are geometric from the cutoff to pi") {
  const FilterBank bank = design_bank(3, 8, kPi / 16);
  REQUIRE(bank.scale_band_edges.size() == 4);
  CHECK(bank.scale_band_edges.front() == doctest::Approx(kPi / 16));
  CHECK(bank.scale_band_edges.back() == doctest::Approx(kPi));
  const double ratio = bank.scale_band_edges[1] / bank.scale_band_edges[0];
  CHECK(bank.scale_band_edges[2] / bank.scale_band_edges[1] == doctest::Approx(ratio));
  CHECK(bank.scale_band_edges[3] / bank.scale_band_edges[2] == doctest::Approx(ratio));
}

TEST_CASE("bandpass centres lie in the upper half-plane and inside their band") {
  for (int k : {2, 5, 8}) {
    const FilterBank bank = design_bank(4, k, 0.15);
    for (const GaborChannel& ch : bank.channels) {
      if (ch.is_lowpass) continue;
      CHECK(in_upper_half_plane(ch.u, ch.v));
      CHECK(ch.radius() >= bank.scale_band_edges[static_cast<std::size_t>(ch.scale_id)]);
      CHECK(ch.radius() <= bank.scale_band_edges[static_cast<std::size_t>(ch.scale_id) + 1]);
      CHECK(ch.angle() == doctest::Approx(kPi * ch.orientation_id / k));
    }
  }
}

TEST_CASE("design preconditions") {
  CHECK_THROWS_AS(design_bank(0, 8, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(design_bank(3, 1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(design_bank(3, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(design_bank(3, 8, kPi / 4), std::invalid_argument);
  CHECK_THROWS_AS(make_channel(0.5, -0.1, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_channel(0.5, 0.1, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("design is deterministic") {
  CHECK(to_json(design_bank()).dump() == to_json(design_bank()).dump());
}

TEST_CASE("raw channel gain: unit peak, zero below the real axis") {
  const GaborChannel ch = make_channel(kPi / 2, kPi / 4, 0.2, 0.3);
  const ImageGrid g = channel_response(ch, 64, 64);
  CHECK(g.maxCoeff() <= 1.0);
  CHECK(g(8, 16) == doctest::Approx(1.0));  // bin (v, u) = (pi/4, pi/2)
  for (Index r = 33; r < 64; ++r) CHECK((g.row(r) == 0.0).all());
  const ImageGrid low = channel_response(make_lowpass(0.3), 32, 32);
  CHECK(low(0, 0) == 1.0);
}

TEST_CASE("normalized bank: half-plane exclusivity and unit DC") {
  const FilterBank bank = design_bank();
  const auto responses = bank_responses(bank, 64, 64);
  REQUIRE(responses.size() == bank.channels.size());
  CHECK(responses[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  for (std::size_t k = 1; k < responses.size(); ++k) {
    for (Index r = 0; r < 64; ++r) {
      for (Index c = 0; c < 64; ++c) {
        if (!in_upper_half_plane(bin_frequency(c, 64), bin_frequency(r, 64))) CHECK(responses[k](r, c) == 0.0);
      }
    }
  }
}

TEST_CASE("adjacent same-scale channels cross at half of the peak") {
  const FilterBank bank = design_bank();
  for (int s = 0; s < bank.scales; ++s) {
    const auto ids = bank.channels_in_scale(s);
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
      const auto a = static_cast<std::size_t>(ids[k]);
      const GaborChannel& ch = bank.channels[a];
      const GaborChannel& next = bank.channels[static_cast<std::size_t>(ids[k + 1])];
      const double mid = 0.5 * (ch.angle() + next.angle());
      const double peak = bank_gains(bank, ch.u, ch.v)[a];
      const double cross = bank_gains(bank, ch.radius() * std::cos(mid), ch.radius() * std::sin(mid))[a];
      CHECK(peak >= 0.99);
      CHECK(cross / peak == doctest::Approx(0.5).epsilon(0.05));
    }
  }
}

TEST_CASE("pointwise gains agree with the lattice responses") {
  const FilterBank bank = design_bank();
  const auto responses = bank_responses(bank, 32, 48);
  for (Index r = 0; r < 32; r += 3) {
    for (Index c = 0; c < 48; c += 5) {
      const auto g = bank_gains(bank, bin_frequency(c, 48), bin_frequency(r, 32));
      for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == doctest::Approx(responses[k](r, c)).epsilon(1e-14));
    }
  }
}

TEST_CASE("coverage of one channel is point-symmetric about the centre") {
  const FilterBank bank = design_bank();
  const std::vector<int> one{11};
  const ImageGrid map = coverage_map(bank, 64, 64, one);
  CHECK(map.maxCoeff() > 0.9);
  for (Index r = 1; r < 64; ++r)
    for (Index c = 1; c < 64; ++c) CHECK(map(r, c) == doctest::Approx(map(64 - r, 64 - c)));
}

TEST_CASE("empty subset gives a zero coverage map") {
  const FilterBank bank = design_bank();
  CHECK((coverage_map(bank, 32, 32, std::vector<int>{}) == 0.0).all());
}

TEST_CASE("full-bank coverage stays within [0.7, 1.5] on the working annulus") {
  const FilterBank bank = design_bank();
  const Index n = 256;
  const ImageGrid map = coverage_map(bank, n, n);
  double lo = 1e9;
  double hi = -1e9;
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      // Shifted grid: DC sits at (n/2, n/2).
      const double v = 2 * kPi * static_cast<double>(r - n / 2) / n;
      const double u = 2 * kPi * static_cast<double>(c - n / 2) / n;
      const double rho = std::hypot(u, v);
      if (rho < bank.lowpass_cutoff || rho > 0.9 * kPi) continue;
      lo = std::min(lo, map(r, c));
      hi = std::max(hi, map(r, c));
    }
  }
  CHECK(lo >= 0.7);
  CHECK(hi <= 1.5);
}

TEST_CASE("bank JSON round trip and validation") {
  const FilterBank bank = design_bank(2, 6, 0.3);
  const FilterBank back = bank_from_json(to_json(bank));
  CHECK(to_json(back).dump() == to_json(bank).dump());
  nlohmann::json broken = to_json(bank);
  broken["channels"][1]["v"] = -0.5;
  CHECK_THROWS_AS(bank_from_json(broken), std::invalid_argument);
  FilterBank two_low = bank;
  two_low.channels[1] = two_low.channels[0];
  CHECK_THROWS_AS(validate(two_low), std::invalid_argument);
}
