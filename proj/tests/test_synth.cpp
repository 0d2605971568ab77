#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lucid/synth.hpp"

using namespace lucid;

TEST_CASE("pure cosine follows its definition with exact truth fields") {
  const SyntheticImage s = pure_cosine(0.7, 0.9, 0.3, 32, 40);
  REQUIRE(s.truth.size() == 1);
  for (Index r = 0; r < 32; ++r)
    for (Index c = 0; c < 40; ++c) {
      CHECK(s.image(r, c) == doctest::Approx(0.7 * std::cos(0.9 * c + 0.3 * r)));
      CHECK(s.truth[0].phase(r, c) == doctest::Approx(0.9 * c + 0.3 * r));
    }
  CHECK((s.truth[0].amplitude.array() == 0.7).all());
  CHECK((s.truth[0].omega1.array() == 0.9).all());
  CHECK((s.truth[0].omega2.array() == 0.3).all());
}

TEST_CASE("multi-harmonic image is the sum of its parts plus offset") {
  const auto hs = default_harmonics();
  const SyntheticImage s = multi_harmonic(hs, 24, 24, 0.5);
  CHECK(s.truth.size() == hs.size());
  ImageGrid sum = ImageGrid::Constant(24, 24, 0.5);
  for (const Harmonic& h : hs) sum += pure_cosine(h.amplitude, h.u, h.v, 24, 24).truth[0].amplitude *
                                      (pure_cosine(1.0, h.u, h.v, 24, 24).truth[0].phase + h.phase).cos();
  CHECK((s.image - sum).abs().maxCoeff() < 1e-12);
}

TEST_CASE("default harmonics lie inside the open band") {
  for (const Harmonic& h : default_harmonics()) {
    const double rho = std::hypot(h.u, h.v);
    CHECK(rho > 0.0);
    CHECK(rho < std::numbers::pi);
  }
}

TEST_CASE("radial chirp frequency is linear in position") {
  const SyntheticImage s = radial_chirp(0.002, 256, 256);
  // Column 178 sits at x1 = 50.
  CHECK(chirp_x1(178, 256) == 50.0);
  CHECK(s.truth[0].omega1(128, 178) == doctest::Approx(0.2));
  CHECK(s.truth[0].omega2(128, 178) == doctest::Approx(0.0));
  CHECK(s.image(128, 178) == doctest::Approx(std::cos(0.002 * 2500)));
  CHECK_THROWS_AS(radial_chirp(0.02, 256, 256), std::invalid_argument);
}

TEST_CASE("half split winner map marks the stronger side") {
  const Harmonic left{1.0, 0.5, 0.0, 0.0};
  const Harmonic right{1.0, 2.0, 0.0, 0.0};
  const SyntheticImage s = half_split(left, right, 64, 64);
  CHECK(s.winner(10, 5) == 0);
  CHECK(s.winner(10, 60) == 1);
  CHECK(s.image(3, 2) == doctest::Approx(std::cos(0.5 * 2)));
  CHECK(s.image(3, 60) == doctest::Approx(std::cos(2.0 * 60)));
  CHECK(s.truth[0].amplitude(0, 0) == 1.0);
  CHECK(s.truth[0].amplitude(0, 63) == 0.0);
  CHECK(((s.truth[0].amplitude + s.truth[1].amplitude).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid harmonics are rejected") {
  CHECK_THROWS_AS(pure_cosine(1.0, 3.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pure_cosine(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pure_cosine(1.0, 2.5, 2.5), std::invalid_argument);
  ImageSpec spec;
  spec.kind = ImageKind::HalfSplit;
  spec.harmonics = {Harmonic{}};
  CHECK_THROWS_AS(generate_image(spec), std::invalid_argument);
}

TEST_CASE("two-blob sets are reproducible and clear the margin") {
  const Dataset a = two_blob({});
  const Dataset b = two_blob({});
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  REQUIRE(a.inputs.rows() == 200);
  for (Index i = 0; i < 200; ++i) {
    CHECK(a.labels[static_cast<std::size_t>(i)] == static_cast<int>(i % 2));
    // Bisector of (-3, 0) and (3, 0) is x1 = 0; class 0 lives on the left.
    const double signed_margin = a.labels[static_cast<std::size_t>(i)] == 0 ? -a.inputs(i, 0) : a.inputs(i, 0);
    CHECK(signed_margin >= 1.0);
  }
  DatasetSpec other;
  other.seed = 100;
  CHECK(two_blob(other).inputs != a.inputs);
  DatasetSpec impossible;
  impossible.mean1 = {-3.0, 0.0};
  CHECK_THROWS_AS(two_blob(impossible), std::invalid_argument);
}

TEST_CASE("xor dataset is the four corners") {
  const Dataset d = xor_dataset();
  REQUIRE(d.inputs.rows() == 4);
  for (Index i = 0; i < 4; ++i) {
    const bool a = d.inputs(i, 0) > 0.5;
    const bool b = d.inputs(i, 1) > 0.5;
    CHECK(d.labels[static_cast<std::size_t>(i)] == static_cast<int>(a != b));
  }
}

TEST_CASE("spec JSON round trips and kind names") {
  ImageSpec spec;
  spec.kind = ImageKind::MultiHarmonic;
  spec.harmonics = default_harmonics();
  spec.offset = 0.5;
  CHECK(to_json(image_spec_from_json(to_json(spec))).dump() == to_json(spec).dump());
  DatasetSpec ds;
  ds.points = 40;
  CHECK(to_json(dataset_spec_from_json(to_json(ds))).dump() == to_json(ds).dump());
  for (ImageKind k : {ImageKind::PureCosine, ImageKind::MultiHarmonic, ImageKind::RadialChirp, ImageKind::HalfSplit})
    CHECK(image_kind_from_string(to_string(k)) == k);
  CHECK(dataset_kind_from_string("xor") == DatasetKind::Xor);
  CHECK_THROWS_AS(image_kind_from_string("noise"), std::invalid_argument);
}
