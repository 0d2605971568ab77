#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "lucid/error.hpp"
#include "lucid/posthoc.hpp"
#include "lucid/rng.hpp"

using namespace lucid;

namespace {

VectorXd random_vector(Index d, std::uint64_t seed) {
  Rng rng(seed);
  VectorXd x(d);
  for (Index i = 0; i < d; ++i) x[i] = rng.uniform(-2.0, 2.0);
  return x;
}

// Weighted least squares with intercept via Householder QR on sqrt(w)-scaled
// rows. Returns [intercept, beta...].
VectorXd qr_oracle(const MatrixXd& Z, const VectorXd& y, const VectorXd& w) {
  MatrixXd a(Z.rows(), Z.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(Z.cols()) = Z;
  const VectorXd s = w.cwiseSqrt();
  return (s.asDiagonal() * a).householderQr().solve(s.asDiagonal() * y);
}

VectorXd weights_for(const MatrixXd& Z, double width) {
  VectorXd w(Z.rows());
  for (Index i = 0; i < Z.rows(); ++i) w[i] = proximity_weight(Z.row(i).transpose(), width);
  return w;
}

}  // namespace

TEST_CASE("perturbation sampler: first row all ones, binary, reproducible") {
  const MatrixXd z = sample_perturbations(6, 200, 3);
  CHECK(z.rows() == 200);
  CHECK(z.cols() == 6);
  CHECK((z.row(0).array() == 1.0).all());
  CHECK((z.array() * (1.0 - z.array()) == 0.0).all());
  CHECK((z.rowwise().sum().array() >= 1.0).all());
  CHECK(sample_perturbations(6, 200, 3) == z);
  CHECK(sample_perturbations(6, 200, 4) != z);
  CHECK_THROWS_AS(sample_perturbations(6, 6, 1), std::invalid_argument);
}

TEST_CASE("single feature samples are all ones") {
  const MatrixXd z = sample_perturbations(1, 10, 5);
  CHECK((z.array() == 1.0).all());
}

TEST_CASE("proximity kernel") {
  VectorXd z(4);
  z << 1, 1, 1, 1;
  CHECK(proximity_weight(z, 0.25) == 1.0);
  z << 1, 0, 1, 1;
  CHECK(proximity_weight(z, 0.5) == doctest::Approx(std::exp(-0.25)));
  CHECK(proximity_weight(z, 0.5) == doctest::Approx(0.7788).epsilon(1e-4));
  z << 0, 0, 1, 1;
  CHECK(proximity_weight(z, 0.25) == doctest::Approx(std::exp(-4.0)));
}

TEST_CASE("full-budget surrogate matches a weighted QR oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MatrixXd Z = sample_perturbations(7, 300, seed);
    const VectorXd w = weights_for(Z, 0.4);
    const VectorXd y = Z * random_vector(7, seed + 10) + VectorXd::Constant(300, 0.3) + 0.2 * random_vector(300, seed + 20);
    const LocalExplanation e = fit_weighted_surrogate(Z, y, w, 7);
    const VectorXd oracle = qr_oracle(Z, y, w);
    CHECK(std::abs(e.intercept - oracle[0]) < 1e-6);
    CHECK((e.feature_weights - oracle.tail(7)).cwiseAbs().maxCoeff() < 1e-6);
    const VectorXd fitted = (Z * oracle.tail(7)).array() + oracle[0];
    CHECK(e.local_fidelity == doctest::Approx(weighted_r2(y, fitted, w)).epsilon(1e-9));
  }
}

TEST_CASE("linear black box is recovered exactly") {
  const VectorXd instance = random_vector(10, 2);
  const VectorXd beta = random_vector(10, 3);
  const BlackBox f = [&](const VectorXd& x) { return 0.7 + beta.dot(x); };
  const LocalExplanation e = fit_local_surrogate(f, tabular_mapping(instance));
  // Switching feature i off removes beta_i * x_i.
  const VectorXd expected = beta.cwiseProduct(instance);
  CHECK((e.feature_weights - expected).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(e.intercept == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(e.local_fidelity >= 1.0 - 1e-9);
}

TEST_CASE("fidelity is monotone in the budget") {
  const VectorXd instance = random_vector(8, 4);
  const BlackBox f = [&](const VectorXd& x) { return std::tanh(x.sum()) + 0.3 * x[0] * x[1]; };
  const InterpretableMapping m = tabular_mapping(instance);
  double previous = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 8; ++k) {
    const LocalExplanation e = fit_local_surrogate(f, m, {.budget = k});
    CHECK(e.local_fidelity >= previous - 1e-12);
    CHECK(static_cast<int>(e.selected.size()) == k);
    previous = e.local_fidelity;
  }
}

TEST_CASE("budget bounds the support and selection follows importance") {
  const VectorXd instance = VectorXd::Ones(6);
  VectorXd beta(6);
  beta << 0.1, 5.0, 0.0, -3.0, 0.01, 1.0;
  const BlackBox f = [&](const VectorXd& x) { return beta.dot(x); };
  const LocalExplanation e = fit_local_surrogate(f, tabular_mapping(instance), {.budget = 2});
  CHECK(e.selected == std::vector<int>{1, 3});
  int nonzero = 0;
  for (Index i = 0; i < 6; ++i) nonzero += e.feature_weights[i] != 0.0;
  CHECK(nonzero == 2);
  const std::set<int> chosen(e.selected.begin(), e.selected.end());
  CHECK(chosen.size() == e.selected.size());
}

TEST_CASE("constant black box gives zero weights and perfect fidelity") {
  const BlackBox f = [](const VectorXd&) { return 2.5; };
  const LocalExplanation e = fit_local_surrogate(f, tabular_mapping(random_vector(5, 6)));
  CHECK(e.feature_weights.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(e.intercept == doctest::Approx(2.5));
  CHECK(e.local_fidelity == 1.0);
}

TEST_CASE("wide kernel approaches the unweighted fit") {
  const MatrixXd Z = sample_perturbations(5, 200, 8);
  const VectorXd y = Z * random_vector(5, 9) + 0.5 * random_vector(200, 10);
  const LocalExplanation wide = fit_weighted_surrogate(Z, y, weights_for(Z, 1e6), 5);
  const VectorXd flat = qr_oracle(Z, y, VectorXd::Ones(200));
  CHECK((wide.feature_weights - flat.tail(5)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("non-finite score is reported with the sample index") {
  int calls = 0;
  const BlackBox f = [&](const VectorXd& x) { return calls++ == 3 ? std::nan("") : x.sum(); };
  try {
    fit_local_surrogate(f, tabular_mapping(VectorXd::Ones(4)), {.samples = 50});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.index() == 3);
  }
}

TEST_CASE("image block mapping") {
  Rng rng(12);
  ImageGrid img(20, 13);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
  const InterpretableMapping m = image_block_mapping(img, 8);
  CHECK(m.d_prime == 6);
  const VectorXd flat = Eigen::Map<const VectorXd>(img.data(), img.size());
  CHECK(m.realize(VectorXd::Ones(6)) == flat);
  VectorXd off = VectorXd::Ones(6);
  off[0] = 0.0;
  const VectorXd x = m.realize(off);
  const IndexGrid labels = block_labels(20, 13, 8);
  for (Index r = 0; r < 20; ++r)
    for (Index c = 0; c < 13; ++c) {
      const double got = x[r * 13 + c];
      CHECK(got == (labels(r, c) == 0 ? img.mean() : img(r, c)));
    }
  CHECK(labels(19, 12) == 5);
}

TEST_CASE("heatmap paints tile weights") {
  LocalExplanation e;
  e.feature_weights = VectorXd(4);
  e.feature_weights << 1, 2, 3, 4;
  const ImageGrid h = block_heatmap(e, 16, 16, 8);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 15) == 2.0);
  CHECK(h(15, 0) == 3.0);
  CHECK(h(15, 15) == 4.0);
  const auto j = to_json(e);
  CHECK(j["feature_weights"].size() == 4);
}
