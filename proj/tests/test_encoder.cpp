#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <numeric>
#include <vector>

#include "arrowflow/encoder.hpp"

using namespace arrowflow;

namespace {

std::int64_t binomial(int n, int k) {
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

// Closed-form two-class discriminant direction: solve S_w w = mu1 - mu0 by
// Gaussian elimination. Independent of the library's eigensolver path.
std::vector<double> two_class_lda_oracle(const Matrix& x, std::span<const int> y) {
  const std::size_t d = x.cols;
  std::vector<double> mu0(d, 0.0);
  std::vector<double> mu1(d, 0.0);
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) (y[i] == 0 ? mu0 : mu1)[j] += x.at(i, j);
    (y[i] == 0 ? n0 : n1) += 1;
  }
  for (double& v : mu0) v /= static_cast<double>(n0);
  for (double& v : mu1) v /= static_cast<double>(n1);

  Matrix s_w(d, d);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const std::vector<double>& mu = y[i] == 0 ? mu0 : mu1;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        s_w.at(a, b) += (x.at(i, a) - mu[a]) * (x.at(i, b) - mu[b]);
      }
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += s_w.at(a, a);
  for (std::size_t a = 0; a < d; ++a) s_w.at(a, a) += 1e-6 * trace / static_cast<double>(d);

  std::vector<double> rhs(d);
  for (std::size_t j = 0; j < d; ++j) rhs[j] = mu1[j] - mu0[j];
  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(s_w.at(r, col)) > std::abs(s_w.at(pivot, col))) pivot = r;
    }
    for (std::size_t c = 0; c < d; ++c) std::swap(s_w.at(col, c), s_w.at(pivot, c));
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double factor = s_w.at(r, col) / s_w.at(col, col);
      for (std::size_t c = col; c < d; ++c) s_w.at(r, c) -= factor * s_w.at(col, c);
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> w(d);
  for (std::size_t ii = d; ii-- > 0;) {
    double v = rhs[ii];
    for (std::size_t c = ii + 1; c < d; ++c) v -= s_w.at(ii, c) * w[c];
    w[ii] = v / s_w.at(ii, ii);
  }
  return w;
}

}  // namespace

TEST_CASE("poly_expand shapes and values") {
  const std::vector<double> x4 = {1.0, 2.0, 3.0, 4.0};
  CHECK(poly_expand(x4, 3).size() == 34);
  CHECK(poly_expanded_size(4, 3) == 34);

  const std::vector<double> x2 = {2.0, 3.0};
  CHECK(poly_expand(x2, 2) == std::vector<double>{2.0, 3.0, 4.0, 6.0, 9.0});
  CHECK(poly_expand(x2, 1) == x2);
  CHECK_THROWS_AS(poly_expand(x2, 0), std::invalid_argument);

  for (int d = 1; d <= 8; ++d) {
    for (int k = 1; k <= 4; ++k) {
      std::vector<double> x(static_cast<std::size_t>(d), 1.0);
      CHECK(static_cast<std::int64_t>(poly_expand(x, k).size()) == binomial(d + k, k) - 1);
      CHECK(static_cast<std::int64_t>(poly_expanded_size(d, k)) == binomial(d + k, k) - 1);
    }
  }
}

TEST_CASE("scaler fit and apply") {
  Matrix x(2, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 2.0;
  const ScalerStats stats = fit_scaler(x);
  CHECK(stats.means[0] == doctest::Approx(1.0));
  CHECK(stats.stds[0] == doctest::Approx(1.0));  // population std
  CHECK(apply_scaler(stats, std::vector<double>{3.0})[0] == doctest::Approx(2.0));

  Matrix constant(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    constant.at(r, 0) = 7.5;
    constant.at(r, 1) = static_cast<double>(r);
  }
  const ScalerStats floored = fit_scaler(constant);
  CHECK(floored.stds[0] == ScalerStats::kStdFloor);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(apply_scaler(floored, constant.row(r))[0] == doctest::Approx(0.0));
  }

  Matrix one_row(1, 1);
  CHECK_THROWS_AS(fit_scaler(one_row), std::invalid_argument);

  // Applying the fit to its own data recenters and unit-scales each column.
  SeededRng rng(5);
  Matrix random(64, 3);
  for (double& v : random.data) v = rng.next_gaussian() * 3.0 + 1.5;
  const ScalerStats fitted = fit_scaler(random);
  std::vector<double> mean(3, 0.0);
  std::vector<double> var(3, 0.0);
  for (std::size_t r = 0; r < random.rows; ++r) {
    const std::vector<double> z = apply_scaler(fitted, random.row(r));
    for (std::size_t c = 0; c < 3; ++c) mean[c] += z[c];
  }
  for (double& v : mean) v /= static_cast<double>(random.rows);
  for (std::size_t r = 0; r < random.rows; ++r) {
    const std::vector<double> z = apply_scaler(fitted, random.row(r));
    for (std::size_t c = 0; c < 3; ++c) var[c] += (z[c] - mean[c]) * (z[c] - mean[c]);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(std::abs(mean[c]) < 1e-9);
    CHECK(std::abs(var[c] / static_cast<double>(random.rows) - 1.0) < 1e-6);
  }
}

TEST_CASE("random projection determinism and scaling") {
  SeededRng a(31);
  SeededRng b(31);
  const ProjectionMatrix w1 = make_projection(ProjectionStrategy::kRandom, 20, 8, nullptr, {},
                                              0.5, a);
  const ProjectionMatrix w2 = make_projection(ProjectionStrategy::kRandom, 20, 8, nullptr, {},
                                              0.5, b);
  CHECK(w1.entries.data == w2.entries.data);
  CHECK_THROWS_AS(make_projection(ProjectionStrategy::kRandom, 20, 1, nullptr, {}, 0.5, a),
                  std::invalid_argument);
}

TEST_CASE("target-aware projection recovers the two-class discriminant") {
  SeededRng rng(17);
  const std::size_t n = 200;
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 0 : 1;
    y[i] = label;
    // Anisotropic classes separated along an oblique direction.
    const double base0 = rng.next_gaussian() * 2.0;
    const double base1 = rng.next_gaussian() * 0.4;
    x.at(i, 0) = base0 + (label == 1 ? 3.0 : 0.0);
    x.at(i, 1) = 0.5 * base0 + base1 + (label == 1 ? 1.0 : 0.0);
  }
  SeededRng proj_rng(18);
  const ProjectionMatrix w =
      make_projection(ProjectionStrategy::kTargetAware, 2, 4, &x, y, 0.5, proj_rng);

  const std::vector<double> oracle = two_class_lda_oracle(x, y);
  const double dot = w.entries.at(0, 0) * oracle[0] + w.entries.at(1, 0) * oracle[1];
  const double norm_col = std::hypot(w.entries.at(0, 0), w.entries.at(1, 0));
  const double norm_oracle = std::hypot(oracle[0], oracle[1]);
  const double cosine = std::abs(dot) / (norm_col * norm_oracle);
  const double angle_deg = std::acos(std::min(cosine, 1.0)) * 180.0 / 3.14159265358979323846;
  CHECK(angle_deg <= 5.0);

  CHECK_THROWS_AS(make_projection(ProjectionStrategy::kTargetAware, 2, 4, &x, {}, 0.5, proj_rng),
                  std::invalid_argument);
}

TEST_CASE("calibrated projection yields unit-variance projected columns") {
  SeededRng rng(23);
  Matrix x(120, 6);
  for (double& v : x.data) v = rng.next_gaussian() * 4.0;
  SeededRng proj_rng(24);
  const ProjectionMatrix w =
      make_projection(ProjectionStrategy::kCalibrated, 6, 5, &x, {}, 0.5, proj_rng);

  std::vector<double> mean(5, 0.0);
  std::vector<double> sq(5, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const std::vector<double> z = row_times_matrix(x.row(i), w.entries);
    for (std::size_t c = 0; c < 5; ++c) {
      mean[c] += z[c];
      sq[c] += z[c] * z[c];
    }
  }
  for (std::size_t c = 0; c < 5; ++c) {
    const double n = static_cast<double>(x.rows);
    const double variance = sq[c] / n - (mean[c] / n) * (mean[c] / n);
    CHECK(variance == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("encode is deterministic and scale invariant") {
  SeededRng rng(41);
  Matrix x(40, 3);
  for (double& v : x.data) v = rng.next_gaussian();
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);

  SeededRng fit_rng(42);
  const EncodingPipeline pipeline =
      fit_pipeline(x, y, 2, 6, ProjectionStrategy::kRandom, 0.5, fit_rng);

  const std::vector<double> sample = {0.3, -1.2, 0.7};
  CHECK(pipeline.encode(sample) == pipeline.encode(sample));

  // Positive rescaling of the projection output cannot change the ordering.
  EncodingPipeline scaled = pipeline;
  for (double& v : scaled.projection.entries.data) v *= 3.5;
  CHECK(pipeline.encode(sample) == scaled.encode(sample));

  const std::vector<double> z = pipeline.project(sample);
  std::vector<double> shifted(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) shifted[i] = 2.0 * z[i] + 5.0;
  CHECK(argsort_desc(z) == argsort_desc(shifted));

  const std::vector<double> with_nan = {0.3, std::nan(""), 0.7};
  CHECK_THROWS_AS(pipeline.encode(with_nan), std::invalid_argument);

  const std::vector<double> two = {1.0, 3.0};
  CHECK(argsort_desc(two) == Permutation({1, 0}));
}

TEST_CASE("min_gap") {
  const std::vector<double> ticks = {1.2, 3.5, 5.1, 7.8};
  CHECK(min_gap(ticks) == doctest::Approx(1.6));
  const std::vector<double> equal = {4.2, 4.2};
  CHECK(min_gap(equal) == doctest::Approx(0.0));
  CHECK_THROWS_AS(min_gap(std::vector<double>{1.0}), std::invalid_argument);

  SeededRng rng(55);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(10);
    for (double& v : z) v = rng.next_double() * 10.0;
    double brute = 1e300;
    for (std::size_t i = 0; i < z.size(); ++i) {
      for (std::size_t j = i + 1; j < z.size(); ++j) {
        brute = std::min(brute, std::abs(z[i] - z[j]));
      }
    }
    CHECK(min_gap(z) == doctest::Approx(brute));
  }
}

TEST_CASE("argsort stability inside the half-gap radius") {
  SeededRng rng(67);
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> z(8);
    for (double& v : z) v = rng.next_double();
    const double radius = min_gap(z) / 2.0;
    std::vector<double> noisy(8);
    for (std::size_t i = 0; i < 8; ++i) {
      noisy[i] = z[i] + (2.0 * rng.next_double() - 1.0) * 0.999 * radius;
    }
    violations += argsort_desc(z) != argsort_desc(noisy);
  }
  CHECK(violations == 0);
}
