#include "arrowflow/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace arrowflow {
namespace {

void append_monomials(std::span<const double> x, int degree, std::size_t start, double prefix,
                      std::vector<double>& out) {
  if (degree == 0) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t j = start; j < x.size(); ++j) {
    append_monomials(x, degree - 1, j, prefix * x[j], out);
  }
}

// Cholesky factor L with A = L L^T; A must be symmetric positive definite.
Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (sum <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        l.at(i, i) = std::sqrt(sum);
      } else {
        l.at(i, j) = sum / l.at(j, j);
      }
    }
  }
  return l;
}

// Solves L y = b in place (forward substitution).
std::vector<double> solve_lower(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows;
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l.at(i, k) * y[k];
    y[i] /= l.at(i, i);
  }
  return y;
}

// Solves L^T x = b (back substitution).
std::vector<double> solve_lower_transposed(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows;
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= l.at(k, ii) * x[k];
    x[ii] /= l.at(ii, ii);
  }
  return x;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenpairs are
// returned sorted by descending eigenvalue.
void jacobi_eigen(Matrix a, std::vector<double>& values, Matrix& vectors) {
  const std::size_t n = a.rows;
  vectors = Matrix::identity(n);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors.at(k, p);
          const double vkq = vectors.at(k, q);
          vectors.at(k, p) = c * vkp - s * vkq;
          vectors.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a.at(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return values[lhs] > values[rhs]; });
  std::vector<double> sorted_values(n);
  Matrix sorted_vectors(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    sorted_values[c] = values[order[c]];
    for (std::size_t r = 0; r < n; ++r) sorted_vectors.at(r, c) = vectors.at(r, order[c]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

void fill_random_columns(Matrix& w, std::size_t first_col, SeededRng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.rows));
  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t c = first_col; c < w.cols; ++c) {
      w.at(r, c) = rng.next_gaussian() * scale;
    }
  }
}

// Discriminant directions: top generalized eigenvectors of S_b w = lambda S_w w
// with a ridge term on S_w, capped at C-1 columns. Columns are unit-normalized.
std::vector<std::vector<double>> lda_directions(const Matrix& x, std::span<const int> y,
                                                std::size_t max_directions) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  int classes = 0;
  for (const int label : y) classes = std::max(classes, label + 1);
  if (classes < 2) throw std::invalid_argument("lda_directions: need at least 2 classes");

  std::vector<std::vector<double>> class_means(static_cast<std::size_t>(classes),
                                               std::vector<double>(d, 0.0));
  std::vector<std::size_t> class_counts(static_cast<std::size_t>(classes), 0);
  std::vector<double> global_mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    ++class_counts[c];
    for (std::size_t j = 0; j < d; ++j) {
      class_means[c][j] += x.at(i, j);
      global_mean[j] += x.at(i, j);
    }
  }
  for (std::size_t c = 0; c < class_means.size(); ++c) {
    if (class_counts[c] == 0) continue;
    for (double& v : class_means[c]) v /= static_cast<double>(class_counts[c]);
  }
  for (double& v : global_mean) v /= static_cast<double>(n);

  Matrix s_w(d, d);
  Matrix s_b(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t a = 0; a < d; ++a) {
      const double da = x.at(i, a) - class_means[c][a];
      for (std::size_t b = a; b < d; ++b) {
        s_w.at(a, b) += da * (x.at(i, b) - class_means[c][b]);
      }
    }
  }
  for (std::size_t c = 0; c < class_means.size(); ++c) {
    if (class_counts[c] == 0) continue;
    const double weight = static_cast<double>(class_counts[c]);
    for (std::size_t a = 0; a < d; ++a) {
      const double da = class_means[c][a] - global_mean[a];
      for (std::size_t b = a; b < d; ++b) {
        s_b.at(a, b) += weight * da * (class_means[c][b] - global_mean[b]);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      s_w.at(a, b) = s_w.at(b, a);
      s_b.at(a, b) = s_b.at(b, a);
    }
  }

  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += s_w.at(a, a);
  const double ridge = std::max(1e-6 * trace / static_cast<double>(d), 1e-12);
  for (std::size_t a = 0; a < d; ++a) s_w.at(a, a) += ridge;

  // Whiten: M = L^-1 S_b L^-T with S_w = L L^T, then symmetric eigensolve.
  const Matrix l = cholesky(s_w);
  Matrix m(d, d);
  std::vector<double> col(d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) col[r] = s_b.at(r, c);
    const std::vector<double> solved = solve_lower(l, col);
    for (std::size_t r = 0; r < d; ++r) m.at(r, c) = solved[r];
  }
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) col[c] = m.at(r, c);
    const std::vector<double> solved = solve_lower(l, col);
    for (std::size_t c = 0; c < d; ++c) m.at(r, c) = solved[c];
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const double avg = 0.5 * (m.at(a, b) + m.at(b, a));
      m.at(a, b) = avg;
      m.at(b, a) = avg;
    }
  }

  std::vector<double> values;
  Matrix vectors;
  jacobi_eigen(m, values, vectors);

  const std::size_t count =
      std::min(max_directions, std::min(d, static_cast<std::size_t>(classes - 1)));
  std::vector<std::vector<double>> directions;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> u(d);
    for (std::size_t r = 0; r < d; ++r) u[r] = vectors.at(r, k);
    std::vector<double> w = solve_lower_transposed(l, u);
    double norm = 0.0;
    for (const double v : w) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : w) v /= norm;
    }
    directions.push_back(std::move(w));
  }
  return directions;
}

}  // namespace

std::vector<double> poly_expand(std::span<const double> x, int degree) {
  if (x.empty()) throw std::invalid_argument("poly_expand: empty input");
  if (degree < 1) throw std::invalid_argument("poly_expand: degree must be >= 1");
  std::vector<double> out;
  out.reserve(poly_expanded_size(static_cast<int>(x.size()), degree));
  for (int t = 1; t <= degree; ++t) append_monomials(x, t, 0, 1.0, out);
  return out;
}

std::size_t poly_expanded_size(int input_dim, int degree) {
  // C(d+k, k) - 1 computed incrementally.
  std::size_t total = 1;
  for (int i = 1; i <= degree; ++i) {
    total = total * static_cast<std::size_t>(input_dim + i) / static_cast<std::size_t>(i);
  }
  return total - 1;
}

ScalerStats fit_scaler(const Matrix& x) {
  if (x.rows < 2) throw std::invalid_argument("fit_scaler: need at least 2 rows");
  ScalerStats stats;
  stats.means.assign(x.cols, 0.0);
  stats.stds.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) stats.means[c] += x.at(r, c);
  }
  for (double& m : stats.means) m /= static_cast<double>(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double d = x.at(r, c) - stats.means[c];
      stats.stds[c] += d * d;
    }
  }
  for (double& s : stats.stds) {
    s = std::sqrt(s / static_cast<double>(x.rows));
    if (s < ScalerStats::kStdFloor) s = ScalerStats::kStdFloor;
  }
  return stats;
}

std::vector<double> apply_scaler(const ScalerStats& stats, std::span<const double> x) {
  if (x.size() != stats.means.size()) {
    throw std::invalid_argument("apply_scaler: dimension mismatch");
  }
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    out[c] = (x[c] - stats.means[c]) / stats.stds[c];
  }
  return out;
}

std::string to_string(ProjectionStrategy s) {
  switch (s) {
    case ProjectionStrategy::kRandom: return "random";
    case ProjectionStrategy::kTargetAware: return "target-aware";
    case ProjectionStrategy::kCalibrated: return "calibrated";
  }
  return "random";
}

ProjectionStrategy projection_strategy_from_string(const std::string& name) {
  if (name == "random") return ProjectionStrategy::kRandom;
  if (name == "target-aware") return ProjectionStrategy::kTargetAware;
  if (name == "calibrated") return ProjectionStrategy::kCalibrated;
  throw std::invalid_argument("unknown projection strategy '" + name + "'");
}

ProjectionMatrix make_projection(ProjectionStrategy strategy, std::size_t d_prime,
                                 std::size_t embed_dim, const Matrix* train_x,
                                 std::span<const int> train_y, double lda_ratio,
                                 SeededRng& rng) {
  if (embed_dim < 2) throw std::invalid_argument("make_projection: embed dim must be >= 2");
  ProjectionMatrix projection;
  projection.strategy = strategy;
  projection.entries = Matrix(d_prime, embed_dim);

  switch (strategy) {
    case ProjectionStrategy::kRandom: {
      fill_random_columns(projection.entries, 0, rng);
      break;
    }
    case ProjectionStrategy::kTargetAware: {
      if (train_x == nullptr || train_y.empty()) {
        throw std::invalid_argument("make_projection: target-aware requires labels");
      }
      const auto requested =
          static_cast<std::size_t>(std::ceil(lda_ratio * static_cast<double>(embed_dim)));
      const std::vector<std::vector<double>> directions =
          lda_directions(*train_x, train_y, requested);
      for (std::size_t c = 0; c < directions.size(); ++c) {
        for (std::size_t r = 0; r < d_prime; ++r) projection.entries.at(r, c) = directions[c][r];
      }
      fill_random_columns(projection.entries, directions.size(), rng);
      break;
    }
    case ProjectionStrategy::kCalibrated: {
      if (train_x == nullptr || train_x->rows < 2) {
        throw std::invalid_argument("make_projection: calibrated requires training data");
      }
      fill_random_columns(projection.entries, 0, rng);
      // Rescale each column so projected training coordinates have unit variance.
      std::vector<double> mean(embed_dim, 0.0);
      std::vector<double> sq(embed_dim, 0.0);
      for (std::size_t i = 0; i < train_x->rows; ++i) {
        const std::vector<double> z = row_times_matrix(train_x->row(i), projection.entries);
        for (std::size_t c = 0; c < embed_dim; ++c) {
          mean[c] += z[c];
          sq[c] += z[c] * z[c];
        }
      }
      const double n = static_cast<double>(train_x->rows);
      for (std::size_t c = 0; c < embed_dim; ++c) {
        const double variance = sq[c] / n - (mean[c] / n) * (mean[c] / n);
        const double scale = variance > 1e-24 ? 1.0 / std::sqrt(variance) : 1.0;
        for (std::size_t r = 0; r < d_prime; ++r) projection.entries.at(r, c) *= scale;
      }
      break;
    }
  }
  for (const double v : projection.entries.data) {
    if (std::isnan(v)) throw std::runtime_error("make_projection: NaN entry");
  }
  return projection;
}

std::vector<double> EncodingPipeline::project(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim) {
    throw std::invalid_argument("EncodingPipeline: input dimension mismatch");
  }
  for (const double v : x) {
    if (std::isnan(v)) throw std::invalid_argument("EncodingPipeline: NaN input");
  }
  if (native) throw std::logic_error("EncodingPipeline::project: native pipeline");
  const std::vector<double> raw_scaled = apply_scaler(raw_scaler, x);
  const std::vector<double> expanded = poly_expand(raw_scaled, poly_degree);
  const std::vector<double> scaled = apply_scaler(scaler, expanded);
  return row_times_matrix(scaled, projection.entries);
}

Permutation EncodingPipeline::encode(std::span<const double> x) const {
  if (native) {
    for (const double v : x) {
      if (std::isnan(v)) throw std::invalid_argument("EncodingPipeline: NaN input");
    }
    return argsort_desc(x);
  }
  return argsort_desc(project(x));
}

EncodingPipeline make_native_pipeline(int input_dim) {
  if (input_dim < 2) throw std::invalid_argument("make_native_pipeline: need >= 2 features");
  EncodingPipeline pipeline;
  pipeline.native = true;
  pipeline.input_dim = input_dim;
  return pipeline;
}

Matrix expand_matrix(const Matrix& x_scaled, int poly_degree) {
  const std::size_t d_prime = poly_expanded_size(static_cast<int>(x_scaled.cols), poly_degree);
  Matrix out(x_scaled.rows, d_prime);
  for (std::size_t r = 0; r < x_scaled.rows; ++r) {
    const std::vector<double> expanded = poly_expand(x_scaled.row(r), poly_degree);
    std::copy(expanded.begin(), expanded.end(), out.row(r).begin());
  }
  return out;
}

Matrix scale_matrix(const ScalerStats& stats, const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const std::vector<double> scaled = apply_scaler(stats, x.row(r));
    std::copy(scaled.begin(), scaled.end(), out.row(r).begin());
  }
  return out;
}

EncodingPipeline fit_pipeline(const Matrix& x_raw, std::span<const int> y, int poly_degree,
                              std::size_t embed_dim, ProjectionStrategy strategy,
                              double lda_ratio, SeededRng& rng) {
  EncodingPipeline pipeline;
  pipeline.poly_degree = poly_degree;
  pipeline.input_dim = static_cast<int>(x_raw.cols);
  pipeline.raw_scaler = fit_scaler(x_raw);
  Matrix expanded = expand_matrix(scale_matrix(pipeline.raw_scaler, x_raw), poly_degree);
  pipeline.scaler = fit_scaler(expanded);
  expanded = scale_matrix(pipeline.scaler, expanded);
  pipeline.projection =
      make_projection(strategy, expanded.cols, embed_dim, &expanded, y, lda_ratio, rng);
  return pipeline;
}

double min_gap(std::span<const double> z) {
  if (z.size() < 2) throw std::invalid_argument("min_gap: need at least 2 values");
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    gap = std::min(gap, sorted[i] - sorted[i - 1]);
  }
  return gap;
}

}  // namespace arrowflow
