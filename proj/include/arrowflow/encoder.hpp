#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/matrix.hpp"
#include "arrowflow/perm.hpp"
#include "arrowflow/rng.hpp"

namespace arrowflow {

/// All monomials of total degree 1..k over x, constant term excluded, in
/// graded-lexicographic order (degree-1 block first). k=1 returns x unchanged.
std::vector<double> poly_expand(std::span<const double> x, int degree);

/// C(d+k, k) - 1, the expanded feature count.
std::size_t poly_expanded_size(int input_dim, int degree);

/// Per-column z-scoring statistics; population stds floored at 1e-8.
struct ScalerStats {
  std::vector<double> means;
  std::vector<double> stds;

  static constexpr double kStdFloor = 1e-8;
};

ScalerStats fit_scaler(const Matrix& x);
std::vector<double> apply_scaler(const ScalerStats& stats, std::span<const double> x);

enum class ProjectionStrategy { kRandom, kTargetAware, kCalibrated };

std::string to_string(ProjectionStrategy s);
ProjectionStrategy projection_strategy_from_string(const std::string& name);

struct ProjectionMatrix {
  Matrix entries;  // d' x e
  ProjectionStrategy strategy = ProjectionStrategy::kRandom;
};

/// Builds a d' x e projection.
///  - random: i.i.d. Normal(0, 1/d') entries.
///  - target-aware: the first ceil(lda_ratio * e) columns (capped at C-1) are
///    discriminant directions from pooled within-class scatter with a ridge
///    term; the rest are random.
///  - calibrated: random columns rescaled so each projected training
///    coordinate has unit empirical variance.
/// train_x is the already expanded+standardized n x d' matrix; labels are
/// required for target-aware only.
ProjectionMatrix make_projection(ProjectionStrategy strategy, std::size_t d_prime,
                                 std::size_t embed_dim, const Matrix* train_x,
                                 std::span<const int> train_y, double lda_ratio,
                                 SeededRng& rng);

/// Real vectors to permutations. In projection mode: raw standardization,
/// poly expansion, feature standardization, projection, argsort. In native
/// mode: argsort of the raw features, bypassing every other stage.
struct EncodingPipeline {
  bool native = false;
  int poly_degree = 1;
  int input_dim = 0;
  ScalerStats raw_scaler;
  ScalerStats scaler;
  ProjectionMatrix projection;

  int output_vocab() const {
    return native ? input_dim : static_cast<int>(projection.entries.cols);
  }

  /// Projected scores before argsort (projection mode only).
  std::vector<double> project(std::span<const double> x) const;
  Permutation encode(std::span<const double> x) const;
};

EncodingPipeline make_native_pipeline(int input_dim);

/// Fits scaler on the expanded training matrix, then builds the projection.
EncodingPipeline fit_pipeline(const Matrix& x_raw, std::span<const int> y, int poly_degree,
                              std::size_t embed_dim, ProjectionStrategy strategy,
                              double lda_ratio, SeededRng& rng);

/// Expands every row of x_scaled with the given degree.
Matrix expand_matrix(const Matrix& x_scaled, int poly_degree);

/// Applies stats to every row of x.
Matrix scale_matrix(const ScalerStats& stats, const Matrix& x);

/// Exact minimum pairwise absolute difference, O(d log d).
double min_gap(std::span<const double> z);

}  // namespace arrowflow
