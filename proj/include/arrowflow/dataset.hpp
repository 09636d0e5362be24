#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/matrix.hpp"
#include "arrowflow/perm.hpp"

namespace arrowflow {

struct Dataset {
  Matrix x;
  std::vector<int> y;  // dense class ids 0..C-1
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t size() const { return x.rows; }
  int classes() const { return static_cast<int>(class_names.size()); }
};

/// Parses a CSV with a header row; the last column is the label. Label strings
/// are mapped to dense ids in sorted order.
Dataset load_csv(const std::string& path);
Dataset parse_csv(std::istream& in, const std::string& origin);

/// Per-class proportional split, deterministic by seed. Every class needs at
/// least 2 samples.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

/// Within-sample argsort of the raw features; bypasses the projection pipeline.
Permutation native_rank_encode(std::span<const double> x);

enum class PerturbationKind { kGaussian, kMask, kRankTransform, kMonotone, kPerGeneScale };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kGaussian;
  double amount = 0.0;         // sigma or mask fraction
  std::string monotone_name;   // log1p, sqrt_abs, signed_square, scale_0.01, scale_100
  std::uint64_t seed = 0;

  /// Text forms: "gaussian:0.5", "mask:0.3", "rank_transform",
  /// "monotone:log1p", "per_gene_scale:0.3".
  static PerturbationSpec parse(const std::string& text);
  std::string to_text() const;
};

const std::vector<std::string>& monotone_suite();

/// Column means/stds taken from the TRAIN split; mask and noise scaling read
/// them from here, never from the perturbed set.
struct TrainStats {
  std::vector<double> means;
  std::vector<double> stds;
};

TrainStats column_stats(const Matrix& x);

Dataset perturb(const Dataset& ds, const PerturbationSpec& spec, const TrainStats& stats);

/// Error rate of per-sample predictions against labels, in [0, 1].
double error_rate(std::span<const int> predictions, std::span<const int> labels);

struct EvalRow {
  std::string dataset;
  std::string config_id;
  std::string perturbation;
  double error_mean = 0.0;
  double error_std = 0.0;
  int n_reps = 0;
};

/// mean +/- sample std over a set of repeated error measurements.
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace arrowflow
