#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/dataset.hpp"
#include "arrowflow/encoder.hpp"
#include "arrowflow/network.hpp"

namespace arrowflow {

struct EnsembleConfig {
  int views = 7;
  std::vector<ProjectionStrategy> strategy_cycle{ProjectionStrategy::kTargetAware,
                                                 ProjectionStrategy::kRandom,
                                                 ProjectionStrategy::kCalibrated};
  bool native_encoding = false;
  int poly_degree = 2;
  int embed_dim = 32;
  double lda_ratio = 0.5;
  NetworkConfig network;
  std::uint64_t seed = 42;

  void validate() const;
};

struct EnsembleView {
  EncodingPipeline pipeline;
  Network network;
};

/// K (pipeline, network) pairs combined by majority vote. Views share the
/// polynomial/scaler stage and differ only in projection and network seed.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(EnsembleConfig config, std::vector<EnsembleView> views)
      : config_(std::move(config)), views_(std::move(views)) {}

  const EnsembleConfig& config() const { return config_; }
  int view_count() const { return static_cast<int>(views_.size()); }
  const EnsembleView& view(int k) const { return views_[static_cast<std::size_t>(k)]; }
  EnsembleView& mutable_view(int k) { return views_[static_cast<std::size_t>(k)]; }

  /// Per-view encode+predict; plurality wins. Ties go to the tied class with
  /// the smallest sum of per-view normalized output distances, then to the
  /// smaller class-id.
  int predict(std::span<const double> x) const;
  std::vector<int> predict_all(const Matrix& x) const;

  double error_on(const Matrix& x, std::span<const int> y) const;

 private:
  EnsembleConfig config_;
  std::vector<EnsembleView> views_;
};

/// Fits pipelines and trains one network per view; view k uses
/// strategy_cycle[k mod cycle] and rng seed seed^k. Per-view training logs are
/// collected into *logs when given.
EnsembleModel build_ensemble(const EnsembleConfig& config, const Matrix& train_x,
                             std::span<const int> train_y, int threads = 1,
                             std::vector<TrainLog>* logs = nullptr);

/// kNN with footrule distance on the exact same encoded permutations, per
/// view, combined by the same majority vote. Measures what filter learning
/// adds over plain distance lookup.
class KnnPermutationBaseline {
 public:
  KnnPermutationBaseline(const EnsembleModel& model, const Matrix& train_x,
                         std::span<const int> train_y);

  int predict(std::span<const double> x, int k_neighbors) const;
  double error_on(const Matrix& x, std::span<const int> y, int k_neighbors) const;

 private:
  std::vector<std::vector<Permutation>> per_view_train_;  // encoded train set
  std::vector<int> labels_;
  const EnsembleModel* model_;
  int classes_ = 0;
};

/// Shared plurality combiner: most votes wins; ties resolved by the smallest
/// tie score, then by class-id.
int majority_vote(std::span<const int> votes, std::span<const double> tie_scores, int classes);

/// Error-rate report over the repetition grid: outer perturbation seeds
/// (derived from base_seed) times inner models. Stats must come from the
/// train split. A null spec evaluates the clean test set once per model.
EvalRow evaluate_models(std::span<const EnsembleModel> models, const Dataset& test,
                        const PerturbationSpec* spec, int outer_reps, const TrainStats& stats,
                        std::uint64_t base_seed, const std::string& dataset_name,
                        const std::string& config_id);

}  // namespace arrowflow
