#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arrowflow/ensemble.hpp"

namespace arrowflow {

/// CLI-level configuration. JSON keys use the short experiment names:
/// layers, e, k, K, eta, T, llu, augment, strategy_cycle, knn_k, seed, S,
/// plus lr_schedule, hidden_rule, encoding, w, q, lda_ratio, test_fraction,
/// log_every. Unknown keys are rejected.
struct RunConfig {
  std::vector<int> layers{128};
  int embed_dim = 32;
  int poly_degree = 2;
  int views = 7;
  double eta = 0.1;
  int iterations = 300;
  bool llu = false;
  int augment = 0;
  std::vector<std::string> strategy_cycle{"target-aware", "random", "calibrated"};
  int knn_k = 1;
  std::uint64_t seed = 42;
  int simulations = 5;
  std::string lr_schedule = "constant";
  std::string hidden_rule = "reference-align";
  std::string encoding = "projection";  // projection | native
  int winner_count = 1;
  int norm_q = 1;
  double lda_ratio = 0.5;
  double test_fraction = 0.2;
  int log_every = 0;

  void validate() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  std::string to_canonical_json() const;
  std::string hash() const;

  EnsembleConfig to_ensemble_config(int classes, std::uint64_t ensemble_seed) const;
};

}  // namespace arrowflow
