#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <vector>

#include "arrowflow/dataset.hpp"
#include "arrowflow/ensemble.hpp"
#include "arrowflow/theory.hpp"

using namespace arrowflow;

namespace {

// Two Gaussian blobs in 3 dimensions, linearly separated.
std::pair<Matrix, std::vector<int>> blob_data(std::size_t n, SeededRng& rng) {
  Matrix x(n, 3);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 0 : 1;
    y[i] = label;
    for (std::size_t c = 0; c < 3; ++c) {
      x.at(i, c) = rng.next_gaussian() * 0.4 + (label == 1 ? 2.0 : 0.0) * (c == 0 ? 1.0 : 0.3);
    }
  }
  return {std::move(x), std::move(y)};
}

EnsembleConfig small_ensemble_config(int classes) {
  EnsembleConfig config;
  config.views = 3;
  config.poly_degree = 1;
  config.embed_dim = 6;
  config.network.hidden_sizes = {12};
  config.network.classes = classes;
  config.network.iterations = 120;
  config.seed = 404;
  return config;
}

}  // namespace

TEST_CASE("strategy cycling and per-view seeds") {
  SeededRng rng(1);
  const auto [x, y] = blob_data(60, rng);
  EnsembleConfig config = small_ensemble_config(2);
  config.views = 7;
  const EnsembleModel model = build_ensemble(config, x, y);

  REQUIRE(model.view_count() == 7);
  const ProjectionStrategy expected[] = {
      ProjectionStrategy::kTargetAware, ProjectionStrategy::kRandom,
      ProjectionStrategy::kCalibrated, ProjectionStrategy::kTargetAware,
      ProjectionStrategy::kRandom,     ProjectionStrategy::kCalibrated,
      ProjectionStrategy::kTargetAware};
  for (int k = 0; k < 7; ++k) {
    CHECK(model.view(k).pipeline.projection.strategy == expected[k]);
  }
  // Distinct seeds produce distinct random columns across views.
  CHECK(model.view(1).pipeline.projection.entries.data !=
        model.view(4).pipeline.projection.entries.data);
}

TEST_CASE("ensemble is reproducible and thread-count independent") {
  SeededRng rng(2);
  const auto [x, y] = blob_data(40, rng);
  const EnsembleConfig config = small_ensemble_config(2);
  const EnsembleModel serial = build_ensemble(config, x, y, 1);
  const EnsembleModel threaded = build_ensemble(config, x, y, 4);
  for (std::size_t r = 0; r < x.rows; ++r) {
    CHECK(serial.predict(x.row(r)) == threaded.predict(x.row(r)));
  }
}

TEST_CASE("K=1 degenerates to the single view") {
  SeededRng rng(3);
  const auto [x, y] = blob_data(40, rng);
  EnsembleConfig config = small_ensemble_config(2);
  config.views = 1;
  const EnsembleModel model = build_ensemble(config, x, y);
  for (std::size_t r = 0; r < 10; ++r) {
    const Permutation pi = model.view(0).pipeline.encode(x.row(r));
    CHECK(model.predict(x.row(r)) == model.view(0).network.predict(pi));
  }
}

TEST_CASE("majority vote semantics") {
  const std::vector<int> votes = {0, 1, 0};
  CHECK(majority_vote(votes, {}, 2) == 0);

  const std::vector<int> unanimous = {1, 1, 1};
  CHECK(majority_vote(unanimous, {}, 3) == 1);

  // Two-way tie resolved by the smaller tie score.
  const std::vector<int> tie = {0, 1};
  const std::vector<double> scores_b_closer = {0.9, 0.2};
  CHECK(majority_vote(tie, scores_b_closer, 2) == 1);
  const std::vector<double> scores_equal = {0.4, 0.4};
  CHECK(majority_vote(tie, scores_equal, 2) == 0);  // then by class-id
}

TEST_CASE("vote is invariant to view order") {
  SeededRng rng(5);
  const auto [x, y] = blob_data(50, rng);
  EnsembleConfig config = small_ensemble_config(2);
  config.views = 5;
  const EnsembleModel model = build_ensemble(config, x, y);

  // Rebuild with the views reversed; predictions must match.
  std::vector<EnsembleView> reversed;
  for (int k = model.view_count() - 1; k >= 0; --k) {
    reversed.push_back(model.view(k));
  }
  const EnsembleModel flipped(model.config(), std::move(reversed));
  for (std::size_t r = 0; r < x.rows; ++r) {
    CHECK(model.predict(x.row(r)) == flipped.predict(x.row(r)));
  }
}

TEST_CASE("simulated ensemble error matches the binomial tail and the bound") {
  CHECK(majority_error_exact(7, 0.2) == doctest::Approx(0.033344).epsilon(1e-4));
  SeededRng rng(6);
  const OracleReport report = check_ensemble_bound(7, 0.2, 200000, rng);
  CHECK(report.pass);
  CHECK(report.measured <= 0.2837);
  CHECK(report.measured == doctest::Approx(0.0333).epsilon(0.15));
}

TEST_CASE("knn baseline on the same permutations") {
  SeededRng rng(7);
  const auto [x, y] = blob_data(60, rng);
  EnsembleConfig config = small_ensemble_config(2);
  const EnsembleModel model = build_ensemble(config, x, y);
  const KnnPermutationBaseline knn(model, x, y);

  // A query equal to a training row at k=1 recovers its label.
  for (std::size_t r = 0; r < 10; ++r) {
    CHECK(knn.predict(x.row(r), 1) == y[r]);
  }
  CHECK_THROWS_AS(knn.predict(x.row(0), 0), std::invalid_argument);
  CHECK_THROWS_AS(knn.predict(x.row(0), static_cast<int>(x.rows) + 1), std::invalid_argument);
}

TEST_CASE("single-view knn agrees with a brute-force scan") {
  // Tiny native-encoded set over V=3 where footrule scanning is hand-checkable.
  SeededRng rng(8);
  Matrix x(6, 3);
  const double rows[6][3] = {{3, 2, 1}, {3, 1, 2}, {1, 2, 3}, {2, 1, 3}, {1, 3, 2}, {2, 3, 1}};
  std::vector<int> y = {0, 0, 1, 1, 0, 1};
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x.at(r, c) = rows[r][c];
  }
  EnsembleConfig config = small_ensemble_config(2);
  config.views = 1;
  config.native_encoding = true;
  config.network.hidden_sizes = {4};
  config.network.iterations = 10;
  const EnsembleModel model = build_ensemble(config, x, y);
  const KnnPermutationBaseline knn(model, x, y);

  const std::vector<double> query = {2.5, 2.0, 1.0};  // encodes to [0,1,2]
  const Permutation encoded = native_rank_encode(query);
  std::int64_t best_distance = 1 << 20;
  int best_label = -1;
  for (std::size_t r = 0; r < 6; ++r) {
    const std::int64_t d = footrule(encoded, native_rank_encode(x.row(r)));
    if (d < best_distance) {
      best_distance = d;
      best_label = y[r];
    }
  }
  CHECK(knn.predict(query, 1) == best_label);
}

TEST_CASE("evaluate_models repetition grid") {
  SeededRng rng(9);
  const auto [x, y] = blob_data(60, rng);
  EnsembleConfig config = small_ensemble_config(2);
  std::vector<EnsembleModel> models;
  for (int sim = 0; sim < 2; ++sim) {
    config.seed = 900 + static_cast<std::uint64_t>(sim);
    models.push_back(build_ensemble(config, x, y));
  }
  Dataset test;
  test.x = x;
  test.y = y;
  test.class_names = {"a", "b"};
  const TrainStats stats = column_stats(x);

  // Clean evaluation: one repetition per model.
  const EvalRow clean = evaluate_models(models, test, nullptr, 5, stats, 42, "blob", "cfg");
  CHECK(clean.n_reps == 2);
  CHECK(clean.perturbation == "none");
  CHECK(clean.error_mean >= 0.0);

  // Stochastic perturbation: outer seeds multiply the model count.
  const PerturbationSpec noise = PerturbationSpec::parse("gaussian:0.5");
  const EvalRow noisy = evaluate_models(models, test, &noise, 3, stats, 42, "blob", "cfg");
  CHECK(noisy.n_reps == 6);

  // Identical seeds and a single model give zero repetition spread.
  const EvalRow single =
      evaluate_models(std::span<const EnsembleModel>(models.data(), 1), test, nullptr, 1,
                      stats, 42, "blob", "cfg");
  CHECK(single.n_reps == 1);
  CHECK(single.error_std == doctest::Approx(0.0));

  // Deterministic transforms evaluate once regardless of reps.
  const PerturbationSpec mono = PerturbationSpec::parse("monotone:signed_square");
  const EvalRow det = evaluate_models(models, test, &mono, 5, stats, 42, "blob", "cfg");
  CHECK(det.n_reps == 2);

  CHECK_THROWS_AS(evaluate_models({}, test, nullptr, 1, stats, 42, "blob", "cfg"),
                  std::invalid_argument);
}
