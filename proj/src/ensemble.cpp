#include "arrowflow/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

namespace arrowflow {
namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= count) break;
          body(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void EnsembleConfig::validate() const {
  if (views < 1) throw std::invalid_argument("ensemble: views must be >= 1");
  if (strategy_cycle.empty()) throw std::invalid_argument("ensemble: empty strategy cycle");
  if (!native_encoding) {
    if (poly_degree < 1) throw std::invalid_argument("ensemble: poly degree must be >= 1");
    if (embed_dim < 2) throw std::invalid_argument("ensemble: embed dim must be >= 2");
  }
  network.validate();
}

EvalRow evaluate_models(std::span<const EnsembleModel> models, const Dataset& test,
                        const PerturbationSpec* spec, int outer_reps, const TrainStats& stats,
                        std::uint64_t base_seed, const std::string& dataset_name,
                        const std::string& config_id) {
  if (models.empty()) throw std::invalid_argument("evaluate_models: no models");
  if (test.size() == 0) throw std::invalid_argument("evaluate_models: empty test set");
  const bool stochastic =
      spec != nullptr &&
      (spec->kind == PerturbationKind::kGaussian || spec->kind == PerturbationKind::kMask ||
       spec->kind == PerturbationKind::kPerGeneScale);
  const int outer = spec != nullptr && stochastic ? std::max(outer_reps, 1) : 1;

  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(outer) * models.size());
  for (int rep = 0; rep < outer; ++rep) {
    Dataset subject = test;
    if (spec != nullptr) {
      PerturbationSpec seeded = *spec;
      seeded.seed = SeededRng(base_seed).derive(7000 + static_cast<std::uint64_t>(rep)).seed();
      subject = perturb(test, seeded, stats);
    }
    for (const EnsembleModel& model : models) {
      errors.push_back(model.error_on(subject.x, subject.y));
    }
  }
  const auto [mean, stdev] = mean_std(errors);
  EvalRow row;
  row.dataset = dataset_name;
  row.config_id = config_id;
  row.perturbation = spec != nullptr ? spec->to_text() : "none";
  row.error_mean = mean;
  row.error_std = stdev;
  row.n_reps = static_cast<int>(errors.size());
  return row;
}

int majority_vote(std::span<const int> votes, std::span<const double> tie_scores, int classes) {
  std::vector<int> counts(static_cast<std::size_t>(classes), 0);
  for (const int v : votes) {
    if (v < 0 || v >= classes) throw std::invalid_argument("majority_vote: vote out of range");
    ++counts[static_cast<std::size_t>(v)];
  }
  int best_count = 0;
  for (const int c : counts) best_count = std::max(best_count, c);
  int winner = -1;
  double winner_score = std::numeric_limits<double>::infinity();
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] != best_count) continue;
    const double score = tie_scores.empty() ? 0.0 : tie_scores[static_cast<std::size_t>(c)];
    if (winner < 0 || score < winner_score) {
      winner = c;
      winner_score = score;
    }
  }
  return winner;
}

int EnsembleModel::predict(std::span<const double> x) const {
  const int classes = config_.network.classes;
  std::vector<int> votes;
  votes.reserve(views_.size());
  std::vector<double> tie_scores(static_cast<std::size_t>(classes), 0.0);
  for (const EnsembleView& view : views_) {
    const Permutation pi = view.pipeline.encode(x);
    const ForwardResult fwd = view.network.forward(pi);
    int best = 0;
    for (int c = 1; c < classes; ++c) {
      if (fwd.final_distances[static_cast<std::size_t>(c)] <
          fwd.final_distances[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    votes.push_back(best);
    const int out_vocab = view.network.layer(view.network.layer_count() - 1).vocab();
    const double half_diameter =
        static_cast<double>(out_vocab) * static_cast<double>(out_vocab) / 2.0;
    for (int c = 0; c < classes; ++c) {
      tie_scores[static_cast<std::size_t>(c)] +=
          fwd.final_distances[static_cast<std::size_t>(c)] / half_diameter;
    }
  }
  return majority_vote(votes, tie_scores, classes);
}

std::vector<int> EnsembleModel::predict_all(const Matrix& x) const {
  std::vector<int> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
  return out;
}

double EnsembleModel::error_on(const Matrix& x, std::span<const int> y) const {
  const std::vector<int> predictions = predict_all(x);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) wrong += predictions[i] != y[i];
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

EnsembleModel build_ensemble(const EnsembleConfig& config, const Matrix& train_x,
                             std::span<const int> train_y, int threads,
                             std::vector<TrainLog>* logs) {
  config.validate();
  if (train_x.rows != train_y.size() || train_x.rows == 0) {
    throw std::invalid_argument("build_ensemble: bad training data");
  }

  // Shared preprocessing: standardize raw features, expand, standardize the
  // monomials; views differ only in their projection and network seed.
  Matrix shared_expanded;
  ScalerStats shared_raw_scaler;
  ScalerStats shared_scaler;
  if (!config.native_encoding) {
    shared_raw_scaler = fit_scaler(train_x);
    shared_expanded =
        expand_matrix(scale_matrix(shared_raw_scaler, train_x), config.poly_degree);
    shared_scaler = fit_scaler(shared_expanded);
    shared_expanded = scale_matrix(shared_scaler, shared_expanded);
  }

  std::vector<std::optional<EnsembleView>> views(static_cast<std::size_t>(config.views));
  if (logs != nullptr) logs->resize(static_cast<std::size_t>(config.views));

  parallel_for(config.views, threads, [&](int k) {
    SeededRng view_rng(config.seed ^ static_cast<std::uint64_t>(k));
    EncodingPipeline pipeline;
    if (config.native_encoding) {
      pipeline = make_native_pipeline(static_cast<int>(train_x.cols));
    } else {
      pipeline.poly_degree = config.poly_degree;
      pipeline.input_dim = static_cast<int>(train_x.cols);
      pipeline.raw_scaler = shared_raw_scaler;
      pipeline.scaler = shared_scaler;
      const ProjectionStrategy strategy =
          config.strategy_cycle[static_cast<std::size_t>(k) % config.strategy_cycle.size()];
      pipeline.projection = make_projection(strategy, shared_expanded.cols,
                                            static_cast<std::size_t>(config.embed_dim),
                                            &shared_expanded, train_y, config.lda_ratio,
                                            view_rng);
    }

    std::vector<Permutation> encoded;
    encoded.reserve(train_x.rows);
    for (std::size_t r = 0; r < train_x.rows; ++r) {
      encoded.push_back(pipeline.encode(train_x.row(r)));
    }

    Network network = Network::init(pipeline.output_vocab(), config.network, view_rng);
    TrainLog log = network.train(encoded, train_y, view_rng);
    if (logs != nullptr) (*logs)[static_cast<std::size_t>(k)] = std::move(log);
    views[static_cast<std::size_t>(k)].emplace(
        EnsembleView{std::move(pipeline), std::move(network)});
  });

  std::vector<EnsembleView> built;
  built.reserve(views.size());
  for (auto& view : views) built.push_back(std::move(*view));
  return EnsembleModel(config, std::move(built));
}

KnnPermutationBaseline::KnnPermutationBaseline(const EnsembleModel& model, const Matrix& train_x,
                                               std::span<const int> train_y)
    : labels_(train_y.begin(), train_y.end()),
      model_(&model),
      classes_(model.config().network.classes) {
  per_view_train_.resize(static_cast<std::size_t>(model.view_count()));
  for (int k = 0; k < model.view_count(); ++k) {
    auto& bucket = per_view_train_[static_cast<std::size_t>(k)];
    bucket.reserve(train_x.rows);
    for (std::size_t r = 0; r < train_x.rows; ++r) {
      bucket.push_back(model.view(k).pipeline.encode(train_x.row(r)));
    }
  }
}

int KnnPermutationBaseline::predict(std::span<const double> x, int k_neighbors) const {
  if (k_neighbors < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (static_cast<std::size_t>(k_neighbors) > labels_.size()) {
    throw std::invalid_argument("knn: k exceeds training size");
  }
  std::vector<int> votes;
  votes.reserve(per_view_train_.size());
  std::vector<double> tie_scores(static_cast<std::size_t>(classes_), 0.0);
  for (std::size_t view = 0; view < per_view_train_.size(); ++view) {
    const Permutation query = model_->view(static_cast<int>(view)).pipeline.encode(x);
    const auto& bucket = per_view_train_[view];

    std::vector<std::pair<std::int64_t, std::size_t>> by_distance;
    by_distance.reserve(bucket.size());
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      by_distance.emplace_back(footrule(query, bucket[i]), i);
    }
    std::stable_sort(by_distance.begin(), by_distance.end());

    std::vector<int> neighbor_counts(static_cast<std::size_t>(classes_), 0);
    for (int n = 0; n < k_neighbors; ++n) {
      ++neighbor_counts[static_cast<std::size_t>(
          labels_[by_distance[static_cast<std::size_t>(n)].second])];
    }
    int best = 0;
    for (int c = 1; c < classes_; ++c) {
      if (neighbor_counts[static_cast<std::size_t>(c)] >
          neighbor_counts[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    votes.push_back(best);

    // Tie score: nearest distance per class, footrule-normalized.
    const int vocab = query.size();
    const double half_diameter = static_cast<double>(vocab) * static_cast<double>(vocab) / 2.0;
    std::vector<double> nearest(static_cast<std::size_t>(classes_),
                                std::numeric_limits<double>::infinity());
    for (const auto& [distance, index] : by_distance) {
      auto& slot = nearest[static_cast<std::size_t>(labels_[index])];
      slot = std::min(slot, static_cast<double>(distance));
    }
    for (int c = 0; c < classes_; ++c) {
      tie_scores[static_cast<std::size_t>(c)] +=
          nearest[static_cast<std::size_t>(c)] / half_diameter;
    }
  }
  return majority_vote(votes, tie_scores, classes_);
}

double KnnPermutationBaseline::error_on(const Matrix& x, std::span<const int> y,
                                        int k_neighbors) const {
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < x.rows; ++r) wrong += predict(x.row(r), k_neighbors) != y[r];
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

}  // namespace arrowflow
