#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/sort_layer.hpp"

namespace arrowflow {

enum class LrSchedule { kConstant, kCosine };

std::string to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(const std::string& name);

/// How hidden layers pick the filters that accumulate a training input.
///  - kCompetitive: the winner_count closest filters update (unsupervised).
///  - kReferenceAlign: in the last hidden layer every filter accumulates the
///    input with a mass graded by how early the true class's output filter
///    ranks it, so the layer learns to emit that class's reference ordering.
///    Earlier hidden layers stay competitive.
enum class HiddenUpdateRule { kCompetitive, kReferenceAlign };

std::string to_string(HiddenUpdateRule r);
HiddenUpdateRule hidden_update_rule_from_string(const std::string& name);

struct NetworkConfig {
  std::vector<int> hidden_sizes{128};
  int classes = 2;
  int iterations = 300;
  double eta = 0.1;
  bool last_layer_update = false;  // llu; false freezes the output layer
  int augment_count = 0;
  LrSchedule lr_schedule = LrSchedule::kConstant;
  HiddenUpdateRule hidden_rule = HiddenUpdateRule::kReferenceAlign;
  int winner_count = 1;
  int norm_q = 1;
  int log_every = 0;  // 0 disables train-error rows in the log

  void validate() const;
};

struct ForwardResult {
  std::vector<Permutation> layer_outputs;  // one per layer, output layer last
  std::vector<double> final_distances;     // length C
};

struct TrainLogRow {
  int iteration = 0;
  double eta = 0.0;
  double train_error = -1.0;  // negative when not sampled this iteration
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  double final_train_error = -1.0;
};

/// Stacked sort layers with an output layer of C class filters. Layer L+1's
/// vocabulary is layer L's filter count.
class Network {
 public:
  static Network init(int input_vocab, const NetworkConfig& config, SeededRng& rng);

  const NetworkConfig& config() const { return config_; }
  int input_vocab() const { return input_vocab_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const SortLayer& layer(int i) const { return layers_[static_cast<std::size_t>(i)]; }
  SortLayer& mutable_layer(int i) { return layers_[static_cast<std::size_t>(i)]; }
  std::span<const int> filter_classes() const { return filter_class_; }

  ForwardResult forward(std::span<const ItemId> input) const;
  ForwardResult forward(const Permutation& input) const { return forward(input.items()); }

  /// Argmin over final distances, ties to the smaller class-id.
  int predict(std::span<const ItemId> input) const;
  int predict(const Permutation& input) const { return predict(input.items()); }

  double eta_at(int iteration) const;

  TrainLog train(std::span<const Permutation> inputs, std::span<const int> labels,
                 SeededRng& rng);

  /// Used by serialization to rebuild a network without retraining.
  Network(std::vector<SortLayer> layers, NetworkConfig config, int input_vocab,
          std::vector<int> filter_class);

 private:
  void update_last_hidden(const Permutation& input, int label, double eta);

  std::vector<SortLayer> layers_;
  NetworkConfig config_;
  int input_vocab_ = 0;
  std::vector<int> filter_class_;  // nearest reference class per last-hidden filter
};

}  // namespace arrowflow
