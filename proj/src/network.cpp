#include "arrowflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace arrowflow {

std::string to_string(LrSchedule s) {
  return s == LrSchedule::kCosine ? "cosine" : "constant";
}

LrSchedule lr_schedule_from_string(const std::string& name) {
  if (name == "constant") return LrSchedule::kConstant;
  if (name == "cosine") return LrSchedule::kCosine;
  throw std::invalid_argument("unknown lr schedule '" + name + "'");
}

std::string to_string(HiddenUpdateRule r) {
  return r == HiddenUpdateRule::kReferenceAlign ? "reference-align" : "competitive";
}

HiddenUpdateRule hidden_update_rule_from_string(const std::string& name) {
  if (name == "competitive") return HiddenUpdateRule::kCompetitive;
  if (name == "reference-align") return HiddenUpdateRule::kReferenceAlign;
  throw std::invalid_argument("unknown hidden update rule '" + name + "'");
}

void NetworkConfig::validate() const {
  if (hidden_sizes.empty()) throw std::invalid_argument("config: need at least one hidden layer");
  for (const int n : hidden_sizes) {
    if (n < 1) throw std::invalid_argument("config: hidden sizes must be >= 1");
  }
  if (classes < 2) throw std::invalid_argument("config: classes must be >= 2");
  if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
  if (eta <= 0.0) throw std::invalid_argument("config: eta must be > 0");
  if (augment_count < 0) throw std::invalid_argument("config: augment count must be >= 0");
  if (winner_count < 1) throw std::invalid_argument("config: winner count must be >= 1");
  if (norm_q != 0 && norm_q != 1 && norm_q != 2) {
    throw std::invalid_argument("config: norm q must be 0, 1 or 2");
  }
}

Network::Network(std::vector<SortLayer> layers, NetworkConfig config, int input_vocab,
                 std::vector<int> filter_class)
    : layers_(std::move(layers)),
      config_(std::move(config)),
      input_vocab_(input_vocab),
      filter_class_(std::move(filter_class)) {}

Network Network::init(int input_vocab, const NetworkConfig& config, SeededRng& rng) {
  config.validate();
  if (input_vocab < 2) throw std::invalid_argument("Network: input vocabulary must be >= 2");

  std::vector<SortLayer> layers;
  int vocab = input_vocab;
  for (const int width : config.hidden_sizes) {
    layers.push_back(SortLayer::random_init(width, vocab, rng, config.norm_q,
                                            config.winner_count));
    vocab = width;
  }
  layers.push_back(SortLayer::random_init(config.classes, vocab, rng, config.norm_q, 1));
  if (!config.last_layer_update) layers.back().set_frozen(true);

  // Snake-draft pool assignment: classes take turns claiming the earliest
  // still-unclaimed filter in their reference ordering, so every reference
  // ranks its own pool near the front and pools stay balanced.
  const SortLayer& output = layers.back();
  std::vector<int> filter_class(static_cast<std::size_t>(vocab), -1);
  std::vector<Position> cursor(static_cast<std::size_t>(config.classes), 0);
  int assigned = 0;
  while (assigned < vocab) {
    for (int c = 0; c < config.classes && assigned < vocab; ++c) {
      Position& p = cursor[static_cast<std::size_t>(c)];
      while (p < vocab &&
             filter_class[static_cast<std::size_t>(
                 output.filter(c).ordering().item_at(p))] != -1) {
        ++p;
      }
      if (p >= vocab) continue;
      filter_class[static_cast<std::size_t>(output.filter(c).ordering().item_at(p))] = c;
      ++assigned;
    }
  }
  return Network(std::move(layers), config, input_vocab, std::move(filter_class));
}

ForwardResult Network::forward(std::span<const ItemId> input) const {
  if (static_cast<int>(input.size()) > input_vocab_) {
    throw std::invalid_argument("Network::forward: input longer than first-layer vocabulary");
  }
  ForwardResult result;
  result.layer_outputs.reserve(layers_.size());
  std::span<const ItemId> current = input;
  for (const SortLayer& layer : layers_) {
    LayerForward fwd = layer.forward(current);
    if (&layer == &layers_.back()) result.final_distances = std::move(fwd.distances);
    result.layer_outputs.push_back(std::move(fwd.output));
    current = result.layer_outputs.back().items();
  }
  return result;
}

int Network::predict(std::span<const ItemId> input) const {
  const ForwardResult fwd = forward(input);
  int best = 0;
  for (int c = 1; c < config_.classes; ++c) {
    if (fwd.final_distances[static_cast<std::size_t>(c)] <
        fwd.final_distances[static_cast<std::size_t>(best)]) {
      best = c;
    }
  }
  return best;
}

double Network::eta_at(int iteration) const {
  if (config_.lr_schedule == LrSchedule::kConstant) return config_.eta;
  const double t = static_cast<double>(iteration);
  const double total = static_cast<double>(config_.iterations);
  return config_.eta * (1.0 + std::cos(3.14159265358979323846 * t / total)) / 2.0;
}

void Network::update_last_hidden(const Permutation& input, int label, double eta) {
  SortLayer& layer = layers_[layers_.size() - 2];
  // Every filter in the label's pool accumulates the input, so the pool block
  // tracks the class's vote median and rises to the front of the output
  // ranking where the class's frozen reference expects it.
  const VoteMatrix phi = vote_matrix(input.items(), layer.vocab());
  bool touched = false;
  for (int j = 0; j < layer.filter_count(); ++j) {
    if (filter_class_[static_cast<std::size_t>(j)] != label) continue;
    accumulate(layer.mutable_filter(j), phi, eta);
    reorder(layer.mutable_filter(j));
    touched = true;
  }
  if (!touched) {
    layer.update(input.items(), std::nullopt, eta);
  }
}

TrainLog Network::train(std::span<const Permutation> inputs, std::span<const int> labels,
                        SeededRng& rng) {
  if (inputs.empty()) throw std::invalid_argument("Network::train: empty data");
  if (inputs.size() != labels.size()) {
    throw std::invalid_argument("Network::train: inputs/labels size mismatch");
  }
  for (const int label : labels) {
    if (label < 0 || label >= config_.classes) {
      throw std::invalid_argument("Network::train: label out of range");
    }
  }

  TrainLog log;
  log.rows.reserve(static_cast<std::size_t>(config_.iterations));

  const auto train_error = [&]() {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      wrong += predict(inputs[i]) != labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(inputs.size());
  };

  // Epoch-shuffled cyclic presentation: one sample per iteration.
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  const std::size_t last_hidden = layers_.size() - 2;
  for (int t = 1; t <= config_.iterations; ++t) {
    if (cursor >= order.size()) {
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.next_below(i + 1))]);
      }
      cursor = 0;
    }
    const std::size_t idx = order[cursor++];
    const int label = labels[idx];
    Permutation sample = inputs[idx];
    if (config_.augment_count > 0) {
      sample = adjacent_transpose_augment(sample, config_.augment_count, rng);
    }

    const double eta_t = eta_at(t);
    TrainLogRow row;
    row.iteration = t;
    row.eta = eta_t;
    if (eta_t > 0.0) {
      // Record layer inputs with the pre-update state, then apply updates.
      std::vector<Permutation> layer_inputs;
      layer_inputs.push_back(sample);
      std::span<const ItemId> current = sample.items();
      for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        LayerForward fwd = layers_[l].forward(current);
        layer_inputs.push_back(std::move(fwd.output));
        current = layer_inputs.back().items();
      }
      for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        const bool aligned =
            config_.hidden_rule == HiddenUpdateRule::kReferenceAlign && l == last_hidden;
        if (aligned) {
          update_last_hidden(layer_inputs[l], label, eta_t);
        } else {
          layers_[l].update(layer_inputs[l].items(), std::nullopt, eta_t);
        }
      }
      if (config_.last_layer_update) {
        layers_.back().update(layer_inputs.back().items(), label, eta_t);
      }
    }
    if (config_.log_every > 0 && t % config_.log_every == 0) {
      row.train_error = train_error();
    }
    log.rows.push_back(row);
  }
  log.final_train_error = train_error();
  return log;
}

}  // namespace arrowflow
