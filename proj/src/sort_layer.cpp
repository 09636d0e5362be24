#include "arrowflow/sort_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace arrowflow {

VoteMatrix vote_matrix(std::span<const ItemId> input, int vocab) {
  VoteMatrix phi;
  phi.vocab = vocab;
  phi.voted_column.assign(static_cast<std::size_t>(vocab), -1);
  for (std::size_t p = 0; p < input.size(); ++p) {
    const ItemId item = input[p];
    if (item < 0 || item >= vocab) {
      throw std::invalid_argument("vote_matrix: item outside vocabulary");
    }
    if (phi.voted_column[static_cast<std::size_t>(item)] != -1) {
      throw std::invalid_argument("vote_matrix: duplicate item in input");
    }
    phi.voted_column[static_cast<std::size_t>(item)] = static_cast<Position>(p);
  }
  return phi;
}

void RankingFilter::set_ordering(Permutation ordering) {
  if (has_accumulator() && ordering.size() != vocab()) {
    throw std::invalid_argument("RankingFilter: vocabulary change");
  }
  ordering_ = std::move(ordering);
}

void RankingFilter::materialize() {
  if (has_accumulator()) return;
  const auto v = static_cast<std::size_t>(vocab());
  accumulator_.assign(v * v, 0.0);
  row_sums_.assign(v, 0.0);
  row_weighted_sums_.assign(v, 0.0);
  for (ItemId item = 0; item < vocab(); ++item) {
    const Position p = ordering_.rank_of(item);
    accumulator_[static_cast<std::size_t>(item) * v + static_cast<std::size_t>(p)] = 1.0;
    row_sums_[static_cast<std::size_t>(item)] = 1.0;
    row_weighted_sums_[static_cast<std::size_t>(item)] = static_cast<double>(p);
  }
}

double RankingFilter::accumulator_at(ItemId v, Position k) const {
  if (!has_accumulator()) {
    return ordering_.rank_of(v) == k ? 1.0 : 0.0;
  }
  return accumulator_[static_cast<std::size_t>(v) * static_cast<std::size_t>(vocab()) +
                      static_cast<std::size_t>(k)];
}

double RankingFilter::row_sum(ItemId v) const {
  if (!has_accumulator()) return 1.0;
  return row_sums_[static_cast<std::size_t>(v)];
}

double RankingFilter::position_score(ItemId v) const {
  if (!has_accumulator()) return static_cast<double>(ordering_.rank_of(v));
  const double total = row_sums_[static_cast<std::size_t>(v)];
  if (total <= 0.0) throw std::domain_error("position_score: zero row sum");
  return row_weighted_sums_[static_cast<std::size_t>(v)] / total;
}

void RankingFilter::add_vote(const VoteMatrix& phi, double eta) {
  if (phi.vocab != vocab()) throw std::invalid_argument("add_vote: vocabulary mismatch");
  materialize();
  const auto v = static_cast<std::size_t>(vocab());
  for (std::size_t item = 0; item < v; ++item) {
    const Position k = phi.voted_column[item];
    if (k < 0) continue;
    accumulator_[item * v + static_cast<std::size_t>(k)] += eta;
    row_sums_[item] += eta;
    row_weighted_sums_[item] += eta * static_cast<double>(k);
  }
}

std::span<const double> RankingFilter::dense_accumulator() {
  materialize();
  return accumulator_;
}

void RankingFilter::load_accumulator(std::vector<double> dense) {
  const auto v = static_cast<std::size_t>(vocab());
  if (dense.size() != v * v) throw std::invalid_argument("load_accumulator: size mismatch");
  accumulator_ = std::move(dense);
  row_sums_.assign(v, 0.0);
  row_weighted_sums_.assign(v, 0.0);
  for (std::size_t item = 0; item < v; ++item) {
    for (std::size_t k = 0; k < v; ++k) {
      const double mass = accumulator_[item * v + k];
      row_sums_[item] += mass;
      row_weighted_sums_[item] += mass * static_cast<double>(k);
    }
  }
}

void accumulate(RankingFilter& filter, const VoteMatrix& phi, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("accumulate: eta must be > 0");
  filter.add_vote(phi, eta);
}

void reorder(RankingFilter& filter) {
  const int v = filter.vocab();
  std::vector<double> scores(static_cast<std::size_t>(v));
  for (ItemId item = 0; item < v; ++item) {
    if (filter.row_sum(item) <= 0.0) throw std::domain_error("reorder: zero row sum");
    scores[static_cast<std::size_t>(item)] = filter.position_score(item);
  }
  std::vector<ItemId> items(static_cast<std::size_t>(v));
  std::iota(items.begin(), items.end(), 0);
  std::stable_sort(items.begin(), items.end(), [&](ItemId lhs, ItemId rhs) {
    return scores[static_cast<std::size_t>(lhs)] < scores[static_cast<std::size_t>(rhs)];
  });
  filter.set_ordering(Permutation(std::move(items)));
}

SortLayer::SortLayer(std::vector<RankingFilter> filters, int norm_q, int winner_count,
                     int deletion_position)
    : filters_(std::move(filters)), norm_q_(norm_q), winner_count_(winner_count) {
  if (filters_.empty()) throw std::invalid_argument("SortLayer: need at least one filter");
  if (norm_q_ != 0 && norm_q_ != 1 && norm_q_ != 2) {
    throw std::invalid_argument("SortLayer: q must be 0, 1 or 2");
  }
  if (winner_count_ < 1) throw std::invalid_argument("SortLayer: winner count must be >= 1");
  vocab_ = filters_.front().vocab();
  for (const RankingFilter& f : filters_) {
    if (f.vocab() != vocab_) throw std::invalid_argument("SortLayer: mixed vocabularies");
  }
  deletion_position_ = deletion_position < 0 ? vocab_ : deletion_position;
}

SortLayer SortLayer::random_init(int n_filters, int vocab, SeededRng& rng, int norm_q,
                                 int winner_count) {
  std::vector<RankingFilter> filters;
  filters.reserve(static_cast<std::size_t>(n_filters));
  for (int j = 0; j < n_filters; ++j) {
    filters.emplace_back(random_permutation(vocab, rng));
  }
  return SortLayer(std::move(filters), norm_q, winner_count);
}

double SortLayer::distance_to_filter(std::span<const ItemId> input, int j) const {
  const RankingFilter& f = filters_[static_cast<std::size_t>(j)];
  std::int64_t count = 0;
  std::int64_t sum_abs = 0;
  std::int64_t sum_sq = 0;
  const auto add = [&](std::int64_t d) {
    count += d != 0;
    sum_abs += std::abs(d);
    sum_sq += d * d;
  };
  if (static_cast<int>(input.size()) == vocab_) {
    for (std::size_t p = 0; p < input.size(); ++p) {
      add(f.ordering().rank_of(input[p]) - static_cast<Position>(p));
    }
  } else {
    std::vector<Position> input_pos(static_cast<std::size_t>(vocab_), -1);
    for (std::size_t p = 0; p < input.size(); ++p) {
      const ItemId item = input[p];
      if (item < 0 || item >= vocab_) {
        throw std::invalid_argument("SortLayer: input item outside vocabulary");
      }
      input_pos[static_cast<std::size_t>(item)] = static_cast<Position>(p);
    }
    for (Position p = 0; p < vocab_; ++p) {
      const ItemId item = f.ordering().item_at(p);
      const Position q = input_pos[static_cast<std::size_t>(item)];
      // Absent filter items sit at the configured virtual position.
      add(q >= 0 ? q - p : static_cast<std::int64_t>(deletion_position_) - p);
    }
  }
  if (norm_q_ == 0) return static_cast<double>(count);
  if (norm_q_ == 1) return static_cast<double>(sum_abs);
  return std::sqrt(static_cast<double>(sum_sq));
}

LayerForward SortLayer::forward(std::span<const ItemId> input) const {
  if (input.empty()) throw std::invalid_argument("SortLayer::forward: empty input");
  std::vector<bool> seen(static_cast<std::size_t>(vocab_), false);
  for (const ItemId item : input) {
    if (item < 0 || item >= vocab_) {
      throw std::invalid_argument("SortLayer::forward: item outside vocabulary");
    }
    if (seen[static_cast<std::size_t>(item)]) {
      throw std::invalid_argument("SortLayer::forward: duplicate input item");
    }
    seen[static_cast<std::size_t>(item)] = true;
  }
  LayerForward result;
  result.distances.resize(filters_.size());
  std::vector<double> negated(filters_.size());
  for (std::size_t j = 0; j < filters_.size(); ++j) {
    result.distances[j] = distance_to_filter(input, static_cast<int>(j));
    negated[j] = -result.distances[j];
  }
  result.output = argsort_desc(negated);
  return result;
}

void SortLayer::update(std::span<const ItemId> input, std::optional<int> target_filter,
                       double eta) {
  if (frozen_) throw std::logic_error("SortLayer::update: layer is frozen");
  const VoteMatrix phi = vote_matrix(input, vocab_);
  if (target_filter.has_value()) {
    const int j = *target_filter;
    if (j < 0 || j >= filter_count()) {
      throw std::invalid_argument("SortLayer::update: target filter out of range");
    }
    accumulate(filters_[static_cast<std::size_t>(j)], phi, eta);
    reorder(filters_[static_cast<std::size_t>(j)]);
    return;
  }
  // Competitive winner-take-all: the winner_count closest filters accumulate.
  std::vector<double> negated(filters_.size());
  for (std::size_t j = 0; j < filters_.size(); ++j) {
    negated[j] = -distance_to_filter(input, static_cast<int>(j));
  }
  const Permutation by_distance = argsort_desc(negated);
  const int winners = std::min(winner_count_, filter_count());
  for (int w = 0; w < winners; ++w) {
    const auto j = static_cast<std::size_t>(by_distance.item_at(w));
    accumulate(filters_[j], phi, eta);
    reorder(filters_[j]);
  }
}

}  // namespace arrowflow
