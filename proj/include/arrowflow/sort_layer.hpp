#pragma once

#include <optional>
#include <span>
#include <vector>

#include "arrowflow/perm.hpp"
#include "arrowflow/rng.hpp"

namespace arrowflow {

/// One-hot-per-row record of where each item appeared in a training input.
/// Rows of absent items are all-zero. Stored sparsely (one column per item).
struct VoteMatrix {
  int vocab = 0;
  std::vector<Position> voted_column;  // per item, -1 when absent

  double at(ItemId v, Position k) const {
    return voted_column[static_cast<std::size_t>(v)] == k ? 1.0 : 0.0;
  }
};

VoteMatrix vote_matrix(std::span<const ItemId> input, int vocab);

/// A learned ordering plus a V x V evidence accumulator. The accumulator is
/// initialized to the permutation matrix of the initial ordering (identity for
/// identity-initialized filters) and materialized lazily on first update.
class RankingFilter {
 public:
  explicit RankingFilter(Permutation ordering) : ordering_(std::move(ordering)) {}

  const Permutation& ordering() const { return ordering_; }
  void set_ordering(Permutation ordering);
  int vocab() const { return ordering_.size(); }

  bool has_accumulator() const { return !accumulator_.empty(); }
  double accumulator_at(ItemId v, Position k) const;
  double row_sum(ItemId v) const;
  /// Weighted position index: sum_k k*A[v,k] / sum_k A[v,k].
  double position_score(ItemId v) const;

  void add_vote(const VoteMatrix& phi, double eta);

  /// Raw dense accumulator access for serialization; materializes if lazy.
  std::span<const double> dense_accumulator();
  void load_accumulator(std::vector<double> dense);

 private:
  void materialize();

  Permutation ordering_;
  std::vector<double> accumulator_;       // dense V x V, empty while untouched
  std::vector<double> row_sums_;
  std::vector<double> row_weighted_sums_;
};

/// A_j <- A_j + eta * Phi; the ordering is untouched until reorder().
void accumulate(RankingFilter& filter, const VoteMatrix& phi, double eta);

/// Re-derives the ordering from the accumulator's weighted position indices,
/// ties to the smaller item-id.
void reorder(RankingFilter& filter);

struct LayerForward {
  std::vector<double> distances;  // per filter
  Permutation output;             // filter ids, closest first
};

/// Bank of N ranking filters over a shared vocabulary.
class SortLayer {
 public:
  /// deletion_position is the virtual input slot charged to filter items that
  /// are absent from a partial input; -1 keeps the default of one past the
  /// last vocabulary position.
  SortLayer(std::vector<RankingFilter> filters, int norm_q = 1, int winner_count = 1,
            int deletion_position = -1);

  static SortLayer random_init(int n_filters, int vocab, SeededRng& rng, int norm_q = 1,
                               int winner_count = 1);

  int vocab() const { return vocab_; }
  int filter_count() const { return static_cast<int>(filters_.size()); }
  int norm_q() const { return norm_q_; }
  int winner_count() const { return winner_count_; }
  int deletion_position() const { return deletion_position_; }
  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  const RankingFilter& filter(int j) const { return filters_[static_cast<std::size_t>(j)]; }
  RankingFilter& mutable_filter(int j) { return filters_[static_cast<std::size_t>(j)]; }

  /// Distance from the input to one filter: l_q norm of the displacements of
  /// present items, plus |deletion_position - p| penalties for filter items
  /// absent from the input (p is the absent item's filter position).
  double distance_to_filter(std::span<const ItemId> input, int j) const;

  LayerForward forward(std::span<const ItemId> input) const;
  LayerForward forward(const Permutation& input) const { return forward(input.items()); }

  /// Supervised mode (target given): accumulate+reorder only that filter with
  /// the input's vote matrix. Competitive mode: the winner_count closest
  /// filters update. Updating a frozen layer is a contract violation.
  void update(std::span<const ItemId> input, std::optional<int> target_filter, double eta);

 private:
  std::vector<RankingFilter> filters_;
  int vocab_ = 0;
  int norm_q_ = 1;
  int winner_count_ = 1;
  int deletion_position_ = 0;
  bool frozen_ = false;
};

}  // namespace arrowflow
