#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/rng.hpp"

namespace arrowflow {

using ItemId = std::int32_t;
using Position = std::int32_t;

/// An ordering of the item-ids 0..V-1. items()[p] is the item at position p;
/// an inverse table makes rank_of O(1). Immutable after construction.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<ItemId> items);

  static Permutation identity(int size);
  static Permutation reversed(int size);

  int size() const { return static_cast<int>(items_.size()); }
  std::span<const ItemId> items() const { return items_; }
  ItemId item_at(Position p) const { return items_[static_cast<std::size_t>(p)]; }

  /// Position of `item`; throws if item is outside 0..V-1.
  Position rank_of(ItemId item) const;

  bool operator==(const Permutation& other) const { return items_ == other.items_; }
  bool operator!=(const Permutation& other) const { return items_ != other.items_; }

  /// Fixture text form: comma-separated item-ids, e.g. "2,0,4,1,3".
  std::string to_text() const;
  static Permutation from_text(const std::string& text);

 private:
  std::vector<ItemId> items_;
  std::vector<Position> inverse_;  // item -> position
};

/// Signed per-position displacements from an input ordering to a filter
/// ordering: displacement[p] = rank(filter, input[p]) - p. The input may be a
/// prefix; every input item must be in the filter's vocabulary.
std::vector<Position> motion(std::span<const ItemId> input, const Permutation& filter);
std::vector<Position> motion(const Permutation& input, const Permutation& filter);

/// Spearman's footrule: sum of absolute displacements. Same vocabulary required.
std::int64_t footrule(const Permutation& a, const Permutation& b);

/// l_q norm of the motion vector; q=0 counts nonzero displacements, q=1 is the
/// footrule, q=2 the Euclidean norm.
double lq_distance(const Permutation& a, const Permutation& b, int q);

/// Number of item pairs ordered oppositely in a and b.
std::int64_t kendall_tau(const Permutation& a, const Permutation& b);

/// Permutation induced by sorting scores in strictly decreasing order; ties
/// keep the smaller original index first. NaN scores are rejected.
Permutation argsort_desc(std::span<const double> scores);

/// Applies `count` uniformly random adjacent transpositions.
Permutation adjacent_transpose_augment(const Permutation& pi, int count, SeededRng& rng);

/// Uniform over S_V via seeded Fisher-Yates shuffle.
Permutation random_permutation(int size, SeededRng& rng);

}  // namespace arrowflow
