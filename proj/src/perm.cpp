#include "arrowflow/perm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace arrowflow {

Permutation::Permutation(std::vector<ItemId> items) : items_(std::move(items)) {
  const int v = static_cast<int>(items_.size());
  inverse_.assign(static_cast<std::size_t>(v), -1);
  for (Position p = 0; p < v; ++p) {
    const ItemId item = items_[static_cast<std::size_t>(p)];
    if (item < 0 || item >= v) {
      throw std::invalid_argument("Permutation: item id " + std::to_string(item) +
                                  " outside vocabulary 0.." + std::to_string(v - 1));
    }
    if (inverse_[static_cast<std::size_t>(item)] != -1) {
      throw std::invalid_argument("Permutation: duplicate item id " + std::to_string(item));
    }
    inverse_[static_cast<std::size_t>(item)] = p;
  }
}

Permutation Permutation::identity(int size) {
  std::vector<ItemId> items(static_cast<std::size_t>(size));
  std::iota(items.begin(), items.end(), 0);
  return Permutation(std::move(items));
}

Permutation Permutation::reversed(int size) {
  std::vector<ItemId> items(static_cast<std::size_t>(size));
  for (int p = 0; p < size; ++p) items[static_cast<std::size_t>(p)] = size - 1 - p;
  return Permutation(std::move(items));
}

Position Permutation::rank_of(ItemId item) const {
  if (item < 0 || item >= size()) {
    throw std::invalid_argument("rank_of: item " + std::to_string(item) +
                                " outside vocabulary of size " + std::to_string(size()));
  }
  return inverse_[static_cast<std::size_t>(item)];
}

std::string Permutation::to_text() const {
  std::ostringstream out;
  for (int p = 0; p < size(); ++p) {
    if (p > 0) out << ',';
    out << items_[static_cast<std::size_t>(p)];
  }
  return out.str();
}

Permutation Permutation::from_text(const std::string& text) {
  std::vector<ItemId> items;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::size_t used = 0;
    const long value = std::stol(field, &used);
    if (used != field.size()) {
      throw std::invalid_argument("Permutation::from_text: bad field '" + field + "'");
    }
    items.push_back(static_cast<ItemId>(value));
  }
  if (items.empty()) throw std::invalid_argument("Permutation::from_text: empty text");
  return Permutation(std::move(items));
}

std::vector<Position> motion(std::span<const ItemId> input, const Permutation& filter) {
  std::vector<Position> displacements(input.size());
  for (std::size_t p = 0; p < input.size(); ++p) {
    displacements[p] = filter.rank_of(input[p]) - static_cast<Position>(p);
  }
  return displacements;
}

std::vector<Position> motion(const Permutation& input, const Permutation& filter) {
  return motion(input.items(), filter);
}

std::int64_t footrule(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("footrule: vocabulary mismatch");
  }
  std::int64_t total = 0;
  for (Position p = 0; p < a.size(); ++p) {
    total += std::abs(b.rank_of(a.item_at(p)) - p);
  }
  return total;
}

double lq_distance(const Permutation& a, const Permutation& b, int q) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("lq_distance: vocabulary mismatch");
  }
  if (q != 0 && q != 1 && q != 2) {
    throw std::invalid_argument("lq_distance: q must be 0, 1 or 2");
  }
  std::int64_t count = 0;
  std::int64_t sum_abs = 0;
  std::int64_t sum_sq = 0;
  for (Position p = 0; p < a.size(); ++p) {
    const std::int64_t d = b.rank_of(a.item_at(p)) - p;
    count += d != 0;
    sum_abs += std::abs(d);
    sum_sq += d * d;
  }
  if (q == 0) return static_cast<double>(count);
  if (q == 1) return static_cast<double>(sum_abs);
  return std::sqrt(static_cast<double>(sum_sq));
}

std::int64_t kendall_tau(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("kendall_tau: vocabulary mismatch");
  }
  std::int64_t disagreements = 0;
  const int v = a.size();
  for (ItemId i = 0; i < v; ++i) {
    for (ItemId j = i + 1; j < v; ++j) {
      const bool a_before = a.rank_of(i) < a.rank_of(j);
      const bool b_before = b.rank_of(i) < b.rank_of(j);
      disagreements += a_before != b_before;
    }
  }
  return disagreements;
}

Permutation argsort_desc(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argsort_desc: empty scores");
  std::vector<ItemId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (const double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("argsort_desc: NaN score");
  }
  std::stable_sort(order.begin(), order.end(), [&](ItemId lhs, ItemId rhs) {
    return scores[static_cast<std::size_t>(lhs)] > scores[static_cast<std::size_t>(rhs)];
  });
  return Permutation(std::move(order));
}

Permutation adjacent_transpose_augment(const Permutation& pi, int count, SeededRng& rng) {
  if (count < 0) throw std::invalid_argument("adjacent_transpose_augment: negative count");
  std::vector<ItemId> items(pi.items().begin(), pi.items().end());
  const int v = pi.size();
  for (int step = 0; step < count && v > 1; ++step) {
    const auto p = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(v - 1)));
    std::swap(items[p], items[p + 1]);
  }
  return Permutation(std::move(items));
}

Permutation random_permutation(int size, SeededRng& rng) {
  if (size < 1) throw std::invalid_argument("random_permutation: size must be >= 1");
  std::vector<ItemId> items(static_cast<std::size_t>(size));
  std::iota(items.begin(), items.end(), 0);
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
    std::swap(items[i], items[j]);
  }
  return Permutation(std::move(items));
}

}  // namespace arrowflow
