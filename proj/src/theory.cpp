#include "arrowflow/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "arrowflow/encoder.hpp"

namespace arrowflow {
namespace {

std::int64_t footrule_to_items(std::span<const ItemId> items, const Permutation& center) {
  std::int64_t total = 0;
  for (std::size_t p = 0; p < items.size(); ++p) {
    total += std::abs(center.rank_of(items[p]) - static_cast<Position>(p));
  }
  return total;
}

// Regularized lower incomplete gamma P(a, x), series and continued fraction.
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  // Lentz's continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
  return 1.0 - q;
}

}  // namespace

double chi_squared_pvalue(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_squared_pvalue: dof must be >= 1");
  if (statistic <= 0.0) return 1.0;
  return 1.0 - gamma_p(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

OracleReport check_stability(long trials, int dim, SeededRng& rng) {
  OracleReport report;
  report.name = "argsort-stability";
  report.trials = trials;
  std::vector<double> z(static_cast<std::size_t>(dim));
  std::vector<double> noisy(static_cast<std::size_t>(dim));
  for (long t = 0; t < trials; ++t) {
    for (double& v : z) v = rng.next_double();
    const double radius = min_gap(z);
    for (std::size_t i = 0; i < z.size(); ++i) {
      noisy[i] = z[i] + (2.0 * rng.next_double() - 1.0) * 0.999 * radius / 2.0;
    }
    if (argsort_desc(z) != argsort_desc(noisy)) ++report.violations;
  }
  report.bound = 0.0;
  report.measured = static_cast<double>(report.violations);
  report.pass = report.violations == 0;
  return report;
}

OracleReport check_gaussian_bound(int dim, double sigma, long trials, SeededRng& rng) {
  OracleReport report;
  report.name = "gaussian-stability-bound";
  report.trials = trials;
  // Fixed reference point; the tightest pair sits at the front.
  std::vector<double> z(static_cast<std::size_t>(dim));
  for (std::size_t i = 1; i < z.size(); ++i) {
    z[i] = z[i - 1] + 0.3 + 0.1 * static_cast<double>(i - 1);
  }
  const double delta_min = min_gap(z);
  const Permutation reference = argsort_desc(z);

  long flips = 0;
  std::vector<double> noisy(z.size());
  for (long t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < z.size(); ++i) noisy[i] = z[i] + sigma * rng.next_gaussian();
    flips += argsort_desc(noisy) != reference;
  }
  const double frequency = static_cast<double>(flips) / static_cast<double>(trials);
  const double pairs = static_cast<double>(dim) * static_cast<double>(dim - 1) / 2.0;
  const double tail = pairs * std::exp(-delta_min * delta_min / (4.0 * sigma * sigma));
  const double mc_stderr =
      std::sqrt(std::max(frequency * (1.0 - frequency), 1.0 / static_cast<double>(trials)) /
                static_cast<double>(trials));
  report.bound = tail + 3.0 * mc_stderr;
  report.measured = frequency;
  report.violations = flips;
  report.pass = frequency <= report.bound;
  return report;
}

double ordinal_capacity_bits(int dim) {
  if (dim < 1) throw std::invalid_argument("ordinal_capacity_bits: dim must be >= 1");
  double bits = 0.0;
  for (int i = 2; i <= dim; ++i) bits += std::log2(static_cast<double>(i));
  return bits;
}

std::vector<Permutation> sample_mallows(const MallowsSpec& spec, int count, SeededRng& rng) {
  if (spec.lambda <= 0.0) throw std::invalid_argument("sample_mallows: lambda must be > 0");
  const int v = spec.center.size();
  const long burn_in = 10L * v * v;
  const long thin = static_cast<long>(v) * v;

  std::vector<ItemId> state(spec.center.items().begin(), spec.center.items().end());
  std::int64_t distance = 0;

  const auto step = [&]() {
    const auto p = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(v - 1)));
    // Footrule change from swapping positions p and p+1.
    const ItemId a = state[p];
    const ItemId b = state[p + 1];
    const auto pa = static_cast<std::int64_t>(spec.center.rank_of(a));
    const auto pb = static_cast<std::int64_t>(spec.center.rank_of(b));
    const auto pos = static_cast<std::int64_t>(p);
    const std::int64_t before = std::abs(pa - pos) + std::abs(pb - (pos + 1));
    const std::int64_t after = std::abs(pa - (pos + 1)) + std::abs(pb - pos);
    const std::int64_t delta = after - before;
    if (delta <= 0 || rng.next_double() < std::exp(-spec.lambda * static_cast<double>(delta))) {
      std::swap(state[p], state[p + 1]);
      distance += delta;
    }
  };

  for (long t = 0; t < burn_in; ++t) step();
  std::vector<Permutation> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    for (long t = 0; t < thin; ++t) step();
    samples.emplace_back(std::vector<ItemId>(state));
  }
  return samples;
}

std::vector<std::pair<Permutation, double>> mallows_exact(const MallowsSpec& spec) {
  const int v = spec.center.size();
  if (v > 8) throw std::invalid_argument("mallows_exact: V must be <= 8");
  std::vector<ItemId> items(static_cast<std::size_t>(v));
  std::iota(items.begin(), items.end(), 0);
  std::vector<std::pair<Permutation, double>> table;
  double z = 0.0;
  do {
    const double weight =
        std::exp(-spec.lambda * static_cast<double>(footrule_to_items(items, spec.center)));
    table.emplace_back(Permutation(items), weight);
    z += weight;
  } while (std::next_permutation(items.begin(), items.end()));
  for (auto& [perm, p] : table) p /= z;
  return table;
}

OracleReport check_mallows_sampler(int vocab, double lambda, int samples, SeededRng& rng) {
  OracleReport report;
  report.name = "mallows-sampler-chi2";
  report.trials = samples;

  MallowsSpec spec{Permutation::identity(vocab), lambda};
  const auto exact = mallows_exact(spec);
  const std::vector<Permutation> draws = sample_mallows(spec, samples, rng);

  std::vector<long> counts(exact.size(), 0);
  for (const Permutation& draw : draws) {
    for (std::size_t i = 0; i < exact.size(); ++i) {
      if (exact[i].first == draw) {
        ++counts[i];
        break;
      }
    }
  }

  // Pool cells with expected count below 5 into one bucket.
  double pooled_expected = 0.0;
  long pooled_observed = 0;
  double statistic = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double expected = exact[i].second * static_cast<double>(samples);
    if (expected < 5.0) {
      pooled_expected += expected;
      pooled_observed += counts[i];
      continue;
    }
    const double diff = static_cast<double>(counts[i]) - expected;
    statistic += diff * diff / expected;
    ++cells;
  }
  if (pooled_expected > 0.0) {
    const double diff = static_cast<double>(pooled_observed) - pooled_expected;
    statistic += diff * diff / pooled_expected;
    ++cells;
  }
  const int dof = std::max(cells - 1, 1);
  const double p_value = chi_squared_pvalue(statistic, dof);
  report.bound = 0.01;
  report.measured = p_value;
  report.pass = p_value > 0.01;
  std::ostringstream detail;
  detail << "chi2=" << statistic << " dof=" << dof;
  report.detail = detail.str();
  return report;
}

OracleReport check_accumulation_consistency(int vocab, double lambda, int samples_per_run,
                                            int runs, double required_rate, SeededRng& rng) {
  OracleReport report;
  report.name = "accumulation-consistency";
  report.trials = runs;

  int recovered = 0;
  double min_position_gap = 1e300;
  for (int run = 0; run < runs; ++run) {
    SeededRng run_rng = rng.derive(static_cast<std::uint64_t>(run));
    MallowsSpec spec{Permutation::identity(vocab), lambda};
    RankingFilter filter(random_permutation(vocab, run_rng));
    const std::vector<Permutation> draws = sample_mallows(spec, samples_per_run, run_rng);
    for (const Permutation& draw : draws) {
      accumulate(filter, vote_matrix(draw.items(), vocab), 1.0);
      reorder(filter);
    }
    recovered += filter.ordering() == spec.center;
    std::vector<double> positions(static_cast<std::size_t>(vocab));
    for (ItemId item = 0; item < vocab; ++item) {
      positions[static_cast<std::size_t>(item)] = filter.position_score(item);
    }
    min_position_gap = std::min(min_position_gap, min_gap(positions));
  }
  report.measured = static_cast<double>(recovered) / static_cast<double>(runs);
  report.bound = required_rate;
  report.violations = runs - recovered;
  report.pass = report.measured >= required_rate;
  std::ostringstream detail;
  detail << "expected-position gap >= " << min_position_gap;
  report.detail = detail.str();
  return report;
}

Permutation footrule_median_bruteforce(std::span<const Permutation> samples) {
  if (samples.empty()) throw std::invalid_argument("footrule_median: no samples");
  const int v = samples.front().size();
  if (v > 8) throw std::invalid_argument("footrule_median: V must be <= 8");
  std::vector<ItemId> items(static_cast<std::size_t>(v));
  std::iota(items.begin(), items.end(), 0);
  std::vector<ItemId> best = items;
  std::int64_t best_cost = -1;
  do {
    std::int64_t cost = 0;
    Permutation candidate{std::vector<ItemId>(items)};
    for (const Permutation& sample : samples) cost += footrule(sample, candidate);
    if (best_cost < 0 || cost < best_cost) {
      best_cost = cost;
      best = items;
    }
  } while (std::next_permutation(items.begin(), items.end()));
  return Permutation(std::move(best));
}

OracleReport check_manipulability(int vocab, int n_filters, int banks, SeededRng& rng) {
  OracleReport report;
  report.name = "manipulability-upper-bound";
  report.trials = banks;
  report.bound = 2.0 * static_cast<double>(n_filters - 1);
  if (n_filters < 2) {
    report.detail = "skipped: single filter layers have a constant output";
    report.pass = true;
    return report;
  }

  std::vector<ItemId> items(static_cast<std::size_t>(vocab));
  std::iota(items.begin(), items.end(), 0);
  std::vector<Permutation> universe;
  do {
    universe.emplace_back(std::vector<ItemId>(items));
  } while (std::next_permutation(items.begin(), items.end()));

  double worst_best_delta = 0.0;
  for (int bank = 0; bank < banks; ++bank) {
    SeededRng bank_rng = rng.derive(static_cast<std::uint64_t>(bank));
    const SortLayer layer = SortLayer::random_init(n_filters, vocab, bank_rng);
    std::vector<Permutation> outputs;
    outputs.reserve(universe.size());
    for (const Permutation& pi : universe) outputs.push_back(layer.forward(pi).output);

    std::int64_t best_delta = -1;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      for (std::size_t j = 0; j < universe.size(); ++j) {
        if (i == j || outputs[i] == outputs[j]) continue;
        const std::int64_t d = footrule(universe[i], universe[j]);
        if (best_delta < 0 || d < best_delta) best_delta = d;
      }
    }
    if (best_delta < 0) {
      // Constant layer output over all of S_V; no adversarial input exists.
      ++report.violations;
      continue;
    }
    worst_best_delta = std::max(worst_best_delta, static_cast<double>(best_delta));
    if (static_cast<double>(best_delta) > report.bound) ++report.violations;
  }
  report.measured = worst_best_delta;
  report.pass = report.violations == 0;
  return report;
}

OracleReport check_poly_noise_distinct(std::span<const double> x, double sigma, long trials,
                                       double rel_tolerance, SeededRng& rng) {
  OracleReport report;
  report.name = "poly-noise-distinct-k" + std::to_string(x.size());
  report.trials = trials;

  double predicted = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    double prod = 1.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      if (t != s) prod *= x[t] * x[t];
    }
    predicted += prod;
  }
  predicted *= sigma * sigma;

  double clean = 1.0;
  for (const double v : x) clean *= v;

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> noisy(x.size());
  for (long t = 0; t < trials; ++t) {
    double product = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) product *= x[i] + sigma * rng.next_gaussian();
    const double delta = product - clean;
    sum += delta;
    sum_sq += delta * delta;
  }
  const double n = static_cast<double>(trials);
  const double variance = sum_sq / n - (sum / n) * (sum / n);
  report.bound = rel_tolerance;
  report.measured = std::abs(variance - predicted) / predicted;
  report.pass = report.measured <= rel_tolerance;
  std::ostringstream detail;
  detail << "mc=" << variance << " predicted=" << predicted;
  report.detail = detail.str();
  return report;
}

OracleReport check_poly_noise_repeated(double x_value, int degree, double sigma, long trials,
                                       double rel_tolerance, SeededRng& rng) {
  OracleReport report;
  report.name = "poly-noise-repeated-k" + std::to_string(degree);
  report.trials = trials;

  const double k = static_cast<double>(degree);
  const double predicted =
      k * k * sigma * sigma * std::pow(x_value, 2.0 * (k - 1.0));
  const double clean = std::pow(x_value, k);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (long t = 0; t < trials; ++t) {
    const double delta = std::pow(x_value + sigma * rng.next_gaussian(), k) - clean;
    sum += delta;
    sum_sq += delta * delta;
  }
  const double n = static_cast<double>(trials);
  const double variance = sum_sq / n - (sum / n) * (sum / n);
  report.bound = rel_tolerance;
  report.measured = std::abs(variance - predicted) / predicted;
  report.pass = report.measured <= rel_tolerance;
  return report;
}

OracleReport check_metric_axioms(long trials, int vocab, SeededRng& rng) {
  OracleReport report;
  report.name = "footrule-metric-axioms-V" + std::to_string(vocab);
  report.trials = trials;
  for (long t = 0; t < trials; ++t) {
    const Permutation a = random_permutation(vocab, rng);
    const Permutation b = random_permutation(vocab, rng);
    const Permutation c = random_permutation(vocab, rng);
    const std::int64_t ab = footrule(a, b);
    const std::int64_t ba = footrule(b, a);
    const std::int64_t ac = footrule(a, c);
    const std::int64_t cb = footrule(c, b);
    const bool identity_ok = footrule(a, a) == 0 && (ab == 0) == (a == b);
    const bool symmetry_ok = ab == ba;
    const bool triangle_ok = ab <= ac + cb;
    if (!identity_ok || !symmetry_ok || !triangle_ok) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

OracleReport check_kendall_sandwich(long trials, int vocab, SeededRng& rng) {
  OracleReport report;
  report.name = "kendall-sandwich-V" + std::to_string(vocab);
  report.trials = trials;
  for (long t = 0; t < trials; ++t) {
    const Permutation a = random_permutation(vocab, rng);
    const Permutation b = random_permutation(vocab, rng);
    const std::int64_t dk = kendall_tau(a, b);
    const std::int64_t df = footrule(a, b);
    if (!(dk <= df && df <= 2 * dk) && !(dk == 0 && df == 0)) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

OracleReport check_diameter(int max_vocab) {
  OracleReport report;
  report.name = "footrule-diameter";
  report.trials = max_vocab - 1;
  for (int v = 2; v <= max_vocab; ++v) {
    const std::int64_t d = footrule(Permutation::identity(v), Permutation::reversed(v));
    if (d != static_cast<std::int64_t>(v) * v / 2) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

double majority_error_exact(int voters, double per_voter_error) {
  // P(at least ceil((K+1)/2) of K independent voters are wrong).
  double total = 0.0;
  const int need = voters / 2 + 1;
  for (int wrong = need; wrong <= voters; ++wrong) {
    double log_prob = std::lgamma(voters + 1.0) - std::lgamma(wrong + 1.0) -
                      std::lgamma(voters - wrong + 1.0) +
                      wrong * std::log(per_voter_error) +
                      (voters - wrong) * std::log1p(-per_voter_error);
    total += std::exp(log_prob);
  }
  return total;
}

OracleReport check_ensemble_bound(int voters, double per_voter_error, long trials,
                                  SeededRng& rng) {
  OracleReport report;
  report.name = "ensemble-majority-bound";
  report.trials = trials;
  long failures = 0;
  for (long t = 0; t < trials; ++t) {
    int wrong = 0;
    for (int k = 0; k < voters; ++k) wrong += rng.next_double() < per_voter_error;
    failures += wrong > voters / 2;
  }
  const double measured = static_cast<double>(failures) / static_cast<double>(trials);
  const double exact = majority_error_exact(voters, per_voter_error);
  const double hoeffding =
      std::exp(-2.0 * static_cast<double>(voters) * (0.5 - per_voter_error) * (0.5 - per_voter_error));
  const double mc_stderr = std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
  report.measured = measured;
  report.bound = hoeffding;
  report.pass = measured <= hoeffding && std::abs(measured - exact) <= 4.0 * mc_stderr;
  std::ostringstream detail;
  detail << "exact=" << exact << " hoeffding=" << hoeffding;
  report.detail = detail.str();
  return report;
}

std::vector<OracleReport> run_property_suite(std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<OracleReport> reports;

  for (const int v : {5, 16, 64}) {
    SeededRng local = rng.derive(static_cast<std::uint64_t>(100 + v));
    reports.push_back(check_metric_axioms(10000, v, local));
  }
  for (const int v : {5, 16, 64}) {
    SeededRng local = rng.derive(static_cast<std::uint64_t>(200 + v));
    reports.push_back(check_kendall_sandwich(10000, v, local));
  }
  reports.push_back(check_diameter(64));

  {
    SeededRng local = rng.derive(301);
    reports.push_back(check_stability(10000, 8, local));
  }
  {
    SeededRng local = rng.derive(302);
    reports.push_back(check_gaussian_bound(4, 0.3 / 4.0, 100000, local));
  }
  {
    OracleReport capacity;
    capacity.name = "ordinal-capacity-64";
    capacity.trials = 1;
    capacity.measured = ordinal_capacity_bits(64);
    capacity.bound = 296.0;
    capacity.pass = std::abs(capacity.measured - 296.0) <= 0.5;
    reports.push_back(capacity);
  }
  {
    SeededRng local = rng.derive(303);
    reports.push_back(check_mallows_sampler(4, 1.0, 30000, local));
  }
  {
    SeededRng local = rng.derive(304);
    reports.push_back(check_accumulation_consistency(5, 2.0, 2000, 50, 0.95, local));
  }
  {
    SeededRng local = rng.derive(305);
    reports.push_back(check_manipulability(5, 3, 20, local));
  }
  {
    SeededRng local = rng.derive(306);
    const std::vector<double> x2 = {2.0, 3.0};
    reports.push_back(check_poly_noise_distinct(x2, 1e-3, 100000, 0.05, local));
    const std::vector<double> x3 = {1.5, 2.0, -1.0};
    reports.push_back(check_poly_noise_distinct(x3, 1e-3, 100000, 0.05, local));
    const std::vector<double> x1 = {1.7};
    reports.push_back(check_poly_noise_distinct(x1, 1e-3, 100000, 0.05, local));
    reports.push_back(check_poly_noise_repeated(2.0, 2, 1e-3, 100000, 0.05, local));
  }
  {
    SeededRng local = rng.derive(307);
    reports.push_back(check_ensemble_bound(7, 0.2, 200000, local));
  }
  return reports;
}

}  // namespace arrowflow
