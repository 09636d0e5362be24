#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arrowflow/perm.hpp"
#include "arrowflow/rng.hpp"
#include "arrowflow/sort_layer.hpp"

namespace arrowflow {

/// Footrule-Mallows model: P(pi | center, lambda) proportional to
/// exp(-lambda * d_F(pi, center)).
struct MallowsSpec {
  Permutation center;
  double lambda = 1.0;
};

struct OracleReport {
  std::string name;
  long trials = 0;
  long violations = 0;
  double bound = 0.0;
  double measured = 0.0;
  bool pass = false;
  std::string detail;
};

/// Random (z, eps) with |eps|_inf < min_gap(z)/2 must never change the argsort.
OracleReport check_stability(long trials, int dim, SeededRng& rng);

/// Monte Carlo flip frequency under Gaussian noise vs the union-bound tail
/// C(d,2) * exp(-min_gap^2 / (4 sigma^2)), with a 3-sigma Monte Carlo margin.
OracleReport check_gaussian_bound(int dim, double sigma, long trials, SeededRng& rng);

/// log2(d!) via direct log accumulation.
double ordinal_capacity_bits(int dim);

/// Metropolis chain over S_V with adjacent-transposition proposals; burn-in
/// 10*V^2 steps, thinning V^2 steps, initialized at the center.
std::vector<Permutation> sample_mallows(const MallowsSpec& spec, int count, SeededRng& rng);

/// Exact Mallows probabilities by full enumeration of S_V (V <= 8) in
/// lexicographic order of the orderings.
std::vector<std::pair<Permutation, double>> mallows_exact(const MallowsSpec& spec);

/// Chi-squared goodness of fit of the sampler against exact enumeration;
/// low-expectation cells are pooled. Passes when p > 0.01.
OracleReport check_mallows_sampler(int vocab, double lambda, int samples, SeededRng& rng);

/// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
double chi_squared_pvalue(double statistic, int dof);

/// Feeds Mallows samples through accumulate/reorder of a fresh filter and
/// measures how often the final ordering recovers the center. Also reports the
/// minimum gap between estimated expected positions.
OracleReport check_accumulation_consistency(int vocab, double lambda, int samples_per_run,
                                            int runs, double required_rate, SeededRng& rng);

/// Exact argmin over all V! permutations of the total footrule distance to the
/// samples; ties resolved lexicographically. V <= 8.
Permutation footrule_median_bruteforce(std::span<const Permutation> samples);

/// Exhaustive minimum footrule perturbation that changes a random layer's
/// output, minimized over all inputs of S_V; requires it to be at most
/// 2*(N-1) for every sampled filter bank.
OracleReport check_manipulability(int vocab, int n_filters, int banks, SeededRng& rng);

/// First-order variance of a monomial under Gaussian input noise, distinct
/// indices: sigma^2 * sum_s prod_{t!=s} x_t^2. Monte Carlo must agree within
/// `rel_tolerance`.
OracleReport check_poly_noise_distinct(std::span<const double> x, double sigma, long trials,
                                       double rel_tolerance, SeededRng& rng);

/// Repeated-index case x_i^k: variance k^2 sigma^2 x_i^(2(k-1)).
OracleReport check_poly_noise_repeated(double x_value, int degree, double sigma, long trials,
                                       double rel_tolerance, SeededRng& rng);

/// Metric-equivalence checks, re-run as a cross-module suite: metric axioms
/// on random triples, the Kendall sandwich, and the diameter formula.
OracleReport check_metric_axioms(long trials, int vocab, SeededRng& rng);
OracleReport check_kendall_sandwich(long trials, int vocab, SeededRng& rng);
OracleReport check_diameter(int max_vocab);

/// Majority-vote simulation against the exact binomial tail and the Hoeffding
/// bound exp(-2K(1/2 - p)^2).
OracleReport check_ensemble_bound(int voters, double per_voter_error, long trials,
                                  SeededRng& rng);
double majority_error_exact(int voters, double per_voter_error);

/// Runs the whole suite with the default desk-scale parameters.
std::vector<OracleReport> run_property_suite(std::uint64_t seed);

}  // namespace arrowflow
