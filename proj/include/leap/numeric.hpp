#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace leap {

/// log(sum(exp(x))) with the usual max shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

/// Normalizes log weights in place into probabilities; returns the log normalizer.
double normalize_log_weights(std::vector<double>& w);

double log_beta(double a, double b);
double log_multivariate_beta(std::span<const double> alpha);
double log_binomial(int n, int k);

/// log( F_Beta(b | alpha, beta) - F_Beta(a | alpha, beta) ), evaluated on
/// whichever tail avoids cancellation.
double log_beta_interval_mass(double alpha, double beta, double a, double b);

using Rng = std::mt19937_64;

/// splitmix64 finalizer used to derive independent per-chain/replication seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

double uniform01(Rng& rng);  // open interval (0, 1)
double standard_normal(Rng& rng);
/// log of a Gamma(shape, 1) variate; stays finite for tiny shapes.
double log_gamma_variate(Rng& rng, double shape);
/// Gamma(shape, rate) draw clamped to the positive normal doubles.
double gamma_variate(Rng& rng, double shape, double rate);
/// Dirichlet draw computed from log-gamma variates so no coordinate is exactly 0.
std::vector<double> dirichlet_variate(Rng& rng, std::span<const double> alpha);
/// Index drawn with probability proportional to exp(logw), single uniform
/// against the cumulative normalized weights.
int categorical_from_log(Rng& rng, std::span<const double> logw);

}  // namespace leap
