#pragma once

#include "leap/numeric.hpp"

#include <span>
#include <vector>

namespace leap {

/// Partially truncated Dirichlet: a Dirichlet(alpha) law on the simplex with
/// the first coordinate restricted to (a, b).
struct PtdParams {
  std::vector<double> alpha;
  double a = 0.0;
  double b = 1.0;

  int K() const { return static_cast<int>(alpha.size()); }
  /// Sum of the concentrations of coordinates 2..K.
  double tail_alpha() const;
  bool truncated() const { return a > 0.0 || b < 1.0; }
};

/// Throws a validation Error for nonpositive alpha or an empty interval.
void validate(const PtdParams& params);

/// Truncated-beta law of the first coordinate.
struct TruncatedBeta {
  double alpha;
  double beta;
  double a;
  double b;
};

double ptd_log_norm_const(const PtdParams& params);
double ptd_log_density(const PtdParams& params, std::span<const double> gamma);
TruncatedBeta ptd_marginal_first(const PtdParams& params);
std::vector<double> ptd_sample(const PtdParams& params, Rng& rng);
double ptd_moment(const PtdParams& params, std::span<const int> m);
PtdParams ptd_posterior_update(const PtdParams& params, std::span<const int> counts);

/// Inverse-CDF draw from Beta(alpha, beta) restricted to (a, b).
double truncated_beta_sample(const TruncatedBeta& tb, Rng& rng);
double truncated_beta_cdf(const TruncatedBeta& tb, double x);

}  // namespace leap
