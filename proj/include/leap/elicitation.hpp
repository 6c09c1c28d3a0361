#pragma once

#include "leap/model.hpp"

#include <functional>
#include <utility>

namespace leap {

/// Beta-binomial prior pmf of n01 under gamma1 ~ Beta(delta01, delta02).
SscPmf ssc_prior_pmf_beta(int n0, double delta01, double delta02);

/// Prior pmf of n01 for an arbitrary (possibly unnormalized) log density of
/// gamma1 supported on (lower, upper), by adaptive quadrature.
SscPmf ssc_prior_pmf_numeric(int n0, const std::function<double(double)>& log_prior_gamma1,
                             double lower = 0.0, double upper = 1.0);

struct SscInterval {
  int low = 0;
  int high = 0;
};

/// Equal-tail interval: low = largest q with CDF(q-1) <= (1-mass)/2,
/// high = smallest q with CDF(q) >= 1 - (1-mass)/2.
SscInterval ssc_interval(const SscPmf& pmf, double mass);

struct BetaSolution {
  double delta01 = 1.0;
  double delta02 = 1.0;
  SscInterval achieved;
  bool attained = false;
  int refinement_steps = 0;
};

/// Finds Beta shape parameters whose beta-binomial central interval matches
/// [target_low, target_high]. Log-scale grid search followed by coordinate
/// refinement; flagged not attained when no solution lands within one count.
BetaSolution solve_beta_hyperparams(int n0, int target_low, int target_high, double mass);

/// min(n / n0, 1).
double truncation_bound(int n_current, int n0);

struct PosteriorSsc {
  SscPmf pmf;
  double mean = 0.0;
};

/// Empirical pmf of n01 over the retained draws (column "n0[1]").
PosteriorSsc posterior_ssc_summary(const DrawsMatrix& draws);

}  // namespace leap
