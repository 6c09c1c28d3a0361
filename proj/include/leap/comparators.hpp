#pragma once

#include "leap/conjugate.hpp"
#include "leap/gibbs.hpp"
#include "leap/model.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace leap {

/// Prior on the power parameter a0.
struct A0Prior {
  enum class Kind { uniform, truncated_uniform, beta, fixed };
  Kind kind = Kind::uniform;
  double p1 = 1.0;  // truncated_uniform: upper bound; beta: shape1; fixed: value
  double p2 = 1.0;  // beta: shape2

  static A0Prior uniform() { return {}; }
  static A0Prior truncated(double upper) { return {Kind::truncated_uniform, upper, 1.0}; }
  static A0Prior beta(double s1, double s2) { return {Kind::beta, s1, s2}; }
  static A0Prior fixed(double value) { return {Kind::fixed, value, 1.0}; }
};

std::string_view to_string(A0Prior::Kind kind);

/// Normalized power prior. The initial prior matches the model family; for the
/// linear model it is normal-gamma on the full coefficient vector, and the
/// historical design gets a zero treatment column so only the shared
/// coefficients borrow.
struct NppConfig {
  ModelKind model = ModelKind::poisson;
  PoissonGammaPrior poisson;
  NormalGammaPrior linear;
  A0Prior a0_prior;
  int grid_size = 1001;
};

void validate(const NppConfig& cfg);

/// log C(a0) = log of the integral of L(theta | D0)^a0 times the initial prior.
/// `layout` only fixes the linear design layout (treatment column) and may be null.
double npp_log_norm_const(double a0, const HistoricalDataset& hist, const NppConfig& cfg,
                          const Dataset* layout = nullptr);

/// log of the integral of L(theta | D) L(theta | D0)^a0 times the initial prior.
double npp_log_joint_marginal(double a0, const Dataset& data, const HistoricalDataset& hist,
                              const NppConfig& cfg);

/// Grid posterior of a0.
struct A0Posterior {
  std::vector<double> grid;
  std::vector<double> probs;
  double mean = 0.0;
};

A0Posterior npp_a0_posterior(const Dataset& data, const HistoricalDataset& hist,
                             const NppConfig& cfg);

/// Conjugate posterior of the shared parameter given a0.
PoissonGammaPrior npp_poisson_conditional(double a0, const Dataset& data,
                                          const HistoricalDataset& hist, const NppConfig& cfg);
LinearConditional npp_linear_conditional(double a0, const Dataset& data,
                                         const HistoricalDataset& hist, const NppConfig& cfg);

/// Independent draws of (a0, shared parameter). Poisson columns: theta[1], a0.
/// Linear columns: beta[1,j], tau[1], sigma[1], a0.
DrawsMatrix npp_posterior(const Dataset& data, const HistoricalDataset& hist,
                          const NppConfig& cfg, int n_draws, std::uint64_t seed);

struct ReferencePriorConfig {
  double coef_sd = 10.0;
  double sigma_sd = 10.0;
};

void validate(const ReferencePriorConfig& cfg);

/// Current-data-only posterior under beta ~ N(0, coef_sd^2 I) and a half-normal
/// prior on sigma with scale sigma_sd. beta | sigma is drawn exactly; log sigma
/// moves by random-walk Metropolis whose step adapts during burn-in.
/// Columns: beta[1,j], sigma[1], tau[1].
DrawsMatrix reference_posterior(const Dataset& data, const ReferencePriorConfig& cfg,
                                const ChainSettings& settings, int chains = 1,
                                int workers = 1);

}  // namespace leap
