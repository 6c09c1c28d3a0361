#pragma once

#include "leap/comparators.hpp"
#include "leap/diagnostics.hpp"
#include "leap/model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace leap {

enum class Exchangeability { full, half, none };

std::string_view to_string(Exchangeability e);
Exchangeability parse_exchangeability(std::string_view name);

/// Generating design for the desk-scale replication study.
struct SimScenario {
  Exchangeability exchangeability = Exchangeability::full;
  double q = 0.5;       // shift applied to unexchangeable historical subjects
  int n_extra = 0;      // current sample size is n0 + n_extra
  int n0 = 150;
  int reps = 200;
  std::uint64_t seed = 1;
  double sigma = 35.0;  // residual SD
};

void validate(const SimScenario& s);

/// True coefficients of [1, age, age^2, PASI] and the treatment effect.
inline const std::vector<double> kSimBeta{-18.00, 0.49, -1.67, 1.99};
inline constexpr double kSimTreatment = -35.39;

struct SimData {
  Dataset current;
  HistoricalDataset hist;
};

/// One replication. Log(age) and log(PASI) are bivariate normal; age, age^2
/// and PASI are centred and scaled with the current sample's statistics (also
/// applied to the historical sample). Historical subjects are all controls;
/// unexchangeable ones use q * mu and q * beta. In the half scenario the first
/// floor(n0 / 2) historical subjects are exchangeable.
SimData generate_replication(const SimScenario& s, std::uint64_t seed);

/// Raw (unstandardized) covariates age and PASI for n subjects.
Eigen::MatrixXd draw_covariates(int n, double shift, Rng& rng);

struct SimFitSettings {
  std::vector<std::string> priors{"leap", "npbpp", "reference"};
  int iterations = 6000;  // LEAP and reference chains, burn-in included
  int burn_in = 1000;
  int npp_draws = 4000;
  int npp_grid = 201;
  double leap_alpha = 0.95;
  double vague_precision = 1e-2;
  ReferencePriorConfig reference;
};

/// Supported prior names, in display order.
const std::vector<std::string>& sim_prior_names();

struct SimResult {
  std::vector<std::string> priors;
  std::vector<SimMetrics> metrics;
  std::vector<std::vector<ReplicationEstimate>> estimates;  // [prior][rep]
};

/// LEAP configuration used for a simulated linear design with p columns.
LeapConfig sim_leap_config(int p, const SimFitSettings& fit);
NppConfig sim_npp_config(int p, const SimFitSettings& fit);

/// Fits every requested prior on every replication and scores the posterior
/// of the treatment effect. Replications run on `workers` threads with seeds
/// derive_seed(s.seed, rep); results do not depend on the worker count.
SimResult run_simulation(const SimScenario& s, const SimFitSettings& fit, int workers = 1);

}  // namespace leap
