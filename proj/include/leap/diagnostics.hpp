#pragma once

#include "leap/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace leap {

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ess = 0.0;
  double mcse = 0.0;
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  std::optional<double> dic;
  std::optional<double> ssc_mean;

  const ParameterSummary& at(std::string_view name) const;
};

/// Sample quantile with linear interpolation between order statistics
/// (the usual "type 7" definition).
double quantile(std::vector<double> x, double prob);

/// ESS of one sequence from Geyer's initial positive sequence of paired
/// autocorrelations. Returns n for a constant sequence.
double effective_sample_size(std::span<const double> x);

/// Standard error of the mean from nonoverlapping batch means.
double batch_means_se(std::span<const double> x, int batches = 50);

/// Per-column mean, sd, central interval, ESS (summed over chains) and MCSE.
PosteriorSummary summarize(const DrawsMatrix& draws, double ci_mass = 0.95);

struct DicResult {
  double dic = 0.0;
  double mean_deviance = 0.0;
  double deviance_at_mean = 0.0;
  double pd = 0.0;
};

/// -2 log L on the current data at a single parameter value. For the linear
/// model `theta` holds beta followed by tau.
double current_deviance(const Dataset& data, ModelKind kind, std::span<const double> theta);

/// DIC on the current-data likelihood. Reads theta[1] (Poisson) or beta[1,j]
/// and tau[1] (linear); the plug-in point averages log tau rather than tau.
DicResult dic(const DrawsMatrix& draws, const Dataset& data, ModelKind kind);

struct ReplicationEstimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct SimMetrics {
  double pab = 0.0;  // fraction; multiply by 100 for percent
  double mse = 0.0;
  double coverage = 0.0;
};

SimMetrics sim_metrics(std::span<const ReplicationEstimate> reps, double truth);

}  // namespace leap
