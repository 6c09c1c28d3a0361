#pragma once

#include "leap/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace leap {

// ---------------------------------------------------------------- Poisson

/// Posterior Gamma(shape + count_sum, rate + n_obs).
PoissonGammaPrior poisson_component_posterior(const PoissonGammaPrior& prior,
                                              double count_sum, double n_obs);

/// Unnormalized log mass of c0. With data == nullptr the current-data terms
/// are dropped and the result is the prior partition kernel.
double poisson_log_partition_weight(const PartitionAssignment& c0,
                                    const Dataset* data,
                                    const HistoricalDataset& hist,
                                    const LeapConfig& cfg);

// ----------------------------------------------------------------- Linear

/// Sufficient statistics (X'X, X'y, y'y, n) of a set of observations.
struct LinearSuffStats {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;
  double n = 0.0;

  static LinearSuffStats zero(int p);
  static LinearSuffStats of(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  void add(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y);
  LinearSuffStats& operator+=(const LinearSuffStats& other);
};

/// Per-class statistics of the historical design, indexed 0..K-1.
std::vector<LinearSuffStats> class_stats(const PartitionAssignment& c0, int K,
                                         const Eigen::MatrixXd& X0,
                                         const Eigen::VectorXd& y0);

/// Normal-gamma conditional
///   beta | tau ~ N(beta_tilde, (tau * precision_scale)^-1),
///   tau ~ Gamma(shape, rate).
struct LinearConditional {
  Eigen::VectorXd beta_tilde;
  Eigen::MatrixXd precision_scale;
  double shape = 0.0;
  double rate = 0.0;
  double log_det_precision = 0.0;
  Eigen::MatrixXd chol_lower;  // L with L L' = precision_scale
};

/// Conjugate update of a normal-gamma prior with the given statistics.
/// Throws a numerical Error when the updated precision is not numerically PD
/// (any Cholesky pivot below 1e-12 * trace / p) or the rate is not positive.
LinearConditional normal_gamma_update(const NormalGammaPrior& prior,
                                      const LinearSuffStats& stats);

/// Conditional of component k >= 2 given the historical class-k data.
LinearConditional linear_component_conditional(const PartitionAssignment& c0,
                                               int k,
                                               const HistoricalDataset& hist,
                                               const NormalGammaPrior& prior,
                                               const Dataset* current = nullptr);

/// Conditional of the shared component given the current data and the
/// historical subjects in class 1.
LinearConditional linear_first_component_conditional(
    const PartitionAssignment& c0, const Dataset& data,
    const HistoricalDataset& hist, const NormalGammaPrior& prior);

/// Unnormalized log mass of c0 for the linear model (prior kernel when
/// data == nullptr).
double linear_log_partition_weight(const PartitionAssignment& c0,
                                   const Dataset* data,
                                   const HistoricalDataset& hist,
                                   const LeapConfig& cfg);

/// Same kernel from precomputed statistics; `current` may have n = 0.
double linear_log_partition_weight(const std::vector<LinearSuffStats>& classes,
                                   const LinearSuffStats* current,
                                   const LeapConfig& cfg);

/// Dispatches on cfg.model.
double log_partition_weight(const PartitionAssignment& c0, const Dataset* data,
                            const HistoricalDataset& hist, const LeapConfig& cfg);

/// log of the PTD / Dirichlet normalizer ratio shared by both models:
/// log B(n0 + alpha; a, b).
double log_allocation_weight(const std::vector<int>& counts, const LeapConfig& cfg);

}  // namespace leap
