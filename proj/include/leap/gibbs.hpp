#pragma once

#include "leap/conjugate.hpp"
#include "leap/model.hpp"
#include "leap/numeric.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace leap {

/// One state of the blocked sampler. Only the fields of cfg.model are used:
/// `rate` for Poisson, `beta` / `tau` for the linear model.
struct GibbsState {
  std::vector<double> rate;
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> tau;
  std::vector<double> gamma;
  PartitionAssignment c0;
};

struct ChainSettings {
  int iterations = 22000;  // total, burn-in included
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  bool keep_partitions = true;
};

/// Conjugate Gibbs sampler for the LEAP posterior. `data` may be null, in
/// which case the chain targets the LEAP prior itself. The referenced data
/// must outlive the sampler.
class LeapSampler {
 public:
  LeapSampler(const Dataset* data, const HistoricalDataset& hist, const LeapConfig& cfg);

  GibbsState initialize(Rng& rng) const;
  GibbsState step(const GibbsState& state, Rng& rng) const;

  std::vector<std::string> columns() const;
  std::vector<double> row(const GibbsState& state) const;

  int p() const { return p_; }

 private:
  void draw_theta(GibbsState& state, Rng& rng) const;
  void draw_gamma(GibbsState& state, Rng& rng) const;
  void draw_labels(GibbsState& state, Rng& rng) const;

  const Dataset* data_;
  const HistoricalDataset& hist_;
  const LeapConfig& cfg_;
  int p_ = 0;
  Eigen::MatrixXd X0_;
  LinearSuffStats current_;
  double current_sum_ = 0.0;
  double current_n_ = 0.0;
};

GibbsState initialize_state(const Dataset* data, const HistoricalDataset& hist,
                            const LeapConfig& cfg, Rng& rng);
GibbsState gibbs_step(const GibbsState& state, const Dataset* data,
                      const HistoricalDataset& hist, const LeapConfig& cfg, Rng& rng);

/// Single chain. Deterministic given settings.seed.
DrawsMatrix run_chain(const Dataset* data, const HistoricalDataset& hist,
                      const LeapConfig& cfg, const ChainSettings& settings,
                      int chain_index = 0);

/// Independent chains seeded by derive_seed(settings.seed, chain), merged in
/// chain order; the result does not depend on `workers`.
DrawsMatrix run_chains(const Dataset* data, const HistoricalDataset& hist,
                       const LeapConfig& cfg, const ChainSettings& settings,
                       int chains, int workers = 1);

}  // namespace leap
