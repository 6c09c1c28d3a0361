#pragma once

#include "leap/comparators.hpp"
#include "leap/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace leap {

struct SamplerConfig {
  int draws = 20000;  // retained iterations per chain before thinning
  int burn_in = 2000;
  int thin = 1;
  int chains = 1;
  std::uint64_t seed = 1;

  ChainSettings chain_settings(bool keep_partitions = false) const;
};

/// Everything a run needs besides the data. Component priors left empty are
/// filled with defaults once the design width is known (see resolve()).
struct RunConfig {
  ModelKind model = ModelKind::poisson;
  bool intercept = true;

  int K = 2;
  std::vector<double> alpha;
  double trunc_a = 0.0;
  double trunc_b = 1.0;
  std::vector<PoissonGammaPrior> poisson_priors;
  std::vector<NormalGammaPrior> linear_priors;
  double default_precision = 1e-2;

  A0Prior a0_prior;
  int grid_size = 1001;
  std::optional<PoissonGammaPrior> npp_poisson;
  std::optional<NormalGammaPrior> npp_linear;

  ReferencePriorConfig reference;
  SamplerConfig sampler;

  /// Fills defaults that depend on the design width p (ignored for Poisson).
  void resolve(int p);

  LeapConfig leap() const;  // requires resolve()
  NppConfig npp() const;    // requires resolve()
};

/// Parses the JSON document. Unknown keys and wrong types are validation
/// errors naming the offending path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig read_run_config(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace leap
