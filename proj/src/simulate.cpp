#include "leap/simulate.hpp"

#include "leap/error.hpp"
#include "leap/gibbs.hpp"
#include "leap/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace leap {

std::string_view to_string(Exchangeability e) {
  switch (e) {
    case Exchangeability::full: return "full";
    case Exchangeability::half: return "half";
    case Exchangeability::none: return "none";
  }
  return "full";
}

Exchangeability parse_exchangeability(std::string_view name) {
  if (name == "full") return Exchangeability::full;
  if (name == "half") return Exchangeability::half;
  if (name == "none") return Exchangeability::none;
  throw validation_error("unknown exchangeability '" + std::string(name) +
                         "' (expected full, half or none)");
}

void validate(const SimScenario& s) {
  if (s.reps < 1) throw validation_error("reps must be >= 1");
  if (!(s.q > 0.0 && s.q <= 1.0)) throw validation_error("q must lie in (0, 1]");
  if (s.n_extra < 0) throw validation_error("n_extra must be >= 0");
  if (s.n0 < 1) throw validation_error("n0 must be >= 1");
  if (!(s.sigma > 0.0)) throw validation_error("sigma must be > 0");
}

Eigen::MatrixXd draw_covariates(int n, double shift, Rng& rng) {
  // Cholesky factor of [[0.09, -0.01], [-0.01, 0.10]].
  const double l11 = 0.3;
  const double l21 = -0.01 / l11;
  const double l22 = std::sqrt(0.10 - l21 * l21);
  Eigen::MatrixXd out(n, 2);
  for (int i = 0; i < n; ++i) {
    const double z1 = standard_normal(rng), z2 = standard_normal(rng);
    out(i, 0) = std::exp(shift * 3.78 + l11 * z1);
    out(i, 1) = std::exp(shift * 2.90 + l21 * z1 + l22 * z2);
  }
  return out;
}

namespace {

Eigen::MatrixXd raw_features(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd f(cov.rows(), 3);
  f.col(0) = cov.col(0);
  f.col(1) = cov.col(0).array().square();
  f.col(2) = cov.col(1);
  return f;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& f, const Eigen::RowVectorXd& centre,
                               const Eigen::RowVectorXd& scale) {
  Eigen::MatrixXd X(f.rows(), f.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(f.cols()) = (f.rowwise() - centre).array().rowwise() / scale.array();
  return X;
}

}  // namespace

SimData generate_replication(const SimScenario& s, std::uint64_t seed) {
  validate(s);
  Rng rng(seed);
  const int n = s.n0 + s.n_extra;
  const int n_exch = s.exchangeability == Exchangeability::full   ? s.n0
                     : s.exchangeability == Exchangeability::half ? s.n0 / 2
                                                                  : 0;
  const Eigen::MatrixXd fc = raw_features(draw_covariates(n, 1.0, rng));
  Eigen::MatrixXd f0(s.n0, 3);
  if (n_exch > 0) f0.topRows(n_exch) = raw_features(draw_covariates(n_exch, 1.0, rng));
  if (n_exch < s.n0)
    f0.bottomRows(s.n0 - n_exch) = raw_features(draw_covariates(s.n0 - n_exch, s.q, rng));

  const Eigen::RowVectorXd centre = fc.colwise().mean();
  Eigen::RowVectorXd scale(3);
  for (int j = 0; j < 3; ++j)
    scale(j) = std::sqrt((fc.col(j).array() - centre(j)).square().sum() / (n - 1));
  const Eigen::MatrixXd X = with_intercept(fc, centre, scale);
  const Eigen::MatrixXd X0 = with_intercept(f0, centre, scale);
  const Eigen::Map<const Eigen::VectorXd> beta(kSimBeta.data(), 4);

  Eigen::VectorXd z(n), y(n);
  for (int i = 0; i < n; ++i) z(i) = uniform01(rng) < 2.0 / 3.0 ? 1.0 : 0.0;
  for (int i = 0; i < n; ++i)
    y(i) = X.row(i).dot(beta) + z(i) * kSimTreatment + s.sigma * standard_normal(rng);
  Eigen::VectorXd y0(s.n0);
  for (int i = 0; i < s.n0; ++i) {
    const double shift = i < n_exch ? 1.0 : s.q;
    y0(i) = shift * X0.row(i).dot(beta) + s.sigma * standard_normal(rng);
  }
  return {Dataset::make(y, X, z), HistoricalDataset::make(y0, X0)};
}

const std::vector<std::string>& sim_prior_names() {
  static const std::vector<std::string> names{"leap", "npbpp", "reference"};
  return names;
}

LeapConfig sim_leap_config(int p, const SimFitSettings& fit) {
  LeapConfig cfg;
  cfg.model = ModelKind::normal_linear;
  cfg.K = 2;
  cfg.alpha = {fit.leap_alpha, fit.leap_alpha};
  const auto prior = NormalGammaPrior::vague(p, fit.vague_precision);
  cfg.linear = {prior, prior};
  return cfg;
}

NppConfig sim_npp_config(int p, const SimFitSettings& fit) {
  NppConfig cfg;
  cfg.model = ModelKind::normal_linear;
  cfg.linear = NormalGammaPrior::vague(p, fit.vague_precision);
  cfg.grid_size = fit.npp_grid;
  return cfg;
}

namespace {

ReplicationEstimate treatment_estimate(const DrawsMatrix& draws, int p) {
  const auto col = draws.column(indexed_name("beta", 1, p));
  ReplicationEstimate e;
  for (double v : col) e.mean += v;
  e.mean /= static_cast<double>(col.size());
  e.ci_low = quantile(col, 0.025);
  e.ci_high = quantile(col, 0.975);
  return e;
}

}  // namespace

SimResult run_simulation(const SimScenario& s, const SimFitSettings& fit, int workers) {
  validate(s);
  for (const auto& name : fit.priors)
    if (std::find(sim_prior_names().begin(), sim_prior_names().end(), name) ==
        sim_prior_names().end())
      throw validation_error("unknown prior '" + name +
                             "' (supported: leap, npbpp, reference)");
  if (fit.priors.empty()) throw validation_error("no priors requested");

  SimResult out;
  out.priors = fit.priors;
  out.estimates.assign(fit.priors.size(),
                       std::vector<ReplicationEstimate>(static_cast<std::size_t>(s.reps)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(s.reps));

  auto run_rep = [&](int r) {
    try {
      const std::uint64_t rep_seed = derive_seed(s.seed, static_cast<std::uint64_t>(r));
      const SimData sim = generate_replication(s, rep_seed);
      const int p = sim.current.design_cols();
      for (std::size_t k = 0; k < fit.priors.size(); ++k) {
        const auto& name = fit.priors[k];
        const std::uint64_t fit_seed = derive_seed(rep_seed, k + 1);
        DrawsMatrix draws;
        if (name == "leap") {
          const auto cfg = sim_leap_config(p, fit);
          ChainSettings cs{fit.iterations, fit.burn_in, 1, fit_seed, false};
          draws = run_chain(&sim.current, sim.hist, cfg, cs);
        } else if (name == "npbpp") {
          draws = npp_posterior(sim.current, sim.hist, sim_npp_config(p, fit), fit.npp_draws,
                                fit_seed);
        } else {
          ChainSettings cs{fit.iterations, fit.burn_in, 1, fit_seed, false};
          draws = reference_posterior(sim.current, fit.reference, cs);
        }
        out.estimates[k][static_cast<std::size_t>(r)] = treatment_estimate(draws, p);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  };

  workers = std::clamp(workers, 1, s.reps);
  if (workers == 1) {
    for (int r = 0; r < s.reps; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < s.reps; r += workers) run_rep(r);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t r = 0; r < errors.size(); ++r)
    if (errors[r]) {
      try {
        std::rethrow_exception(errors[r]);
      } catch (const Error& e) {
        throw Error(e.kind(), "replication " + std::to_string(r) + ": " + e.what());
      }
    }

  for (const auto& est : out.estimates) out.metrics.push_back(sim_metrics(est, kSimTreatment));
  return out;
}

}  // namespace leap
