#include "leap/comparators.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace leap {

std::string_view to_string(A0Prior::Kind kind) {
  switch (kind) {
    case A0Prior::Kind::uniform: return "uniform";
    case A0Prior::Kind::truncated_uniform: return "truncated_uniform";
    case A0Prior::Kind::beta: return "beta";
    case A0Prior::Kind::fixed: return "fixed";
  }
  return "uniform";
}

void validate(const NppConfig& cfg) {
  if (cfg.grid_size < 11) throw validation_error("a0 grid size must be >= 11");
  const auto& a = cfg.a0_prior;
  switch (a.kind) {
    case A0Prior::Kind::uniform: break;
    case A0Prior::Kind::truncated_uniform:
      if (!(a.p1 > 0.0 && a.p1 <= 1.0))
        throw validation_error("a0 truncation bound must lie in (0, 1]");
      break;
    case A0Prior::Kind::beta:
      if (!(a.p1 > 0.0 && a.p2 > 0.0)) throw validation_error("a0 beta shapes must be > 0");
      break;
    case A0Prior::Kind::fixed:
      if (!(a.p1 >= 0.0 && a.p1 <= 1.0)) throw validation_error("fixed a0 must lie in [0, 1]");
      break;
  }
  if (cfg.model == ModelKind::poisson) {
    if (!(cfg.poisson.shape > 0.0 && cfg.poisson.rate > 0.0))
      throw validation_error("NPP initial gamma prior must be proper");
  } else {
    if (!cfg.linear.is_proper())
      throw validation_error("NPP initial normal-gamma prior must be proper");
  }
}

namespace {

void check_a0(double a0) {
  if (!(a0 >= 0.0 && a0 <= 1.0))
    throw validation_error("a0 must lie in [0, 1], got " + std::to_string(a0));
}

double sum_log_factorial(const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += boost::math::lgamma(y(i) + 1.0);
  return s;
}

double log_gamma_marginal(const PoissonGammaPrior& prior, const PoissonGammaPrior& post) {
  return prior.shape * std::log(prior.rate) - boost::math::lgamma(prior.shape) +
         boost::math::lgamma(post.shape) - post.shape * std::log(post.rate);
}

LinearSuffStats scaled(LinearSuffStats s, double w) {
  s.xtx *= w;
  s.xty *= w;
  s.yty *= w;
  s.n *= w;
  return s;
}

/// log of the integral of exp(-tau/2 * weighted SSR) tau^(n/2) (2 pi)^(-n/2)
/// against the normal-gamma prior, where n is the total weight.
double log_normal_gamma_marginal(const NormalGammaPrior& prior, const LinearSuffStats& stats) {
  const auto post = normal_gamma_update(prior, stats);
  const double log_det_prior =
      2.0 * Eigen::LLT<Eigen::MatrixXd>(prior.precision).matrixL().toDenseMatrix()
                .diagonal().array().log().sum();
  return -0.5 * stats.n * std::log(2.0 * std::numbers::pi) +
         0.5 * (log_det_prior - post.log_det_precision) +
         boost::math::lgamma(post.shape) - boost::math::lgamma(0.5 * prior.delta) +
         0.5 * prior.delta * std::log(0.5 * prior.xi) - post.shape * std::log(post.rate);
}

void check_linear_dims(const NppConfig& cfg, int p) {
  if (cfg.linear.dim() != p)
    throw validation_error("NPP prior dimension " + std::to_string(cfg.linear.dim()) +
                           " does not match the design (" + std::to_string(p) + " columns)");
}

LinearSuffStats historical_stats(const HistoricalDataset& hist, const Dataset* layout) {
  return LinearSuffStats::of(hist.design_like(layout), hist.y());
}

}  // namespace

double npp_log_norm_const(double a0, const HistoricalDataset& hist, const NppConfig& cfg,
                          const Dataset* layout) {
  check_a0(a0);
  if (hist.n0() < 1) throw validation_error("historical data must have n0 >= 1");
  if (cfg.model == ModelKind::poisson) {
    if (a0 == 0.0) return 0.0;  // the proper initial prior integrates to one
    const double s0 = hist.y().sum();
    const PoissonGammaPrior post{cfg.poisson.shape + a0 * s0, cfg.poisson.rate + a0 * hist.n0()};
    return -a0 * sum_log_factorial(hist.y()) + log_gamma_marginal(cfg.poisson, post);
  }
  const auto stats = historical_stats(hist, layout);
  check_linear_dims(cfg, static_cast<int>(stats.xtx.rows()));
  if (a0 == 0.0) return 0.0;
  return log_normal_gamma_marginal(cfg.linear, scaled(stats, a0));
}

double npp_log_joint_marginal(double a0, const Dataset& data, const HistoricalDataset& hist,
                              const NppConfig& cfg) {
  check_a0(a0);
  if (cfg.model == ModelKind::poisson) {
    const auto post = npp_poisson_conditional(a0, data, hist, cfg);
    return -a0 * sum_log_factorial(hist.y()) - sum_log_factorial(data.y()) +
           log_gamma_marginal(cfg.poisson, post);
  }
  LinearSuffStats stats = LinearSuffStats::of(data.design(), data.y());
  check_linear_dims(cfg, static_cast<int>(stats.xtx.rows()));
  stats += scaled(historical_stats(hist, &data), a0);
  return log_normal_gamma_marginal(cfg.linear, stats);
}

PoissonGammaPrior npp_poisson_conditional(double a0, const Dataset& data,
                                          const HistoricalDataset& hist, const NppConfig& cfg) {
  check_a0(a0);
  return {cfg.poisson.shape + data.y().sum() + a0 * hist.y().sum(),
          cfg.poisson.rate + data.n() + a0 * hist.n0()};
}

LinearConditional npp_linear_conditional(double a0, const Dataset& data,
                                         const HistoricalDataset& hist, const NppConfig& cfg) {
  check_a0(a0);
  LinearSuffStats stats = LinearSuffStats::of(data.design(), data.y());
  check_linear_dims(cfg, static_cast<int>(stats.xtx.rows()));
  stats += scaled(historical_stats(hist, &data), a0);
  return normal_gamma_update(cfg.linear, stats);
}

A0Posterior npp_a0_posterior(const Dataset& data, const HistoricalDataset& hist,
                             const NppConfig& cfg) {
  validate(cfg);
  A0Posterior out;
  std::vector<double> logw;
  const auto& prior = cfg.a0_prior;
  if (prior.kind == A0Prior::Kind::fixed) {
    out.grid = {prior.p1};
    logw = {0.0};
  } else {
    const double upper = prior.kind == A0Prior::Kind::truncated_uniform ? prior.p1 : 1.0;
    const int G = cfg.grid_size;
    const double h = upper / G;
    for (int g = 0; g < G; ++g) {
      const double a0 = (g + 0.5) * h;
      double log_mass = 0.0;
      if (prior.kind == A0Prior::Kind::beta) {
        log_mass = log_beta_interval_mass(prior.p1, prior.p2, g * h, (g + 1) * h);
        if (!std::isfinite(log_mass)) continue;
      }
      out.grid.push_back(a0);
      logw.push_back(log_mass + npp_log_joint_marginal(a0, data, hist, cfg) -
                     npp_log_norm_const(a0, hist, cfg, &data));
    }
  }
  normalize_log_weights(logw);
  out.probs = std::move(logw);
  for (std::size_t g = 0; g < out.grid.size(); ++g) out.mean += out.grid[g] * out.probs[g];
  return out;
}

DrawsMatrix npp_posterior(const Dataset& data, const HistoricalDataset& hist,
                          const NppConfig& cfg, int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw validation_error("n_draws must be >= 1");
  const auto a0_post = npp_a0_posterior(data, hist, cfg);
  std::vector<double> log_probs(a0_post.probs.size());
  for (std::size_t g = 0; g < log_probs.size(); ++g) log_probs[g] = std::log(a0_post.probs[g]);

  std::vector<std::string> cols;
  const int p = cfg.model == ModelKind::poisson ? 0 : data.design_cols();
  if (cfg.model == ModelKind::poisson) {
    cols = {"theta[1]", "a0"};
  } else {
    for (int j = 1; j <= p; ++j) cols.push_back(indexed_name("beta", 1, j));
    cols.insert(cols.end(), {"tau[1]", "sigma[1]", "a0"});
  }
  DrawsMatrix draws(std::move(cols));
  draws.meta.seed = seed;

  // Conditionals are cached per grid point; they are reused across draws.
  std::vector<std::optional<LinearConditional>> cache(a0_post.grid.size());
  Rng rng(seed);
  std::vector<double> row;
  for (int t = 0; t < n_draws; ++t) {
    const auto g = static_cast<std::size_t>(categorical_from_log(rng, log_probs));
    const double a0 = a0_post.grid[g];
    row.clear();
    if (cfg.model == ModelKind::poisson) {
      const auto post = npp_poisson_conditional(a0, data, hist, cfg);
      row = {gamma_variate(rng, post.shape, post.rate), a0};
    } else {
      if (!cache[g]) cache[g] = npp_linear_conditional(a0, data, hist, cfg);
      const auto& c = *cache[g];
      const double tau = gamma_variate(rng, c.shape, c.rate);
      Eigen::VectorXd z(p);
      for (int j = 0; j < p; ++j) z(j) = standard_normal(rng);
      const Eigen::VectorXd beta =
          c.beta_tilde + c.chol_lower.transpose().triangularView<Eigen::Upper>().solve(z) /
                             std::sqrt(tau);
      row.assign(beta.data(), beta.data() + p);
      row.insert(row.end(), {tau, 1.0 / std::sqrt(tau), a0});
    }
    draws.add_row(row);
  }
  draws.meta.diagnostics.emplace_back("a0_posterior_mean", a0_post.mean);
  return draws;
}

// ------------------------------------------------------------ reference prior

void validate(const ReferencePriorConfig& cfg) {
  if (!(cfg.coef_sd > 0.0) || !(cfg.sigma_sd > 0.0))
    throw validation_error("reference prior scales must be > 0");
}

namespace {

struct ReferenceChain {
  DrawsMatrix draws;
  double acceptance = 0.0;
  double step = 0.0;
};

ReferenceChain reference_chain(const Dataset& data, const ReferencePriorConfig& cfg,
                               const ChainSettings& settings, std::vector<std::string> cols,
                               int chain_index) {
  const Eigen::MatrixXd X = data.design();
  const Eigen::VectorXd& y = data.y();
  const int n = data.n();
  const int p = static_cast<int>(X.cols());
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;
  const double prior_prec = 1.0 / (cfg.coef_sd * cfg.coef_sd);
  const double sigma_prec = 1.0 / (cfg.sigma_sd * cfg.sigma_sd);

  Rng rng(settings.seed);
  auto draw_beta = [&](double sigma) {
    const double w = 1.0 / (sigma * sigma);
    Eigen::MatrixXd P = w * xtx;
    P.diagonal().array() += prior_prec;
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success)
      throw numerical_error("reference posterior precision is not positive definite");
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z(j) = standard_normal(rng);
    const Eigen::VectorXd mean = llt.solve(w * xty);
    return Eigen::VectorXd(mean + llt.matrixU().solve(z));
  };
  auto log_target = [&](double s, double ssr) {
    const double v = std::exp(2.0 * s);
    return -n * s - 0.5 * ssr / v - 0.5 * v * sigma_prec + s;
  };

  double sigma = 1.0;
  if (n > p) {
    const Eigen::VectorXd ols = X.colPivHouseholderQr().solve(y);
    sigma = std::max(1e-3, std::sqrt((y - X * ols).squaredNorm() / (n - p)));
  }
  double log_step = std::log(0.5);
  int accepted = 0, proposed = 0, window_acc = 0, window = 0;

  ReferenceChain out{DrawsMatrix(std::move(cols)), 0.0, 0.0};
  out.draws.meta.seed = settings.seed;
  out.draws.meta.burn_in = settings.burn_in;
  out.draws.meta.thin = settings.thin;
  for (int t = 0; t < settings.iterations; ++t) {
    const Eigen::VectorXd beta = draw_beta(sigma);
    const double ssr = (y - X * beta).squaredNorm();
    const double s = std::log(sigma);
    const double prop = s + std::exp(log_step) * standard_normal(rng);
    const bool accept = std::log(uniform01(rng)) < log_target(prop, ssr) - log_target(s, ssr);
    if (accept) sigma = std::exp(prop);
    if (t < settings.burn_in) {
      window_acc += accept;
      if (++window == 50) {
        log_step += (window_acc / 50.0 - 0.44);
        window = window_acc = 0;
      }
      continue;
    }
    ++proposed;
    accepted += accept;
    if ((t - settings.burn_in) % settings.thin == 0) {
      std::vector<double> row(beta.data(), beta.data() + p);
      row.insert(row.end(), {sigma, 1.0 / (sigma * sigma)});
      out.draws.add_row(row, chain_index);
    }
  }
  out.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  out.step = std::exp(log_step);
  return out;
}

}  // namespace

DrawsMatrix reference_posterior(const Dataset& data, const ReferencePriorConfig& cfg,
                                const ChainSettings& settings, int chains, int workers) {
  validate(cfg);
  if (data.design_cols() < 1) throw validation_error("reference posterior needs a design matrix");
  if (settings.iterations < 1 || settings.burn_in < 0 || settings.thin < 1)
    throw validation_error("invalid sampler settings");
  if (chains < 1) throw validation_error("chains must be >= 1");
  std::vector<std::string> cols;
  for (int j = 1; j <= data.design_cols(); ++j) cols.push_back(indexed_name("beta", 1, j));
  cols.insert(cols.end(), {"sigma[1]", "tau[1]"});

  std::vector<ReferenceChain> parts(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto run_one = [&](int c) {
    try {
      ChainSettings s = settings;
      s.seed = derive_seed(settings.seed, static_cast<std::uint64_t>(c));
      parts[static_cast<std::size_t>(c)] = reference_chain(data, cfg, s, cols, c);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  workers = std::clamp(workers, 1, chains);
  if (workers == 1) {
    for (int c = 0; c < chains; ++c) run_one(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int c = w; c < chains; c += workers) run_one(c);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  DrawsMatrix merged = std::move(parts[0].draws);
  for (int c = 1; c < chains; ++c) merged.append(parts[static_cast<std::size_t>(c)].draws);
  merged.meta.seed = settings.seed;
  merged.meta.chains = chains;
  merged.meta.no_retained_draws = merged.empty();
  for (int c = 0; c < chains; ++c) {
    const auto& part = parts[static_cast<std::size_t>(c)];
    merged.meta.diagnostics.emplace_back("acceptance_rate[" + std::to_string(c + 1) + "]",
                                         part.acceptance);
    if (settings.burn_in > 0 && (part.acceptance < 0.15 || part.acceptance > 0.75)) {
      std::ostringstream os;
      os << "chain " << c + 1 << ": sigma step did not adapt (acceptance " << part.acceptance
         << ", step " << part.step << ")";
      merged.meta.warnings.push_back(os.str());
    }
  }
  return merged;
}

}  // namespace leap
