#include "leap/gibbs.hpp"

#include "leap/error.hpp"
#include "leap/ptd.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace leap {

LeapSampler::LeapSampler(const Dataset* data, const HistoricalDataset& hist,
                         const LeapConfig& cfg)
    : data_(data), hist_(hist), cfg_(cfg) {
  require_valid(cfg, data, hist);
  if (cfg.model == ModelKind::normal_linear) {
    X0_ = hist.design_like(data);
    p_ = static_cast<int>(X0_.cols());
    current_ = data ? LinearSuffStats::of(data->design(), data->y())
                    : LinearSuffStats::zero(p_);
  } else if (data) {
    current_sum_ = data->y().sum();
    current_n_ = data->n();
  }
}

void LeapSampler::draw_theta(GibbsState& state, Rng& rng) const {
  const int K = cfg_.K;
  if (cfg_.model == ModelKind::poisson) {
    std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
    std::vector<double> ns(static_cast<std::size_t>(K), 0.0);
    for (int i = 0; i < hist_.n0(); ++i) {
      const auto k = static_cast<std::size_t>(state.c0[i] - 1);
      sums[k] += hist_.y()(i);
      ns[k] += 1.0;
    }
    // The current data always enter component 1.
    sums[0] += current_sum_;
    ns[0] += current_n_;
    state.rate.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const auto post = poisson_component_posterior(cfg_.poisson[kk], sums[kk], ns[kk]);
      state.rate[kk] = gamma_variate(rng, post.shape, post.rate);
    }
    return;
  }
  auto stats = class_stats(state.c0, K, X0_, hist_.y());
  stats[0] += current_;
  state.beta.resize(static_cast<std::size_t>(K));
  state.tau.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto cond = normal_gamma_update(cfg_.linear[kk], stats[kk]);
    const double tau = gamma_variate(rng, cond.shape, cond.rate);
    Eigen::VectorXd z(p_);
    for (int j = 0; j < p_; ++j) z(j) = standard_normal(rng);
    // beta = beta_tilde + L'^{-1} z / sqrt(tau), covariance (tau L L')^{-1}.
    const Eigen::VectorXd dev =
        cond.chol_lower.transpose().triangularView<Eigen::Upper>().solve(z);
    state.beta[kk] = cond.beta_tilde + dev / std::sqrt(tau);
    state.tau[kk] = tau;
  }
}

void LeapSampler::draw_gamma(GibbsState& state, Rng& rng) const {
  const auto counts = class_counts(state.c0, cfg_.K);
  const PtdParams prior{cfg_.alpha, cfg_.trunc_a, cfg_.trunc_b};
  state.gamma = ptd_sample(ptd_posterior_update(prior, counts), rng);
}

void LeapSampler::draw_labels(GibbsState& state, Rng& rng) const {
  const int K = cfg_.K;
  if (K == 1) return;
  std::vector<double> log_gamma(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    log_gamma[static_cast<std::size_t>(k)] = std::log(state.gamma[static_cast<std::size_t>(k)]);
  std::vector<double> logw(static_cast<std::size_t>(K));
  if (cfg_.model == ModelKind::poisson) {
    std::vector<double> log_rate(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      log_rate[static_cast<std::size_t>(k)] = std::log(state.rate[static_cast<std::size_t>(k)]);
    for (int i = 0; i < hist_.n0(); ++i) {
      const double y = hist_.y()(i);
      for (int k = 0; k < K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        logw[kk] = log_gamma[kk] + y * log_rate[kk] - state.rate[kk];
      }
      state.c0[i] = categorical_from_log(rng, logw) + 1;
    }
    return;
  }
  std::vector<double> half_log_tau(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    half_log_tau[static_cast<std::size_t>(k)] = 0.5 * std::log(state.tau[static_cast<std::size_t>(k)]);
  for (int i = 0; i < hist_.n0(); ++i) {
    const double y = hist_.y()(i);
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double r = y - X0_.row(i).dot(state.beta[kk]);
      logw[kk] = log_gamma[kk] + half_log_tau[kk] - 0.5 * state.tau[kk] * r * r;
    }
    state.c0[i] = categorical_from_log(rng, logw) + 1;
  }
}

GibbsState LeapSampler::initialize(Rng& rng) const {
  GibbsState state;
  const int K = cfg_.K;
  std::vector<int> labels(static_cast<std::size_t>(hist_.n0()), 1);
  if (K > 1)
    for (auto& c : labels)
      c = 1 + std::min(K - 1, static_cast<int>(uniform01(rng) * K));
  state.c0 = PartitionAssignment(std::move(labels));
  state.gamma = ptd_sample(PtdParams{cfg_.alpha, cfg_.trunc_a, cfg_.trunc_b}, rng);
  draw_theta(state, rng);
  return state;
}

GibbsState LeapSampler::step(const GibbsState& state, Rng& rng) const {
  GibbsState next = state;
  draw_theta(next, rng);   // steps 1 and 2
  draw_gamma(next, rng);   // step 3, counts from the previous labels
  draw_labels(next, rng);  // step 4
  return next;
}

std::vector<std::string> LeapSampler::columns() const {
  std::vector<std::string> cols;
  const int K = cfg_.K;
  if (cfg_.model == ModelKind::poisson) {
    for (int k = 1; k <= K; ++k) cols.push_back(indexed_name("theta", k));
  } else {
    for (int k = 1; k <= K; ++k)
      for (int j = 1; j <= p_; ++j) cols.push_back(indexed_name("beta", k, j));
    for (int k = 1; k <= K; ++k) cols.push_back(indexed_name("tau", k));
  }
  for (int k = 1; k <= K; ++k) cols.push_back(indexed_name("gamma", k));
  for (int k = 1; k <= K; ++k) cols.push_back(indexed_name("n0", k));
  return cols;
}

std::vector<double> LeapSampler::row(const GibbsState& state) const {
  std::vector<double> out;
  if (cfg_.model == ModelKind::poisson) {
    out = state.rate;
  } else {
    for (const auto& b : state.beta) out.insert(out.end(), b.data(), b.data() + b.size());
    out.insert(out.end(), state.tau.begin(), state.tau.end());
  }
  out.insert(out.end(), state.gamma.begin(), state.gamma.end());
  for (int c : class_counts(state.c0, cfg_.K)) out.push_back(c);
  return out;
}

GibbsState initialize_state(const Dataset* data, const HistoricalDataset& hist,
                            const LeapConfig& cfg, Rng& rng) {
  return LeapSampler(data, hist, cfg).initialize(rng);
}

GibbsState gibbs_step(const GibbsState& state, const Dataset* data,
                      const HistoricalDataset& hist, const LeapConfig& cfg, Rng& rng) {
  return LeapSampler(data, hist, cfg).step(state, rng);
}

DrawsMatrix run_chain(const Dataset* data, const HistoricalDataset& hist,
                      const LeapConfig& cfg, const ChainSettings& settings,
                      int chain_index) {
  if (settings.iterations < 1) throw validation_error("iterations must be >= 1");
  if (settings.burn_in < 0 || settings.thin < 1)
    throw validation_error("burn-in must be >= 0 and thin >= 1");
  const LeapSampler sampler(data, hist, cfg);
  DrawsMatrix draws(sampler.columns());
  draws.meta.seed = settings.seed;
  draws.meta.burn_in = settings.burn_in;
  draws.meta.thin = settings.thin;

  Rng rng(settings.seed);
  GibbsState state = sampler.initialize(rng);
  for (int t = 0; t < settings.iterations; ++t) {
    try {
      state = sampler.step(state, rng);
    } catch (const Error& e) {
      throw Error(e.kind(), "iteration " + std::to_string(t) + ": " + e.what());
    }
    if (t >= settings.burn_in && (t - settings.burn_in) % settings.thin == 0) {
      draws.add_row(sampler.row(state), chain_index);
      if (settings.keep_partitions) draws.add_partition(state.c0);
    }
  }
  draws.meta.no_retained_draws = draws.empty();
  return draws;
}

DrawsMatrix run_chains(const Dataset* data, const HistoricalDataset& hist,
                       const LeapConfig& cfg, const ChainSettings& settings,
                       int chains, int workers) {
  if (chains < 1) throw validation_error("chains must be >= 1");
  std::vector<DrawsMatrix> parts(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto run_one = [&](int c) {
    try {
      ChainSettings s = settings;
      s.seed = derive_seed(settings.seed, static_cast<std::uint64_t>(c));
      parts[static_cast<std::size_t>(c)] = run_chain(data, hist, cfg, s, c);
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

  DrawsMatrix merged = std::move(parts[0]);
  for (int c = 1; c < chains; ++c) merged.append(parts[static_cast<std::size_t>(c)]);
  merged.meta.seed = settings.seed;
  merged.meta.chains = chains;
  merged.meta.no_retained_draws = merged.empty();
  return merged;
}

}  // namespace leap
