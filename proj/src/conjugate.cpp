#include "leap/conjugate.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"
#include "leap/ptd.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <sstream>

namespace leap {

PoissonGammaPrior poisson_component_posterior(const PoissonGammaPrior& prior,
                                              double count_sum, double n_obs) {
  return {prior.shape + count_sum, prior.rate + n_obs};
}

double log_allocation_weight(const std::vector<int>& counts, const LeapConfig& cfg) {
  PtdParams params{cfg.alpha, cfg.trunc_a, cfg.trunc_b};
  return ptd_log_norm_const(ptd_posterior_update(params, counts));
}

double poisson_log_partition_weight(const PartitionAssignment& c0,
                                    const Dataset* data,
                                    const HistoricalDataset& hist,
                                    const LeapConfig& cfg) {
  const int K = cfg.K;
  if (c0.size() != hist.n0())
    throw validation_error("partition length does not match n0");
  const auto counts = class_counts(c0, K);
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  for (int i = 0; i < c0.size(); ++i)
    sums[static_cast<std::size_t>(c0[i] - 1)] += hist.y()(i);

  double lw = log_allocation_weight(counts, cfg);
  for (int k = 0; k < K; ++k) {
    double s = sums[static_cast<std::size_t>(k)];
    double n = counts[static_cast<std::size_t>(k)];
    if (k == 0 && data) {
      s += data->y().sum();
      n += data->n();
    }
    const auto post = poisson_component_posterior(cfg.poisson[static_cast<std::size_t>(k)], s, n);
    lw += boost::math::lgamma(post.shape) - post.shape * std::log(post.rate);
  }
  return lw;
}

LinearSuffStats LinearSuffStats::zero(int p) {
  LinearSuffStats s;
  s.xtx = Eigen::MatrixXd::Zero(p, p);
  s.xty = Eigen::VectorXd::Zero(p);
  return s;
}

LinearSuffStats LinearSuffStats::of(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  LinearSuffStats s;
  s.xtx = X.transpose() * X;
  s.xty = X.transpose() * y;
  s.yty = y.squaredNorm();
  s.n = static_cast<double>(y.size());
  return s;
}

void LinearSuffStats::add(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) {
  xtx.noalias() += x.transpose() * x;
  xty.noalias() += y * x.transpose();
  yty += y * y;
  n += 1.0;
}

LinearSuffStats& LinearSuffStats::operator+=(const LinearSuffStats& other) {
  xtx += other.xtx;
  xty += other.xty;
  yty += other.yty;
  n += other.n;
  return *this;
}

std::vector<LinearSuffStats> class_stats(const PartitionAssignment& c0, int K,
                                         const Eigen::MatrixXd& X0,
                                         const Eigen::VectorXd& y0) {
  const int p = static_cast<int>(X0.cols());
  std::vector<LinearSuffStats> out(static_cast<std::size_t>(K), LinearSuffStats::zero(p));
  for (int i = 0; i < c0.size(); ++i) {
    const int label = c0[i];
    if (label < 1 || label > K)
      throw validation_error("partition label out of range");
    out[static_cast<std::size_t>(label - 1)].add(X0.row(i), y0(i));
  }
  return out;
}

LinearConditional normal_gamma_update(const NormalGammaPrior& prior,
                                      const LinearSuffStats& stats) {
  const int p = prior.dim();
  if (stats.xtx.rows() != p)
    throw validation_error("prior dimension does not match the design");
  LinearConditional out;
  out.precision_scale = prior.precision + stats.xtx;
  Eigen::LLT<Eigen::MatrixXd> llt(out.precision_scale);
  const double floor = 1e-12 * out.precision_scale.trace() / p;
  if (llt.info() != Eigen::Success) {
    throw numerical_error("conditional precision is not positive definite "
                          "(Cholesky failed; trace = " +
                          std::to_string(out.precision_scale.trace()) + ")");
  }
  out.chol_lower = llt.matrixL();
  const Eigen::VectorXd pivots = out.chol_lower.diagonal().array().square();
  if (pivots.minCoeff() < floor) {
    std::ostringstream os;
    os << "conditional precision is numerically singular: smallest pivot "
       << pivots.minCoeff() << " below 1e-12 * trace / p = " << floor;
    throw numerical_error(os.str());
  }
  out.log_det_precision = 2.0 * out.chol_lower.diagonal().array().log().sum();
  const Eigen::VectorXd rhs = prior.precision * prior.mean + stats.xty;
  out.beta_tilde = llt.solve(rhs);

  const Eigen::VectorXd& bt = out.beta_tilde;
  const double ssr = std::max(
      0.0, stats.yty - 2.0 * bt.dot(stats.xty) + bt.dot(stats.xtx * bt));
  const Eigen::VectorXd dev = bt - prior.mean;
  const double prior_quad = std::max(0.0, dev.dot(prior.precision * dev));
  out.shape = 0.5 * (stats.n + prior.delta);
  out.rate = 0.5 * (prior.xi + ssr + prior_quad);
  if (!(out.rate > 0.0) || !(out.shape > 0.0))
    throw numerical_error("normal-gamma update produced a nonpositive shape or rate");
  return out;
}

LinearConditional linear_component_conditional(const PartitionAssignment& c0, int k,
                                               const HistoricalDataset& hist,
                                               const NormalGammaPrior& prior,
                                               const Dataset* current) {
  if (c0.size() != hist.n0())
    throw validation_error("partition length does not match n0");
  const Eigen::MatrixXd X0 = hist.design_like(current);
  LinearSuffStats stats = LinearSuffStats::zero(static_cast<int>(X0.cols()));
  for (int i = 0; i < c0.size(); ++i)
    if (c0[i] == k) stats.add(X0.row(i), hist.y()(i));
  return normal_gamma_update(prior, stats);
}

LinearConditional linear_first_component_conditional(const PartitionAssignment& c0,
                                                     const Dataset& data,
                                                     const HistoricalDataset& hist,
                                                     const NormalGammaPrior& prior) {
  if (c0.size() != hist.n0())
    throw validation_error("partition length does not match n0");
  const Eigen::MatrixXd X0 = hist.design_like(&data);
  LinearSuffStats stats = LinearSuffStats::of(data.design(), data.y());
  for (int i = 0; i < c0.size(); ++i)
    if (c0[i] == 1) stats.add(X0.row(i), hist.y()(i));
  return normal_gamma_update(prior, stats);
}

double linear_log_partition_weight(const std::vector<LinearSuffStats>& classes,
                                   const LinearSuffStats* current,
                                   const LeapConfig& cfg) {
  const int K = cfg.K;
  std::vector<int> counts(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    counts[static_cast<std::size_t>(k)] =
        static_cast<int>(classes[static_cast<std::size_t>(k)].n);
  double lw = log_allocation_weight(counts, cfg);
  for (int k = 0; k < K; ++k) {
    LinearSuffStats stats = classes[static_cast<std::size_t>(k)];
    if (k == 0 && current) stats += *current;
    const auto cond = normal_gamma_update(cfg.linear[static_cast<std::size_t>(k)], stats);
    lw += boost::math::lgamma(cond.shape) - cond.shape * std::log(cond.rate) -
          0.5 * cond.log_det_precision;
  }
  return lw;
}

double linear_log_partition_weight(const PartitionAssignment& c0, const Dataset* data,
                                   const HistoricalDataset& hist,
                                   const LeapConfig& cfg) {
  if (c0.size() != hist.n0())
    throw validation_error("partition length does not match n0");
  const auto classes = class_stats(c0, cfg.K, hist.design_like(data), hist.y());
  if (data == nullptr) return linear_log_partition_weight(classes, nullptr, cfg);
  const auto current = LinearSuffStats::of(data->design(), data->y());
  return linear_log_partition_weight(classes, &current, cfg);
}

double log_partition_weight(const PartitionAssignment& c0, const Dataset* data,
                            const HistoricalDataset& hist, const LeapConfig& cfg) {
  return cfg.model == ModelKind::poisson
             ? poisson_log_partition_weight(c0, data, hist, cfg)
             : linear_log_partition_weight(c0, data, hist, cfg);
}

}  // namespace leap
