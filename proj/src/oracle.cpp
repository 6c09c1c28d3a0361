#include "leap/oracle.hpp"

#include "leap/conjugate.hpp"
#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace leap {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-partition log weights and conditional means of the shared parameter.
class PartitionEvaluator {
 public:
  PartitionEvaluator(const Dataset* data, const HistoricalDataset& hist,
                     const LeapConfig& cfg, const Dataset* layout)
      : data_(data), hist_(hist), cfg_(cfg) {
    if (cfg.model == ModelKind::normal_linear) {
      X0_ = hist.design_like(data ? data : layout);
      if (data) current_ = LinearSuffStats::of(data->design(), data->y());
      prior_defined_ = cfg.linear.at(0).is_proper();
    }
  }

  /// False for the flat-beta first-component limit, whose prior partition
  /// pmf does not exist.
  bool prior_defined() const { return prior_defined_; }

  int mean_dim() const {
    return cfg_.model == ModelKind::poisson ? 1 : static_cast<int>(X0_.cols()) + 1;
  }

  struct Result {
    double log_prior = kNegInf;
    double log_post = kNegInf;
    Eigen::VectorXd prior_mean;
    Eigen::VectorXd post_mean;
    int n01 = 0;
  };

  Result operator()(const PartitionAssignment& c0) const {
    Result r;
    const auto counts = class_counts(c0, cfg_.K);
    r.n01 = counts[0];
    if (cfg_.model == ModelKind::poisson) {
      r.log_prior = poisson_log_partition_weight(c0, nullptr, hist_, cfg_);
      double s = 0.0;
      for (int i = 0; i < c0.size(); ++i)
        if (c0[i] == 1) s += hist_.y()(i);
      const auto pri = poisson_component_posterior(cfg_.poisson[0], s, counts[0]);
      r.prior_mean = Eigen::VectorXd::Constant(1, pri.mean());
      if (data_) {
        r.log_post = poisson_log_partition_weight(c0, data_, hist_, cfg_);
        const auto post = poisson_component_posterior(pri, data_->y().sum(), data_->n());
        r.post_mean = Eigen::VectorXd::Constant(1, post.mean());
      }
      return r;
    }
    const auto classes = class_stats(c0, cfg_.K, X0_, hist_.y());
    if (prior_defined_) {
      r.log_prior = linear_log_partition_weight(classes, nullptr, cfg_);
      r.prior_mean = stacked(normal_gamma_update(cfg_.linear[0], classes[0]));
    } else {
      r.prior_mean = Eigen::VectorXd::Constant(mean_dim(), std::nan(""));
    }
    if (data_) {
      r.log_post = linear_log_partition_weight(classes, &current_, cfg_);
      LinearSuffStats first = classes[0];
      first += current_;
      r.post_mean = stacked(normal_gamma_update(cfg_.linear[0], first));
    }
    return r;
  }

 private:
  static Eigen::VectorXd stacked(const LinearConditional& c) {
    Eigen::VectorXd v(c.beta_tilde.size() + 1);
    v.head(c.beta_tilde.size()) = c.beta_tilde;
    v(c.beta_tilde.size()) = c.shape / c.rate;
    return v;
  }

  const Dataset* data_;
  const HistoricalDataset& hist_;
  const LeapConfig& cfg_;
  Eigen::MatrixXd X0_;
  LinearSuffStats current_;
  bool prior_defined_ = true;
};

/// Running log-sum-exp of weights with weighted sums of a mean vector and
/// of the n01 indicator.
struct Accumulator {
  double max = kNegInf;
  double sum = 0.0;
  Eigen::VectorXd weighted_mean;
  std::vector<double> ssc;

  Accumulator(int dim, int n0)
      : weighted_mean(Eigen::VectorXd::Zero(dim)), ssc(static_cast<std::size_t>(n0 + 1), 0.0) {}

  void rescale(double new_max) {
    const double f = std::isfinite(max) ? std::exp(max - new_max) : 0.0;
    sum *= f;
    weighted_mean *= f;
    for (double& v : ssc) v *= f;
    max = new_max;
  }

  void add(double lw, const Eigen::VectorXd& mean, int n01) {
    if (!std::isfinite(lw)) return;
    if (lw > max) rescale(lw);
    const double w = std::exp(lw - max);
    sum += w;
    weighted_mean += w * mean;
    ssc[static_cast<std::size_t>(n01)] += w;
  }

  void merge(const Accumulator& other) {
    if (!std::isfinite(other.max)) return;
    if (other.max > max) rescale(other.max);
    const double f = std::exp(other.max - max);
    sum += f * other.sum;
    weighted_mean += f * other.weighted_mean;
    for (std::size_t k = 0; k < ssc.size(); ++k) ssc[k] += f * other.ssc[k];
  }

  double log_norm() const { return max + std::log(sum); }
};

void require_enumerable(const HistoricalDataset& hist, const LeapConfig& cfg,
                        const Dataset* data) {
  require_valid(cfg, data, hist);
}

}  // namespace

std::uint64_t partition_count(int K, int n0, std::uint64_t cap) {
  if (K < 1 || n0 < 0) throw validation_error("partition count needs K >= 1, n0 >= 0");
  std::uint64_t total = 1;
  for (int i = 0; i < n0; ++i) {
    if (total > cap / static_cast<std::uint64_t>(K))
      throw validation_error("enumeration of " + std::to_string(K) + "^" +
                             std::to_string(n0) + " partitions exceeds the cap of " +
                             std::to_string(cap) + " partitions");
    total *= static_cast<std::uint64_t>(K);
  }
  if (total > cap)
    throw validation_error("enumeration exceeds the cap of " + std::to_string(cap) +
                           " partitions");
  return total;
}

PartitionAssignment partition_at(std::uint64_t index, int K, int n0) {
  std::vector<int> labels(static_cast<std::size_t>(n0));
  for (int i = n0 - 1; i >= 0; --i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(K)) + 1;
    index /= static_cast<std::uint64_t>(K);
  }
  return PartitionAssignment(std::move(labels));
}

std::vector<PartitionAssignment> enumerate_partitions(int K, int n0, std::uint64_t cap) {
  const auto total = partition_count(K, n0, cap);
  std::vector<PartitionAssignment> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::uint64_t l = 0; l < total; ++l) out.push_back(partition_at(l, K, n0));
  return out;
}

namespace {

PartitionTable build_table(const Dataset* data, const HistoricalDataset& hist,
                           const LeapConfig& cfg, const Dataset* layout,
                           std::uint64_t cap, std::size_t max_rows) {
  require_enumerable(hist, cfg, data);
  const auto total = partition_count(cfg.K, hist.n0(), cap);
  if (total > max_rows)
    throw validation_error("partition table with " + std::to_string(total) +
                           " rows exceeds the materialization limit of " +
                           std::to_string(max_rows) + " rows");
  const PartitionEvaluator eval(data, hist, cfg, layout);
  PartitionTable table;
  table.has_posterior = data != nullptr;
  table.n0 = hist.n0();
  table.K = cfg.K;
  std::vector<double> lp, lq;
  for (std::uint64_t l = 0; l < total; ++l) {
    PartitionRow row;
    row.c0 = partition_at(l, cfg.K, hist.n0());
    auto r = eval(row.c0);
    lp.push_back(r.log_prior);
    lq.push_back(r.log_post);
    row.cond_prior_mean = std::move(r.prior_mean);
    row.cond_post_mean = std::move(r.post_mean);
    table.rows.push_back(std::move(row));
  }
  table.has_prior = eval.prior_defined();
  if (table.has_prior) {
    normalize_log_weights(lp);
  } else {
    std::fill(lp.begin(), lp.end(), std::nan(""));
  }
  if (data) normalize_log_weights(lq);
  for (std::size_t l = 0; l < table.rows.size(); ++l) {
    table.rows[l].prior_prob = lp[l];
    table.rows[l].posterior_prob = data ? lq[l] : 0.0;
  }
  return table;
}

}  // namespace

PartitionTable prior_partition_table(const HistoricalDataset& hist, const LeapConfig& cfg,
                                     const Dataset* layout, std::uint64_t cap,
                                     std::size_t max_rows) {
  return build_table(nullptr, hist, cfg, layout, cap, max_rows);
}

PartitionTable posterior_partition_table(const Dataset& data, const HistoricalDataset& hist,
                                         const LeapConfig& cfg, std::uint64_t cap,
                                         std::size_t max_rows) {
  return build_table(&data, hist, cfg, &data, cap, max_rows);
}

Eigen::VectorXd partition_averaged_mean(const PartitionTable& table, Which which) {
  if (table.rows.empty()) throw validation_error("empty partition table");
  if (which == Which::posterior && !table.has_posterior)
    throw validation_error("partition table has no posterior columns");
  if (which == Which::prior && !table.has_prior)
    throw validation_error("prior partition pmf is undefined for an improper first component");
  const bool post = which == Which::posterior;
  Eigen::VectorXd m =
      Eigen::VectorXd::Zero((post ? table.rows[0].cond_post_mean : table.rows[0].cond_prior_mean).size());
  for (const auto& row : table.rows)
    m += post ? row.posterior_prob * row.cond_post_mean : row.prior_prob * row.cond_prior_mean;
  return m;
}

SscPmf ssc_marginal_from_table(const PartitionTable& table, Which which) {
  if (which == Which::posterior && !table.has_posterior)
    throw validation_error("partition table has no posterior columns");
  if (which == Which::prior && !table.has_prior)
    throw validation_error("prior partition pmf is undefined for an improper first component");
  SscPmf pmf{std::vector<double>(static_cast<std::size_t>(table.n0 + 1), 0.0)};
  for (const auto& row : table.rows) {
    int n01 = 0;
    for (int c : row.c0.labels()) n01 += c == 1;
    pmf.probs[static_cast<std::size_t>(n01)] +=
        which == Which::posterior ? row.posterior_prob : row.prior_prob;
  }
  return pmf;
}

PartitionSummary partition_summary(const Dataset* data, const HistoricalDataset& hist,
                                   const LeapConfig& cfg, int workers, std::uint64_t cap) {
  require_enumerable(hist, cfg, data);
  const std::uint64_t total = partition_count(cfg.K, hist.n0(), cap);
  const PartitionEvaluator eval(data, hist, cfg, data);
  const int dim = eval.mean_dim();
  const int n0 = hist.n0();

  const std::uint64_t blocks = std::min<std::uint64_t>(total, 256);
  std::vector<Accumulator> prior_acc(static_cast<std::size_t>(blocks), Accumulator(dim, n0));
  std::vector<Accumulator> post_acc(static_cast<std::size_t>(blocks), Accumulator(dim, n0));
  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t lo = b * total / blocks, hi = (b + 1) * total / blocks;
    for (std::uint64_t l = lo; l < hi; ++l) {
      const auto r = eval(partition_at(l, cfg.K, n0));
      prior_acc[static_cast<std::size_t>(b)].add(r.log_prior, r.prior_mean, r.n01);
      if (data) post_acc[static_cast<std::size_t>(b)].add(r.log_post, r.post_mean, r.n01);
    }
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t b = static_cast<std::uint64_t>(w); b < blocks;
               b += static_cast<std::uint64_t>(workers))
            run_block(b);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  auto finish = [&](std::vector<Accumulator>& accs, double& log_norm,
                    Eigen::VectorXd& mean, SscPmf& ssc) {
    Accumulator all(dim, n0);
    for (const auto& a : accs) all.merge(a);
    if (!(all.sum > 0.0)) throw numerical_error("all partition weights vanished");
    log_norm = all.log_norm();
    mean = all.weighted_mean / all.sum;
    ssc.probs = all.ssc;
    for (double& v : ssc.probs) v /= all.sum;
  };
  PartitionSummary out;
  out.partitions = total;
  out.has_posterior = data != nullptr;
  out.has_prior = eval.prior_defined();
  if (out.has_prior) finish(prior_acc, out.log_norm_prior, out.prior_mean, out.prior_ssc);
  if (data) finish(post_acc, out.log_norm_posterior, out.posterior_mean, out.posterior_ssc);
  return out;
}

}  // namespace leap
