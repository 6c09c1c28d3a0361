#include "leap/diagnostics.hpp"

#include "leap/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace leap {

const ParameterSummary& PosteriorSummary::at(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw validation_error("no parameter named '" + std::string(name) + "'");
}

double quantile(std::vector<double> x, double prob) {
  if (x.empty()) throw validation_error("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double autocov(std::span<const double> x, double mean, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) s += (x[i] - mean) * (x[i + lag] - mean);
  return s / static_cast<double>(x.size());
}

}  // namespace

double effective_sample_size(std::span<const double> x) {
  const auto n = x.size();
  if (n == 0) throw validation_error("ESS of an empty sequence");
  if (n < 4) return static_cast<double>(n);
  const double m = mean_of(x);
  const double c0 = autocov(x, m, 0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocov(x, m, 2 * k) + autocov(x, m, 2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / std::max(tau, 1e-12);
  return std::clamp(ess, 1e-12, static_cast<double>(n));
}

double batch_means_se(std::span<const double> x, int batches) {
  if (batches < 2) throw validation_error("need at least 2 batches");
  const std::size_t size = x.size() / static_cast<std::size_t>(batches);
  if (size < 1) throw validation_error("too few draws for the requested batches");
  std::vector<double> means(static_cast<std::size_t>(batches));
  for (std::size_t b = 0; b < means.size(); ++b)
    means[b] = mean_of(x.subspan(b * size, size));
  const double grand = mean_of(means);
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  return std::sqrt(ss / (batches - 1) / batches);
}

PosteriorSummary summarize(const DrawsMatrix& draws, double ci_mass) {
  if (draws.empty()) throw validation_error("cannot summarize an empty draws matrix");
  if (!(ci_mass > 0.0 && ci_mass < 1.0)) throw validation_error("ci mass must lie in (0, 1)");
  PosteriorSummary out;
  const int n = draws.rows();
  for (int j = 0; j < draws.cols(); ++j) {
    const auto col = draws.column(j);
    ParameterSummary s;
    s.name = draws.columns()[static_cast<std::size_t>(j)];
    s.mean = mean_of(col);
    double ss = 0.0;
    for (double v : col) ss += (v - s.mean) * (v - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    s.ci_low = quantile(col, 0.5 * (1.0 - ci_mass));
    s.ci_high = quantile(col, 0.5 * (1.0 + ci_mass));

    // Chains are stored contiguously, so ESS is summed over runs of equal chain index.
    double ess = 0.0;
    int start = 0;
    for (int r = 1; r <= n; ++r) {
      if (r == n || draws.chain_of(r) != draws.chain_of(start)) {
        ess += effective_sample_size(std::span<const double>(col).subspan(
            static_cast<std::size_t>(start), static_cast<std::size_t>(r - start)));
        start = r;
      }
    }
    s.ess = std::clamp(ess, 1e-12, static_cast<double>(n));
    s.mcse = s.sd / std::sqrt(s.ess);
    out.parameters.push_back(std::move(s));
  }
  return out;
}

double current_deviance(const Dataset& data, ModelKind kind, std::span<const double> theta) {
  const auto& y = data.y();
  if (kind == ModelKind::poisson) {
    const double t = theta[0];
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      ll += y(i) * std::log(t) - t - boost::math::lgamma(y(i) + 1.0);
    return -2.0 * ll;
  }
  const Eigen::MatrixXd X = data.design();
  const auto p = X.cols();
  if (static_cast<Eigen::Index>(theta.size()) != p + 1)
    throw validation_error("linear deviance needs beta and tau");
  const Eigen::Map<const Eigen::VectorXd> beta(theta.data(), p);
  const double tau = theta[static_cast<std::size_t>(p)];
  const double ssr = (y - X * beta).squaredNorm();
  const double n = static_cast<double>(y.size());
  return -(n * std::log(tau) - n * std::log(2.0 * std::numbers::pi) - tau * ssr);
}

DicResult dic(const DrawsMatrix& draws, const Dataset& data, ModelKind kind) {
  if (draws.empty()) throw validation_error("cannot compute DIC from empty draws");
  std::vector<int> idx;
  bool log_last = false;
  if (kind == ModelKind::poisson) {
    idx.push_back(draws.index_of("theta[1]"));
  } else {
    for (int j = 1; j <= data.design_cols(); ++j)
      idx.push_back(draws.index_of(indexed_name("beta", 1, j)));
    idx.push_back(draws.index_of("tau[1]"));
    log_last = true;
  }
  const int n = draws.rows();
  std::vector<double> theta(idx.size()), bar(idx.size(), 0.0);
  double mean_dev = 0.0;
  for (int r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      theta[j] = draws.at(r, idx[j]);
      bar[j] += (log_last && j + 1 == idx.size()) ? std::log(theta[j]) : theta[j];
    }
    mean_dev += current_deviance(data, kind, theta);
  }
  for (double& v : bar) v /= n;
  if (log_last) bar.back() = std::exp(bar.back());
  DicResult out;
  out.mean_deviance = mean_dev / n;
  out.deviance_at_mean = current_deviance(data, kind, bar);
  out.pd = out.mean_deviance - out.deviance_at_mean;
  out.dic = out.mean_deviance + out.pd;
  return out;
}

SimMetrics sim_metrics(std::span<const ReplicationEstimate> reps, double truth) {
  if (reps.empty()) throw validation_error("need at least one replication");
  if (truth == 0.0) throw validation_error("percent absolute bias needs a nonzero truth");
  SimMetrics m;
  for (const auto& r : reps) {
    const double err = r.mean - truth;
    m.pab += std::abs(err / truth);
    m.mse += err * err;
    m.coverage += (r.ci_low <= truth && truth <= r.ci_high) ? 1.0 : 0.0;
  }
  const double k = static_cast<double>(reps.size());
  m.pab /= k;
  m.mse /= k;
  m.coverage /= k;
  return m;
}

}  // namespace leap
