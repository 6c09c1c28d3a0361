#include "leap/ptd.hpp"

#include "leap/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace leap {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinLogMass = -690.7755;  // log(1e-300)

std::vector<double> tail(const std::vector<double>& alpha) {
  return {alpha.begin() + 1, alpha.end()};
}

double log_truncated_beta_fn(double a1, double a0, double a, double b) {
  const double lm = log_beta_interval_mass(a1, a0, a, b);
  if (!(lm > kMinLogMass))
    throw numerical_error("degenerate truncation: truncated beta mass below 1e-300");
  return log_beta(a1, a0) + lm;
}

}  // namespace

double PtdParams::tail_alpha() const {
  return std::accumulate(alpha.begin() + (alpha.empty() ? 0 : 1), alpha.end(), 0.0);
}

void validate(const PtdParams& params) {
  if (params.alpha.empty()) throw validation_error("PTD needs K >= 1");
  for (double a : params.alpha)
    if (!(a > 0.0)) throw validation_error("PTD concentration must be > 0");
  if (!(params.a >= 0.0 && params.b <= 1.0 && params.a < params.b))
    throw validation_error("PTD truncation interval is empty or outside [0, 1]");
}

double ptd_log_norm_const(const PtdParams& params) {
  validate(params);
  if (params.K() == 1) return 0.0;
  const auto rest = tail(params.alpha);
  return log_truncated_beta_fn(params.alpha[0], params.tail_alpha(), params.a,
                               params.b) +
         log_multivariate_beta(rest);
}

double ptd_log_density(const PtdParams& params, std::span<const double> gamma) {
  validate(params);
  if (static_cast<int>(gamma.size()) != params.K())
    throw validation_error("gamma has the wrong length for this PTD");
  const double s = std::accumulate(gamma.begin(), gamma.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-10)
    throw validation_error("gamma is off the simplex (sums to " +
                           std::to_string(s) + ")");
  if (params.K() == 1) return 0.0;
  if (!(gamma[0] > params.a && gamma[0] < params.b)) return kNegInf;
  double kernel = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (!(gamma[k] > 0.0)) return kNegInf;
    kernel += (params.alpha[k] - 1.0) * std::log(gamma[k]);
  }
  return kernel - ptd_log_norm_const(params);
}

TruncatedBeta ptd_marginal_first(const PtdParams& params) {
  return {params.alpha.at(0), params.tail_alpha(), params.a, params.b};
}

double truncated_beta_cdf(const TruncatedBeta& tb, double x) {
  if (x <= tb.a) return 0.0;
  if (x >= tb.b) return 1.0;
  return std::exp(log_beta_interval_mass(tb.alpha, tb.beta, tb.a, x) -
                  log_beta_interval_mass(tb.alpha, tb.beta, tb.a, tb.b));
}

double truncated_beta_sample(const TruncatedBeta& tb, Rng& rng) {
  using boost::math::ibeta;
  using boost::math::ibeta_inv;
  using boost::math::ibetac;
  using boost::math::ibetac_inv;

  const double log_mass = log_beta_interval_mass(tb.alpha, tb.beta, tb.a, tb.b);
  if (!(log_mass > kMinLogMass))
    throw numerical_error("degenerate truncation: truncated beta mass below 1e-300");

  const double Fa = tb.a <= 0.0 ? 0.0 : ibeta(tb.alpha, tb.beta, tb.a);
  const double Fb = tb.b >= 1.0 ? 1.0 : ibeta(tb.alpha, tb.beta, tb.b);
  const double Qa = tb.a <= 0.0 ? 1.0 : ibetac(tb.alpha, tb.beta, tb.a);
  const double Qb = tb.b >= 1.0 ? 0.0 : ibetac(tb.alpha, tb.beta, tb.b);
  const double u = uniform01(rng);

  double y;
  if (Fb - Fa >= 1e-12 || Qa - Qb >= 1e-12 || Fb < 1e-12 || Qa < 1e-12) {
    // Inverse CDF on the tail that keeps relative precision.
    if (Fa < 0.5) {
      y = ibeta_inv(tb.alpha, tb.beta, Fa + u * (Fb - Fa));
    } else {
      y = ibetac_inv(tb.alpha, tb.beta, Qb + u * (Qa - Qb));
    }
  } else {
    // Narrow interior interval: the CDF difference cancels. Rejection from a
    // uniform proposal on (a, b) against the bounded beta kernel.
    auto log_kernel = [&](double x) {
      return (tb.alpha - 1.0) * std::log(x) + (tb.beta - 1.0) * std::log1p(-x);
    };
    const double mode = (tb.alpha > 1.0 && tb.beta > 1.0)
                            ? (tb.alpha - 1.0) / (tb.alpha + tb.beta - 2.0)
                            : tb.a;
    const double top = std::max({log_kernel(tb.a), log_kernel(tb.b),
                                 log_kernel(std::clamp(mode, tb.a, tb.b))});
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 1000000)
        throw numerical_error("truncated beta rejection sampler exhausted 1e6 proposals");
      const double x = tb.a + uniform01(rng) * (tb.b - tb.a);
      if (std::log(uniform01(rng)) <= log_kernel(x) - top) {
        y = x;
        break;
      }
    }
  }
  // Quantile round-off can land on an endpoint.
  if (!(y > tb.a)) y = std::nextafter(tb.a, tb.b);
  if (!(y < tb.b)) y = std::nextafter(tb.b, tb.a);
  return y;
}

std::vector<double> ptd_sample(const PtdParams& params, Rng& rng) {
  validate(params);
  const int K = params.K();
  if (K == 1) return {1.0};
  const double g1 = truncated_beta_sample(ptd_marginal_first(params), rng);
  std::vector<double> gamma(static_cast<std::size_t>(K));
  gamma[0] = g1;
  const auto rest = tail(params.alpha);
  const auto scaled = dirichlet_variate(rng, rest);
  double s = g1;
  for (int k = 1; k < K; ++k) {
    gamma[static_cast<std::size_t>(k)] =
        (1.0 - g1) * scaled[static_cast<std::size_t>(k - 1)];
    s += gamma[static_cast<std::size_t>(k)];
  }
  // Absorb rounding into the largest tail coordinate so the row sums to 1
  // without touching gamma[1].
  auto it = std::max_element(gamma.begin() + 1, gamma.end());
  *it += 1.0 - s;
  return gamma;
}

double ptd_moment(const PtdParams& params, std::span<const int> m) {
  validate(params);
  if (static_cast<int>(m.size()) != params.K())
    throw validation_error("moment order vector has the wrong length");
  for (int v : m)
    if (v < 0) throw validation_error("moment orders must be nonnegative");
  if (params.K() == 1) return 1.0;
  const double a1 = params.alpha[0];
  const double a0 = params.tail_alpha();
  int m0 = 0;
  std::vector<double> shifted = tail(params.alpha);
  for (std::size_t k = 1; k < m.size(); ++k) {
    m0 += m[k];
    shifted[k - 1] += m[k];
  }
  const auto rest = tail(params.alpha);
  const double log_num = log_truncated_beta_fn(a1 + m[0], a0 + m0, params.a, params.b) +
                         log_multivariate_beta(shifted);
  const double log_den = log_truncated_beta_fn(a1, a0, params.a, params.b) +
                         log_multivariate_beta(rest);
  return std::exp(log_num - log_den);
}

PtdParams ptd_posterior_update(const PtdParams& params, std::span<const int> counts) {
  if (static_cast<int>(counts.size()) != params.K())
    throw validation_error("count vector has the wrong length for this PTD");
  PtdParams out = params;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw validation_error("counts must be nonnegative");
    out.alpha[k] += counts[k];
  }
  return out;
}

}  // namespace leap
