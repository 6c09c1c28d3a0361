#include "leap/numeric.hpp"

#include "leap/error.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace leap {

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double normalize_log_weights(std::vector<double>& w) {
  const double lse = log_sum_exp(w);
  if (!std::isfinite(lse)) throw numerical_error("cannot normalize log weights");
  for (double& v : w) v = std::exp(v - lse);
  return lse;
}

double log_beta(double a, double b) {
  return boost::math::lgamma(a) + boost::math::lgamma(b) -
         boost::math::lgamma(a + b);
}

double log_multivariate_beta(std::span<const double> alpha) {
  double s = 0.0, t = 0.0;
  for (double a : alpha) {
    s += boost::math::lgamma(a);
    t += a;
  }
  return s - boost::math::lgamma(t);
}

double log_binomial(int n, int k) {
  return boost::math::lgamma(n + 1.0) - boost::math::lgamma(k + 1.0) -
         boost::math::lgamma(n - k + 1.0);
}

double log_beta_interval_mass(double alpha, double beta, double a, double b) {
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  if (a <= 0.0 && b >= 1.0) return 0.0;
  const double Fa = a <= 0.0 ? 0.0 : boost::math::ibeta(alpha, beta, a);
  double mass;
  if (Fa < 0.5) {
    const double Fb = b >= 1.0 ? 1.0 : boost::math::ibeta(alpha, beta, b);
    mass = Fb - Fa;
  } else {
    const double Qa = boost::math::ibetac(alpha, beta, a);
    const double Qb = b >= 1.0 ? 0.0 : boost::math::ibetac(alpha, beta, b);
    mass = Qa - Qb;
  }
  return mass > 0.0 ? std::log(mass) : -std::numeric_limits<double>::infinity();
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ mix_seed(index);
}

double uniform01(Rng& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // Marsaglia polar method; implementation-independent unlike std::normal_distribution.
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double log_gamma_variate(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw numerical_error("gamma shape must be > 0");
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    return log_gamma_variate(rng, shape + 1.0) + std::log(uniform01(rng)) / shape;
  }
  // Marsaglia and Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return std::log(d * v);
  }
}

double gamma_variate(Rng& rng, double shape, double rate) {
  // Vague shapes put real mass below the double range; keep draws positive
  // and normal so log(rate) and tau * r^2 stay finite downstream.
  const double v = std::exp(log_gamma_variate(rng, shape) - std::log(rate));
  return std::clamp(v, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
}

std::vector<double> dirichlet_variate(Rng& rng, std::span<const double> alpha) {
  std::vector<double> lg(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k)
    lg[k] = log_gamma_variate(rng, alpha[k]);
  normalize_log_weights(lg);
  return lg;
}

int categorical_from_log(Rng& rng, std::span<const double> logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse)) throw numerical_error("categorical weights are all zero");
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    cum += std::exp(logw[k] - lse);
    if (u < cum) return static_cast<int>(k);
  }
  // Rounding left the cumulative sum just short of 1.
  for (std::size_t k = logw.size(); k-- > 0;)
    if (std::isfinite(logw[k])) return static_cast<int>(k);
  return static_cast<int>(logw.size()) - 1;
}

}  // namespace leap
