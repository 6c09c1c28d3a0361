#include "leap/elicitation.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <tuple>
#include <cmath>
#include <limits>

namespace leap {

SscPmf ssc_prior_pmf_beta(int n0, double delta01, double delta02) {
  if (n0 < 1) throw validation_error("n0 >= 1 required");
  if (!(delta01 > 0.0) || !(delta02 > 0.0))
    throw validation_error("beta shapes must be > 0");
  SscPmf pmf{std::vector<double>(static_cast<std::size_t>(n0 + 1))};
  const double base = log_beta(delta01, delta02);
  for (int k = 0; k <= n0; ++k)
    pmf.probs[static_cast<std::size_t>(k)] =
        std::exp(log_binomial(n0, k) + log_beta(k + delta01, n0 - k + delta02) - base);
  return pmf;
}

namespace {

/// exp(shift) * integral of exp(log_f - shift) over (lo, hi), with the shift
/// taken from a coarse scan so the integrand peaks near 1.
double log_integral(const std::function<double(double)>& log_f, double lo, double hi) {
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < 400; ++i) {
    const double x = lo + (hi - lo) * i / 400.0;
    shift = std::max(shift, log_f(x));
  }
  if (!std::isfinite(shift)) throw numerical_error("integrand vanishes on the support");
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  auto f = [&](double x) {
    const double v = log_f(x);
    return std::isfinite(v) ? std::exp(v - shift) : 0.0;
  };
  double err = 0.0, l1 = 0.0;
  const double value = integrator.integrate(f, lo, hi, 1e-12, &err, &l1);
  if (!(value > 0.0) || !std::isfinite(value) || err > 1e-9 * l1)
    throw numerical_error("quadrature did not converge (estimated error " +
                          std::to_string(err) + ")");
  return shift + std::log(value);
}

}  // namespace

SscPmf ssc_prior_pmf_numeric(int n0, const std::function<double(double)>& log_prior_gamma1,
                             double lower, double upper) {
  if (n0 < 1) throw validation_error("n0 >= 1 required");
  if (!(lower >= 0.0 && upper <= 1.0 && lower < upper))
    throw validation_error("prior support must be a subinterval of [0, 1]");
  const double log_z = log_integral(log_prior_gamma1, lower, upper);
  SscPmf pmf{std::vector<double>(static_cast<std::size_t>(n0 + 1))};
  for (int k = 0; k <= n0; ++k) {
    const double lc = log_binomial(n0, k);
    auto log_f = [&](double g) {
      return lc + k * std::log(g) + (n0 - k) * std::log1p(-g) + log_prior_gamma1(g);
    };
    pmf.probs[static_cast<std::size_t>(k)] = std::exp(log_integral(log_f, lower, upper) - log_z);
  }
  return pmf;
}

SscInterval ssc_interval(const SscPmf& pmf, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw validation_error("interval mass must lie in (0, 1)");
  if (pmf.probs.empty()) throw validation_error("empty pmf");
  const double tail = 0.5 * (1.0 - mass);
  constexpr double eps = 1e-12;
  std::vector<double> cdf(pmf.probs.size());
  double c = 0.0;
  for (std::size_t k = 0; k < pmf.probs.size(); ++k) cdf[k] = (c += pmf.probs[k]);
  const int n0 = pmf.n0();
  SscInterval out{0, n0};
  for (int q = 0; q <= n0; ++q) {
    const double below = q == 0 ? 0.0 : cdf[static_cast<std::size_t>(q - 1)];
    if (below <= tail + eps) out.low = q;
  }
  for (int q = 0; q <= n0; ++q) {
    if (cdf[static_cast<std::size_t>(q)] >= 1.0 - tail - eps) {
      out.high = q;
      break;
    }
  }
  return out;
}

namespace {

struct Score {
  double value;
  SscInterval interval;
};

/// Mismatch of the mid-p tail masses at the target endpoints. When both equal
/// (1 - mass) / 2 the equal-tail interval is exactly [low, high].
Score score_beta(int n0, int low, int high, double mass, double d1, double d2) {
  const auto pmf = ssc_prior_pmf_beta(n0, d1, d2);
  const double tail = 0.5 * (1.0 - mass);
  double below = 0.0;
  for (int k = 0; k < low; ++k) below += pmf.probs[static_cast<std::size_t>(k)];
  double above = 0.0;
  for (int k = high + 1; k <= n0; ++k) above += pmf.probs[static_cast<std::size_t>(k)];
  const double lower_mid = below + 0.5 * pmf.probs[static_cast<std::size_t>(low)];
  const double upper_mid = above + 0.5 * pmf.probs[static_cast<std::size_t>(high)];
  const double el = std::log(std::max(lower_mid, 1e-300) / tail);
  const double eh = std::log(std::max(upper_mid, 1e-300) / tail);
  return {el * el + eh * eh, ssc_interval(pmf, mass)};
}

}  // namespace

BetaSolution solve_beta_hyperparams(int n0, int target_low, int target_high, double mass) {
  if (n0 < 1) throw validation_error("n0 >= 1 required");
  if (!(0 <= target_low && target_low <= target_high && target_high <= n0))
    throw validation_error("target interval must satisfy 0 <= low <= high <= n0");
  if (!(mass > 0.0 && mass < 1.0)) throw validation_error("interval mass must lie in (0, 1)");

  // Search over m = logit(d1 / (d1 + d2)) and s = log(d1 + d2): location and
  // spread of the interval then move roughly independently.
  auto shapes = [](double m, double s) {
    const double total = std::exp(s);
    const double w = 1.0 / (1.0 + std::exp(-m));
    return std::pair{total * w, total * (1.0 - w)};
  };
  auto eval = [&](double m, double s) {
    const auto [d1, d2] = shapes(m, s);
    return score_beta(n0, target_low, target_high, mass, d1, d2);
  };

  constexpr int grid = 49;
  const double m_lo = -8.0, m_hi = 8.0;
  const double s_lo = std::log(2e-2), s_hi = std::log(2e4);
  const double dm = (m_hi - m_lo) / (grid - 1), ds = (s_hi - s_lo) / (grid - 1);
  double bm = 0.0, bs = 0.0;
  Score best{std::numeric_limits<double>::infinity(), {}};
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double m = m_lo + dm * i, s = s_lo + ds * j;
      const auto sc = eval(m, s);
      if (sc.value < best.value) {
        best = sc;
        bm = m;
        bs = s;
      }
    }

  double hm = dm / 2.0, hs = ds / 2.0;
  int steps = 0;
  while (steps < 200 && std::max(hm, hs) > 1e-9 && best.value > 1e-16) {
    ++steps;
    bool moved = false;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (a == 0 && b == 0) continue;
        const double m = bm + a * hm, s = bs + b * hs;
        const auto sc = eval(m, s);
        if (sc.value < best.value) {
          best = sc;
          bm = m;
          bs = s;
          moved = true;
        }
      }
    if (!moved) {
      hm /= 2.0;
      hs /= 2.0;
    }
  }

  BetaSolution out;
  std::tie(out.delta01, out.delta02) = shapes(bm, bs);
  out.achieved = best.interval;
  out.refinement_steps = steps;
  out.attained = std::abs(best.interval.low - target_low) <= 1 &&
                 std::abs(best.interval.high - target_high) <= 1;
  return out;
}

double truncation_bound(int n_current, int n0) {
  if (n_current < 1 || n0 < 1) throw validation_error("n and n0 must be >= 1");
  return std::min(static_cast<double>(n_current) / n0, 1.0);
}

PosteriorSsc posterior_ssc_summary(const DrawsMatrix& draws) {
  if (draws.empty()) throw validation_error("no retained draws");
  const int first = draws.index_of("n0[1]");
  std::vector<int> count_cols;
  for (int k = 1;; ++k) {
    auto j = draws.find(indexed_name("n0", k));
    if (!j) break;
    count_cols.push_back(*j);
  }
  int n0 = 0;
  for (int j : count_cols) n0 += static_cast<int>(draws.at(0, j));
  PosteriorSsc out;
  out.pmf.probs.assign(static_cast<std::size_t>(n0 + 1), 0.0);
  double sum = 0.0;
  for (int r = 0; r < draws.rows(); ++r) {
    const int n01 = static_cast<int>(draws.at(r, first));
    out.pmf.probs[static_cast<std::size_t>(n01)] += 1.0;
    sum += n01;
  }
  for (double& v : out.pmf.probs) v /= draws.rows();
  out.mean = sum / draws.rows();
  return out;
}

}  // namespace leap
