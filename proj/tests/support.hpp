#pragma once

#include "leap/model.hpp"
#include "leap/numeric.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace leap::test {

inline std::string data_path(const std::string& name) {
  return std::string(LEAP_TEST_DATA_DIR) + "/" + name;
}

/// Current counts with n = 10 and mean 1.5, and y0 = (1, 2, 6).
inline Dataset counts_current() {
  return Dataset::counts({0, 1, 2, 3, 1, 2, 1, 3, 1, 1});
}
inline HistoricalDataset counts_historical() { return HistoricalDataset::counts({1, 2, 6}); }

inline LeapConfig counts_config(double alpha = 0.9) {
  LeapConfig cfg;
  cfg.model = ModelKind::poisson;
  cfg.K = 2;
  cfg.alpha = {alpha, alpha};
  cfg.poisson = {{0.1, 0.1}, {0.1, 0.1}};
  return cfg;
}

/// Published partition table rows in lexicographic partition order:
/// prior prob, posterior prob, prior mean, posterior mean.
struct PublishedRow {
  const char* c0;
  double prior_prob, post_prob, prior_mean, post_mean;
};
inline const std::vector<PublishedRow>& published_partition_table() {
  static const std::vector<PublishedRow> rows{
      {"1,1,1", 0.319, 0.412, 2.94, 1.84}, {"1,1,2", 0.092, 0.259, 1.48, 1.50},
      {"1,2,1", 0.020, 0.019, 3.38, 1.83}, {"1,2,2", 0.068, 0.105, 1.00, 1.45},
      {"2,1,1", 0.068, 0.035, 3.86, 1.91}, {"2,1,2", 0.020, 0.045, 1.91, 1.54},
      {"2,2,1", 0.092, 0.017, 5.55, 1.90}, {"2,2,2", 0.319, 0.108, 1.00, 1.50}};
  return rows;
}

/// Integral of exp(log_f) over (a, b) (either end may be infinite), with the
/// integrand shifted by the maximum of a coarse scan.
inline double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                            double tol = 1e-13) {
  const double inf = std::numeric_limits<double>::infinity();
  auto scan_point = [&](double t) {  // t in (0, 1)
    if (std::isfinite(a) && std::isfinite(b)) return a + (b - a) * t;
    if (std::isfinite(a)) return a + t / (1.0 - t);
    if (std::isfinite(b)) return b - (1.0 - t) / t;
    return std::log(t / (1.0 - t)) * 50.0;
  };
  double shift = -inf;
  for (int i = 1; i < 2000; ++i) shift = std::max(shift, log_f(scan_point(i / 2000.0)));
  auto f = [&](double x) {
    const double v = log_f(x);
    return std::isfinite(v) ? std::exp(v - shift) : 0.0;
  };
  double value = 0.0;
  if (std::isfinite(a) && std::isfinite(b)) {
    boost::math::quadrature::tanh_sinh<double> q(20);
    value = q.integrate(f, a, b, tol);
  } else if (std::isfinite(a)) {
    boost::math::quadrature::exp_sinh<double> q(20);
    value = q.integrate([&](double x) { return f(x); }, a, inf, tol);
  } else {
    boost::math::quadrature::sinh_sinh<double> q(20);
    value = q.integrate(f, tol);
  }
  return shift + std::log(value);
}

inline std::vector<double> random_uniforms(Rng& rng, int n, double lo, double hi) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = lo + (hi - lo) * uniform01(rng);
  return v;
}

}  // namespace leap::test
