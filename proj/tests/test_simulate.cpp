#include "leap/error.hpp"
#include "leap/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace leap;

TEST_CASE("generator log-covariate moments") {
  Rng rng(10);
  const int n = 100000;
  const auto cov = draw_covariates(n, 1.0, rng);
  const Eigen::ArrayXd la = cov.col(0).array().log(), lp = cov.col(1).array().log();
  const double ma = la.mean(), mp = lp.mean();
  const double va = (la - ma).square().sum() / (n - 1), vp = (lp - mp).square().sum() / (n - 1);
  const double c = ((la - ma) * (lp - mp)).sum() / (n - 1);
  CHECK(std::abs(ma - 3.78) < 3.0 * std::sqrt(0.09 / n));
  CHECK(std::abs(mp - 2.90) < 3.0 * std::sqrt(0.10 / n));
  CHECK(std::abs(va - 0.09) < 3.0 * 0.09 * std::sqrt(2.0 / n));
  CHECK(std::abs(vp - 0.10) < 3.0 * 0.10 * std::sqrt(2.0 / n));
  CHECK(std::abs(c + 0.01) < 3.0 * std::sqrt((0.09 * 0.10 + 0.01 * 0.01) / n));
}

TEST_CASE("replications are deterministic and shaped as configured") {
  SimScenario s;
  s.exchangeability = Exchangeability::half;
  s.n0 = 40;
  s.n_extra = 10;
  const auto a = generate_replication(s, 5);
  const auto b = generate_replication(s, 5);
  CHECK(a.current.y() == b.current.y());
  CHECK(a.hist.y() == b.hist.y());
  CHECK(a.current.n() == 50);
  CHECK(a.hist.n0() == 40);
  CHECK(a.current.design_cols() == 5);
  CHECK(a.hist.X().cols() == 4);
  // Scaled with the current sample: current covariates have mean 0 and sd 1.
  CHECK(std::abs(a.current.X().col(1).mean()) < 1e-12);
  CHECK(parse_exchangeability("none") == Exchangeability::none);
  CHECK_THROWS_AS(parse_exchangeability("partial"), Error);
  s.q = 0.0;
  CHECK_THROWS_AS(generate_replication(s, 1), Error);
}

TEST_CASE("simulation results do not depend on the worker count") {
  SimScenario s;
  s.reps = 4;
  s.n0 = 30;
  SimFitSettings fit;
  fit.iterations = 800;
  fit.burn_in = 200;
  fit.npp_draws = 500;
  fit.npp_grid = 51;
  const auto a = run_simulation(s, fit, 1);
  const auto b = run_simulation(s, fit, 3);
  for (std::size_t k = 0; k < a.priors.size(); ++k) {
    CHECK(a.metrics[k].mse == b.metrics[k].mse);
    CHECK(a.metrics[k].coverage == b.metrics[k].coverage);
  }
}
