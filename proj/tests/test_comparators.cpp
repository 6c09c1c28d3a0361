#include "leap/comparators.hpp"
#include "leap/diagnostics.hpp"
#include "leap/error.hpp"
#include "support.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace leap;

namespace {

NppConfig poisson_npp(A0Prior a0 = A0Prior::uniform()) {
  NppConfig cfg;
  cfg.model = ModelKind::poisson;
  cfg.poisson = {0.7, 0.4};
  cfg.a0_prior = a0;
  return cfg;
}

double poisson_log_c_quadrature(double a0, const HistoricalDataset& hist, const PoissonGammaPrior& pr) {
  return test::log_integrate(
      [&](double t) {
        if (t <= 0.0) return -std::numeric_limits<double>::infinity();
        double v = pr.shape * std::log(pr.rate) - boost::math::lgamma(pr.shape) +
                   (pr.shape - 1.0) * std::log(t) - pr.rate * t;
        for (Eigen::Index i = 0; i < hist.n0(); ++i)
          v += a0 * (hist.y()(i) * std::log(t) - t - boost::math::lgamma(hist.y()(i) + 1.0));
        return v;
      },
      0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

struct LinearToy {
  Dataset data;
  HistoricalDataset hist;
};

LinearToy linear_toy(int n, int n0, std::uint64_t seed, double hist_shift = 0.0) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, 2), X0(n0, 2);
  Eigen::VectorXd y(n), z(n), y0(n0);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = standard_normal(rng);
    z(i) = i % 3 == 0 ? 1.0 : 0.0;
    y(i) = 2.0 + X(i, 1) - 1.5 * z(i) + 0.7 * standard_normal(rng);
  }
  for (int i = 0; i < n0; ++i) {
    X0(i, 0) = 1.0;
    X0(i, 1) = standard_normal(rng);
    y0(i) = 2.0 + hist_shift + X0(i, 1) + 0.7 * standard_normal(rng);
  }
  return {Dataset::make(y, X, z), HistoricalDataset::make(y0, X0)};
}

}  // namespace

TEST_CASE("log C(a0) at the boundaries") {
  const auto hist = HistoricalDataset::counts({1, 4, 2, 0});
  const auto cfg = poisson_npp();
  CHECK(npp_log_norm_const(0.0, hist, cfg) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  // a0 = 1: the ordinary conjugate marginal likelihood, here by quadrature.
  CHECK(npp_log_norm_const(1.0, hist, cfg) == doctest::Approx(poisson_log_c_quadrature(1.0, hist, cfg.poisson)).epsilon(1e-9));
  CHECK_THROWS_AS(npp_log_norm_const(1.2, hist, cfg), Error);
  CHECK_THROWS_AS(npp_log_norm_const(-0.1, hist, cfg), Error);
}

TEST_CASE("Poisson log C(a0) matches quadrature at an interior a0") {
  const auto hist = HistoricalDataset::counts({3, 0, 2});
  const auto cfg = poisson_npp();
  const double cf = npp_log_norm_const(0.37, hist, cfg);
  CHECK(std::abs(cf - poisson_log_c_quadrature(0.37, hist, cfg.poisson)) < 1e-8);
}

TEST_CASE("linear log C(0) is zero for a proper initial prior") {
  const auto toy = linear_toy(12, 8, 3);
  NppConfig cfg;
  cfg.model = ModelKind::normal_linear;
  cfg.linear = NormalGammaPrior::vague(3, 0.5, 1.0, 1.0);
  CHECK(std::abs(npp_log_norm_const(0.0, toy.hist, cfg, &toy.data)) < 1e-12);
  CHECK_THROWS_AS(npp_log_norm_const(0.5, toy.hist, cfg), Error);  // dimension 2 without the layout
}

TEST_CASE("boundary a0 values reproduce no-borrowing and pooling exactly") {
  const auto data = Dataset::counts({1, 2, 2, 3});
  const auto hist = HistoricalDataset::counts({5, 6, 7});
  const auto cfg = poisson_npp();
  const auto none = npp_poisson_conditional(0.0, data, hist, cfg);
  const auto pooled = npp_poisson_conditional(1.0, data, hist, cfg);
  CHECK(none.shape == 0.7 + 8.0);
  CHECK(none.rate == 0.4 + 4.0);
  CHECK(pooled.shape == 0.7 + 8.0 + 18.0);
  CHECK(pooled.rate == 0.4 + 4.0 + 3.0);

  const auto toy = linear_toy(15, 10, 5);
  NppConfig lc;
  lc.model = ModelKind::normal_linear;
  lc.linear = NormalGammaPrior::vague(3);
  const auto cur = LinearSuffStats::of(toy.data.design(), toy.data.y());
  auto pooled_stats = cur;
  pooled_stats += LinearSuffStats::of(toy.hist.design_like(&toy.data), toy.hist.y());
  const auto a = npp_linear_conditional(0.0, toy.data, toy.hist, lc);
  const auto b = normal_gamma_update(lc.linear, cur);
  const auto c = npp_linear_conditional(1.0, toy.data, toy.hist, lc);
  const auto d = normal_gamma_update(lc.linear, pooled_stats);
  CHECK(a.beta_tilde == b.beta_tilde);
  CHECK(a.precision_scale == b.precision_scale);
  CHECK(a.shape == b.shape);
  CHECK(a.rate == b.rate);
  CHECK(c.beta_tilde == d.beta_tilde);
  CHECK(c.precision_scale == d.precision_scale);
  CHECK(c.shape == d.shape);
  CHECK(c.rate == d.rate);
}

TEST_CASE("a0 grid posterior is normalized and reacts to conflict") {
  Rng rng(12);
  std::vector<double> y(40), y0(400);
  for (auto& v : y) v = std::floor(-std::log(uniform01(rng)) * 1.0);  // small counts around 0.5
  std::vector<double> agree(400), conflict(400);
  for (std::size_t i = 0; i < 400; ++i) {
    agree[i] = y[i % 40];
    conflict[i] = 20.0 + static_cast<double>(i % 5);
  }
  const auto data = Dataset::counts(y);
  const auto post_c = npp_a0_posterior(data, HistoricalDataset::counts(conflict), poisson_npp());
  CHECK(std::accumulate(post_c.probs.begin(), post_c.probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(post_c.grid.size() == 1001);
  CHECK(post_c.mean < 0.1);
  const auto post_a = npp_a0_posterior(data, HistoricalDataset::counts(agree), poisson_npp());
  CHECK(post_a.mean > 0.5);

  const auto trunc = npp_a0_posterior(data, HistoricalDataset::counts(agree), poisson_npp(A0Prior::truncated(0.3)));
  CHECK(trunc.grid.back() < 0.3);
  const auto beta = npp_a0_posterior(data, HistoricalDataset::counts(agree), poisson_npp(A0Prior::beta(2.0, 5.0)));
  CHECK(std::accumulate(beta.probs.begin(), beta.probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("NPP draws: fixed a0 gives the conjugate posterior, seeds reproduce") {
  const auto data = Dataset::counts({1, 2, 2, 3});
  const auto hist = HistoricalDataset::counts({5, 6, 7});
  const auto d = npp_posterior(data, hist, poisson_npp(A0Prior::fixed(1.0)), 40000, 3);
  const auto s = summarize(d);
  CHECK(std::abs(s.at("theta[1]").mean - 26.7 / 7.4) < 4.0 * s.at("theta[1]").mcse);
  CHECK(s.at("a0").sd == 0.0);
  const auto again = npp_posterior(data, hist, poisson_npp(A0Prior::fixed(1.0)), 40000, 3);
  CHECK(again.column(0) == d.column(0));
  CHECK_THROWS_AS(npp_posterior(data, hist, poisson_npp(), 0, 3), Error);
  NppConfig bad = poisson_npp();
  bad.grid_size = 5;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("reference posterior: likelihood dominance, determinism, scaling") {
  const auto toy = linear_toy(200, 5, 21);
  ReferencePriorConfig wide{1e6, 1e6};
  ChainSettings s;
  s.iterations = 12000;
  s.burn_in = 2000;
  s.seed = 4;
  const auto d = reference_posterior(toy.data, wide, s);
  const Eigen::MatrixXd X = toy.data.design();
  const Eigen::VectorXd mle = X.colPivHouseholderQr().solve(toy.data.y());
  // Under a flat prior E[beta | sigma, y] is the MLE, so (mean - mle) / mcse is standard
  // normal across seeds when the sampler and its MCSE are right.
  double z2 = 0.0;
  int count = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ChainSettings si = s;
    si.seed = seed;
    const auto sum = summarize(reference_posterior(toy.data, wide, si));
    for (int j = 0; j < 3; ++j) {
      const auto& p = sum.at(indexed_name("beta", 1, j + 1));
      z2 += std::pow((p.mean - mle(j)) / p.mcse, 2);
      ++count;
    }
  }
  CHECK(z2 / count > 0.45);
  CHECK(z2 / count < 1.6);
  const auto again = reference_posterior(toy.data, wide, s);
  CHECK(again.column(0) == d.column(0));
  CHECK(d.meta.diagnostics.size() == 1);
  CHECK(d.meta.diagnostics[0].second > 0.15);
  CHECK(d.meta.diagnostics[0].second < 0.75);

  const auto small = linear_toy(100, 5, 31);
  const auto large = linear_toy(400, 5, 32);
  const auto s100 = summarize(reference_posterior(small.data, ReferencePriorConfig{}, s));
  const auto s400 = summarize(reference_posterior(large.data, ReferencePriorConfig{}, s));
  const double ratio = s100.at("beta[1,2]").sd / s400.at("beta[1,2]").sd;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
  CHECK_THROWS_AS(reference_posterior(small.data, ReferencePriorConfig{0.0, 1.0}, s), Error);
}
