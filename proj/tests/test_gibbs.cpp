#include "leap/diagnostics.hpp"
#include "leap/elicitation.hpp"
#include "leap/error.hpp"
#include "leap/gibbs.hpp"
#include "leap/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace leap;

namespace {

ChainSettings short_chain(std::uint64_t seed, int iterations = 3000) {
  ChainSettings s;
  s.iterations = iterations;
  s.burn_in = 500;
  s.seed = seed;
  return s;
}

bool same_values(const DrawsMatrix& a, const DrawsMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int r = 0; r < a.rows(); ++r)
    for (int j = 0; j < a.cols(); ++j)
      if (a.at(r, j) != b.at(r, j)) return false;
  return true;
}

}  // namespace

TEST_CASE("chains are reproducible and independent of the worker count") {
  const auto data = test::counts_current();
  const auto hist = test::counts_historical();
  const auto cfg = test::counts_config();
  const auto a = run_chains(&data, hist, cfg, short_chain(5), 3, 1);
  const auto b = run_chains(&data, hist, cfg, short_chain(5), 3, 3);
  CHECK(same_values(a, b));
  CHECK(a.partitions() == b.partitions());
  const auto c = run_chains(&data, hist, cfg, short_chain(6), 3, 1);
  CHECK(!same_values(a, c));
  CHECK(a.rows() == 3 * 2500);
  CHECK(a.chain_of(a.rows() - 1) == 2);
}

TEST_CASE("column layout") {
  const auto data = test::counts_current();
  const auto hist = test::counts_historical();
  const LeapSampler s(&data, hist, test::counts_config());
  CHECK(s.columns() == std::vector<std::string>{"theta[1]", "theta[2]", "gamma[1]", "gamma[2]", "n0[1]", "n0[2]"});
}

TEST_CASE("gamma draws sum to one and respect the truncation") {
  const auto data = test::counts_current();
  const auto hist = test::counts_historical();
  auto cfg = test::counts_config();
  cfg.trunc_a = 0.3;
  cfg.trunc_b = 0.6;
  const auto d = run_chain(&data, hist, cfg, short_chain(9));
  CHECK_NOTHROW(check_gamma_rows(d, 2, 0.3, 0.6));
  for (int r = 0; r < d.rows(); ++r) CHECK(d.at(r, 4) + d.at(r, 5) == 3.0);
}

TEST_CASE("K = 1 keeps every historical subject in the shared component") {
  auto cfg = test::counts_config();
  cfg.K = 1;
  cfg.alpha = {1.0};
  cfg.poisson = {{0.1, 0.1}};
  const auto data = test::counts_current();
  const auto d = run_chain(&data, test::counts_historical(), cfg, short_chain(2, 4000));
  for (int r = 0; r < d.rows(); ++r) {
    CHECK(d.at(r, d.index_of("gamma[1]")) == 1.0);
    CHECK(d.at(r, d.index_of("n0[1]")) == 3.0);
  }
  // Pooled Gamma(24.1, 13.1) posterior.
  const auto s = summarize(d);
  CHECK(std::abs(s.at("theta[1]").mean - 24.1 / 13.1) < 4.0 * s.at("theta[1]").mcse);
}

TEST_CASE("a chain without data targets the prior partition distribution") {
  const auto hist = test::counts_historical();
  const auto cfg = test::counts_config();
  ChainSettings s = short_chain(21, 60000);
  const auto d = run_chain(nullptr, hist, cfg, s);
  const auto table = prior_partition_table(hist, cfg);
  const auto exact = ssc_marginal_from_table(table, Which::prior);
  const auto mc = posterior_ssc_summary(d);
  double tv = 0.0;
  for (std::size_t k = 0; k < exact.probs.size(); ++k) tv += 0.5 * std::abs(exact.probs[k] - mc.pmf.probs[k]);
  CHECK(tv < 0.02);
}

TEST_CASE("linear sampler produces finite draws with a treatment column") {
  Rng rng(3);
  const int n = 30, n0 = 20;
  Eigen::MatrixXd X(n, 2), X0(n0, 2);
  Eigen::VectorXd y(n), z(n), y0(n0);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = standard_normal(rng);
    z(i) = i % 2;
    y(i) = 1.0 + X(i, 1) - 2.0 * z(i) + standard_normal(rng);
  }
  for (int i = 0; i < n0; ++i) {
    X0(i, 0) = 1.0;
    X0(i, 1) = standard_normal(rng);
    y0(i) = 1.0 + X0(i, 1) + standard_normal(rng);
  }
  const auto data = Dataset::make(y, X, z);
  const auto hist = HistoricalDataset::make(y0, X0);
  LeapConfig cfg;
  cfg.model = ModelKind::normal_linear;
  cfg.K = 2;
  cfg.alpha = {1.0, 1.0};
  cfg.linear = {NormalGammaPrior::vague(3), NormalGammaPrior::vague(3)};
  const auto d = run_chain(&data, hist, cfg, short_chain(4));
  CHECK(d.find("beta[1,3]"));
  CHECK(d.find("tau[2]"));
  for (int r = 0; r < d.rows(); ++r)
    for (int j = 0; j < d.cols(); ++j) CHECK(std::isfinite(d.at(r, j)));
  const auto s = summarize(d);
  CHECK(std::abs(s.at("beta[1,3]").mean + 2.0) < 1.0);
}

TEST_CASE("invalid settings are rejected") {
  const auto data = test::counts_current();
  ChainSettings s;
  s.iterations = 0;
  CHECK_THROWS_AS(run_chain(&data, test::counts_historical(), test::counts_config(), s), Error);
  CHECK_THROWS_AS(run_chains(&data, test::counts_historical(), test::counts_config(), ChainSettings{}, 0), Error);
}
