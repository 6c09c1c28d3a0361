#include "leap/error.hpp"
#include "leap/model.hpp"

#include <doctest.h>

#include <algorithm>

using namespace leap;

namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

LeapConfig poisson_cfg() {
  LeapConfig cfg;
  cfg.K = 2;
  cfg.alpha = {1.0, 1.0};
  cfg.poisson = {{0.1, 0.1}, {0.1, 0.1}};
  return cfg;
}

}  // namespace

TEST_CASE("datasets validate their inputs") {
  CHECK_THROWS_AS(Dataset::counts({}), Error);
  CHECK_THROWS_AS(Dataset::counts({1.0, -1.0}), Error);
  CHECK_THROWS_AS(Dataset::counts({1.5}), Error);
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 3.0;
  Eigen::MatrixXd X(3, 2);
  X << 1, 1, 1, 1, 1, 1;  // repeated column
  CHECK_THROWS_AS(Dataset::make(y, X), Error);
  Eigen::MatrixXd X2(3, 2);
  X2 << 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd z(3);
  z << 0, 2, 1;
  CHECK_THROWS_AS(Dataset::make(y, X2, z), Error);
  z << 0, 1, 0;
  const auto d = Dataset::make(y, Eigen::MatrixXd(X2.leftCols(1)), z);
  CHECK(d.design_cols() == 2);
  CHECK(d.design()(1, 1) == 1.0);
}

TEST_CASE("historical design gains a zero treatment column when the current data have one") {
  Eigen::VectorXd y(3), z(3), y0(2);
  y << 1, 2, 3;
  z << 0, 1, 1;
  y0 << 4, 5;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1), X0 = Eigen::MatrixXd::Ones(2, 1);
  const auto cur = Dataset::make(y, X, z);
  const auto hist = HistoricalDataset::make(y0, X0);
  const auto D = hist.design_like(&cur);
  CHECK(D.cols() == 2);
  CHECK(D.col(1).isZero());
  CHECK(hist.design_like(nullptr).cols() == 1);
}

TEST_CASE("configuration validation reports each violation") {
  const auto hist = HistoricalDataset::counts({1, 2, 6});
  const auto data = Dataset::counts({1, 2});

  auto cfg = poisson_cfg();
  CHECK(validate_config(cfg, &data, hist).ok());

  cfg.alpha = {1.0};
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "alpha_length"));
  cfg.alpha = {1.0, 0.0};
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "alpha_nonpositive"));
  cfg = poisson_cfg();
  cfg.K = 0;
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "components"));
  cfg = poisson_cfg();
  cfg.trunc_a = 0.6;
  cfg.trunc_b = 0.4;
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "empty_truncation"));
  cfg = poisson_cfg();
  cfg.poisson.pop_back();
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "prior_count"));
  cfg = poisson_cfg();
  cfg.poisson[1].shape = 0.0;
  CHECK(!validate_config(cfg, &data, hist).ok());
  cfg = poisson_cfg();
  cfg.alpha = {1e6, 1.0};
  const auto rep = validate_config(cfg, &data, hist);
  CHECK(rep.ok());
  CHECK(has_code(rep.advisories, "alpha_large"));
  CHECK_THROWS_AS(require_valid(LeapConfig{}, &data, hist), Error);
}

TEST_CASE("an improper first-component precision needs a full-rank current design") {
  Eigen::VectorXd y(4), y0(3);
  y << 1, 2, 4, 3;
  y0 << 1, 2, 3;
  Eigen::MatrixXd X(4, 2), X0(3, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  X0 << 1, 0, 1, 1, 1, 2;
  const auto data = Dataset::make(y, X);
  const auto hist = HistoricalDataset::make(y0, X0);
  LeapConfig cfg;
  cfg.model = ModelKind::normal_linear;
  cfg.K = 2;
  cfg.alpha = {1.0, 1.0};
  auto flat = NormalGammaPrior::vague(2);
  flat.precision.setZero();
  cfg.linear = {flat, NormalGammaPrior::vague(2)};
  CHECK(validate_config(cfg, &data, hist).ok());
  CHECK(has_code(validate_config(cfg, nullptr, hist).violations, "first_component_improper"));
  cfg.linear = {NormalGammaPrior::vague(2), flat};
  CHECK(has_code(validate_config(cfg, &data, hist).violations, "component_improper"));
  cfg.linear = {NormalGammaPrior::vague(3), NormalGammaPrior::vague(2)};
  CHECK(!validate_config(cfg, &data, hist).ok());
}

TEST_CASE("partition helpers") {
  const PartitionAssignment c0({1, 1, 2});
  CHECK(c0.str() == "1,1,2");
  CHECK(class_counts(c0, 2) == std::vector<int>{2, 1});
  CHECK(class_counts(c0, 3) == std::vector<int>{2, 1, 0});
  CHECK_THROWS_AS(class_counts(PartitionAssignment({1, 3}), 2), Error);
  CHECK(indexed_name("beta", 1, 2) == "beta[1,2]");
  CHECK(indexed_name("theta", 3) == "theta[3]");
}

TEST_CASE("draws matrix stores rows, chains and named columns") {
  DrawsMatrix d({"a", "b"});
  d.add_row({1.0, 2.0}, 0);
  d.add_row({3.0, 4.0}, 1);
  CHECK(d.rows() == 2);
  CHECK(d.at(1, 0) == 3.0);
  CHECK(d.chain_of(1) == 1);
  CHECK(d.column("b") == std::vector<double>{2.0, 4.0});
  CHECK(!d.find("c"));
  CHECK_THROWS_AS(d.index_of("c"), Error);
  CHECK_THROWS_AS(d.add_row({1.0}), Error);
  DrawsMatrix other({"a", "c"});
  CHECK_THROWS_AS(d.append(other), Error);
}

TEST_CASE("gamma row checks catch sum and truncation errors") {
  DrawsMatrix d({"gamma[1]", "gamma[2]"});
  d.add_row({0.4, 0.6});
  CHECK_NOTHROW(check_gamma_rows(d, 2, 0.0, 1.0));
  CHECK_THROWS_AS(check_gamma_rows(d, 2, 0.5, 1.0), Error);
  d.add_row({0.4, 0.61});
  CHECK_THROWS_AS(check_gamma_rows(d, 2, 0.0, 1.0), Error);
}
