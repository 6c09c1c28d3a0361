#include "commands.hpp"
#include "leap/comparators.hpp"
#include "leap/config.hpp"
#include "leap/diagnostics.hpp"
#include "leap/error.hpp"
#include "leap/io.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace leap;
using nlohmann::json;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "input.csv");
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("leap_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("historical Poisson file") {
  const auto h = historical_from_csv(parse("y\n1\n2\n6\n"), ModelKind::poisson, true, "h.csv");
  REQUIRE(h.n0() == 3);
  CHECK(h.y()(0) == 1.0);
  CHECK(h.y()(2) == 6.0);
}

TEST_CASE("CSV errors carry locations") {
  CHECK_THROWS_WITH_AS(parse("y,x\n1,2\n3,abc\n"), doctest::Contains("line 3, column 'x'"), Error);
  CHECK_THROWS_WITH_AS(parse("1\n2\n"), doctest::Contains("missing header"), Error);
  CHECK_THROWS_WITH_AS(parse("y,x\n1\n"), doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(current_from_csv(parse("y,z,x\n1,0,1\n2,2,3\n"), ModelKind::normal_linear, true, "c.csv"),
                       doctest::Contains("line 3, column 'z'"), Error);
  CHECK_THROWS_WITH_AS(current_from_csv(parse("y\n"), ModelKind::poisson, true, "c.csv"),
                       doctest::Contains("n >= 1 required"), Error);
  CHECK_THROWS_WITH_AS(current_from_csv(parse("x\n1\n"), ModelKind::poisson, true, "c.csv"),
                       doctest::Contains("'y'"), Error);
  CHECK_THROWS_WITH_AS(current_from_csv(parse("y\n1\n2.5\n"), ModelKind::poisson, true, "c.csv"),
                       doctest::Contains("line 3, column 'y'"), Error);
  CHECK_THROWS_AS(historical_from_csv(parse("y,z\n1,0\n"), ModelKind::normal_linear, true, "h.csv"), Error);
  CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), Error);
}

TEST_CASE("linear CSV gets an intercept and the treatment column last") {
  const auto d = current_from_csv(parse("x1,y,z\n0.5,1,0\n1.5,2,1\n-1,3,1\n2,0,0\n"), ModelKind::normal_linear, true, "c.csv");
  CHECK(d.design_cols() == 3);
  CHECK(d.design()(0, 0) == 1.0);
  CHECK(d.design()(1, 1) == 1.5);
  CHECK(d.design()(1, 2) == 1.0);
}

TEST_CASE("draws CSV round trip is exact") {
  DrawsMatrix d({"a", "b"});
  d.add_row({0.1, 1.0 / 3.0}, 0);
  d.add_row({-2.5e-300, 7.0}, 1);
  std::stringstream ss;
  write_draws_csv(ss, d);
  const auto back = read_draws_csv(ss, "d.csv");
  CHECK(back.columns() == d.columns());
  for (int r = 0; r < 2; ++r) {
    CHECK(back.chain_of(r) == d.chain_of(r));
    for (int j = 0; j < 2; ++j) CHECK(back.at(r, j) == d.at(r, j));
  }
}

TEST_CASE("config parsing rejects unknown keys and echoes the resolved values") {
  CHECK_THROWS_WITH_AS(parse_run_config(json::parse(R"({"leap":{"alpa":[1,1]}})")), doctest::Contains("leap.alpa"), Error);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"extra":{}})")), Error);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"sampler":{"draws":"many"}})")), Error);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"npp":{"a0_prior":{"kind":"cauchy"}}})")), Error);

  auto cfg = parse_run_config(json::parse(R"({"model":{"kind":"linear"},"leap":{"alpha":[0.5,0.5,0.5]},"npp":{"a0_prior":{"kind":"beta","shape1":2,"shape2":3}}})"));
  CHECK(cfg.K == 3);
  cfg.resolve(4);
  CHECK(cfg.linear_priors.size() == 3);
  CHECK(cfg.linear_priors[0].dim() == 4);
  const auto echoed = to_json(cfg);
  auto again = parse_run_config(json::parse(echoed.dump()));
  again.resolve(4);
  CHECK(to_json(again).dump() == echoed.dump());
}

TEST_CASE("cli: enumerate, ssc and exit codes") {
  const std::string cur = test::data_path("counts_current.csv");
  const std::string hist = test::data_path("counts_historical.csv");
  const std::string conf = test::data_path("counts_config.json");

  auto r = run_cli({"--config", conf, "enumerate", "--data", cur, "--historical", hist});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 9);
  CHECK(r.out.rfind("c0,prior_prob,post_prob,prior_mean,post_mean\n", 0) == 0);

  r = run_cli({"enumerate", "--historical", tmp_path("missing.csv")});
  CHECK(r.code == cli::io);

  const std::string h25 = tmp_path("h25.csv");
  {
    std::ofstream f(h25);
    f << "y\n";
    for (int i = 0; i < 25; ++i) f << i % 3 << '\n';
  }
  r = run_cli({"enumerate", "--historical", h25});
  CHECK(r.code == cli::validation);
  CHECK(r.err.find("1048576") != std::string::npos);

  const std::string k1 = tmp_path("k1.json");
  {
    std::ofstream f(k1);
    f << R"({"leap":{"K":1,"alpha":[1]}})";
  }
  r = run_cli({"--config", k1, "enumerate", "--data", cur, "--historical", hist});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

  r = run_cli({"ssc", "--bound", "--n", "137", "--n0", "282"});
  CHECK(json::parse(r.out)["bound"].get<double>() == doctest::Approx(0.4858).epsilon(1e-4));
  r = run_cli({"ssc", "--n0", "3", "--delta", "0.9", "0.9"});
  CHECK(json::parse(r.out)["pmf"].size() == 4);
  r = run_cli({"ssc", "--solve", "--n0", "100", "--low", "20", "--high", "60", "--mass", "0.95"});
  CHECK(json::parse(r.out)["attained"].get<bool>());

  r = run_cli({"fit", "--data", cur, "--historical", hist, "--prior", "power"});
  CHECK(r.code == cli::validation);
  r = run_cli({"frobnicate"});
  CHECK(r.code == cli::validation);

  const std::string bad = tmp_path("bad.json");
  {
    std::ofstream f(bad);
    f << R"({"leap":{"alpha":[0.5,-1]}})";
  }
  r = run_cli({"--config", bad, "fit", "--data", cur, "--historical", hist});
  CHECK(r.code == cli::validation);
  const auto err = json::parse(r.err);
  CHECK(err["violations"][0]["code"] == "alpha_nonpositive");
}

TEST_CASE("cli: fit is deterministic and summarize reproduces its numbers") {
  const std::string cur = test::data_path("counts_current.csv");
  const std::string hist = test::data_path("counts_historical.csv");
  const std::string conf = test::data_path("counts_config.json");
  const std::string draws = tmp_path("draws.csv");
  auto a = run_cli({"--config", conf, "--seed", "7", "fit", "--data", cur, "--historical", hist,
                "--chains", "2", "--draws", "3000", "--emit-draws", draws});
  REQUIRE(a.code == 0);
  auto b = run_cli({"--config", conf, "--seed", "7", "--workers", "2", "fit", "--data", cur,
                "--historical", hist, "--chains", "2", "--draws", "3000"});
  CHECK(a.out == b.out);
  const auto fit = json::parse(a.out);
  CHECK(fit["seed"] == 7);
  CHECK(fit["config"]["sampler"]["seed"] == 7);
  CHECK(fit["ssc"]["pmf"].size() == 4);

  const auto s = run_cli({"summarize", draws});
  REQUIRE(s.code == 0);
  CHECK(json::parse(s.out)["parameters"] == fit["parameters"]);

  const std::string konst = tmp_path("const.csv");
  {
    std::ofstream f(konst);
    f << "chain,x\n1,4\n1,4\n1,4\n";
  }
  const auto c = json::parse(run_cli({"summarize", konst}).out);
  CHECK(c["parameters"][0]["sd"].get<double>() == 0.0);
  const std::string nohdr = tmp_path("nohdr.csv");
  {
    std::ofstream f(nohdr);
    f << "1,4\n1,4\n";
  }
  CHECK(run_cli({"summarize", nohdr}).code == cli::validation);

  // Re-running from the echoed config reproduces the output.
  const std::string echo = tmp_path("echo.json");
  {
    std::ofstream f(echo);
    f << fit["config"].dump();
  }
  auto e = run_cli({"--config", echo, "fit", "--data", cur, "--historical", hist});
  const auto ej = json::parse(e.out);
  CHECK(ej["parameters"] == fit["parameters"]);
}

TEST_CASE("cli: npbpp and reference plumbing") {
  const std::string cur = tmp_path("lin_cur.csv"), hist = tmp_path("lin_hist.csv");
  {
    Rng rng(1);
    std::ofstream c(cur), h(hist);
    c << "y,z,x\n";
    h << "y,x\n";
    for (int i = 0; i < 40; ++i) {
      const double x = standard_normal(rng);
      c << 1.0 + x - 2.0 * (i % 2) + standard_normal(rng) << ',' << i % 2 << ',' << x << '\n';
      const double x0 = standard_normal(rng);
      h << 1.0 + x0 + standard_normal(rng) << ',' << x0 << '\n';
    }
  }
  const std::string conf = tmp_path("lin.json");
  {
    std::ofstream f(conf);
    f << R"({"model":{"kind":"linear"},"sampler":{"draws":2000,"burn_in":500}})";
  }
  auto ref = run_cli({"--config", conf, "--seed", "3", "fit", "--data", cur, "--prior", "reference"});
  REQUIRE(ref.code == 0);
  const auto rj = json::parse(ref.out);
  const auto data = read_current_csv(cur, ModelKind::normal_linear);
  auto cfg = read_run_config(conf);
  cfg.sampler.seed = 3;
  const auto direct = summarize(reference_posterior(data, cfg.reference, cfg.sampler.chain_settings()));
  CHECK(rj["parameters"][0]["mean"].get<double>() == direct.parameters[0].mean);

  auto npp = run_cli({"--config", conf, "fit", "--data", cur, "--historical", hist, "--prior", "npbpp"});
  REQUIRE(npp.code == 0);
  CHECK(json::parse(npp.out)["diagnostics"].contains("a0_posterior_mean"));
  auto leap = run_cli({"--config", conf, "fit", "--data", cur, "--historical", hist});
  REQUIRE(leap.code == 0);
  CHECK(run_cli({"fit", "--data", test::data_path("counts_current.csv"), "--prior", "reference"}).code == cli::validation);
}

TEST_CASE("cli: simulate validates prior names") {
  const auto r = run_cli({"simulate", "--reps", "1", "--priors", "leap,bogus"});
  CHECK(r.code == cli::validation);
  CHECK(r.err.find("leap, npbpp, reference") != std::string::npos);
}
