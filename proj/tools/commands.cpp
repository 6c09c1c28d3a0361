#include "commands.hpp"

#include "leap/comparators.hpp"
#include "leap/config.hpp"
#include "leap/diagnostics.hpp"
#include "leap/elicitation.hpp"
#include "leap/error.hpp"
#include "leap/gibbs.hpp"
#include "leap/io.hpp"
#include "leap/oracle.hpp"
#include "leap/simulate.hpp"
#include "leap/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace leap::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  std::string config;
  int workers = 1;
};

/// Thrown when validate_config reports problems; carries the full list.
struct ConfigViolations {
  std::vector<Violation> violations;
};

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out == "-" || g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw io_error("cannot open '" + g.out + "' for writing");
  f << text;
  if (!f) throw io_error("failed writing '" + g.out + "'");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw io_error("failed writing '" + path + "'");
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ojson parameters_json(const PosteriorSummary& s) {
  ojson arr = ojson::array();
  for (const auto& p : s.parameters)
    arr.push_back({{"name", p.name},
                   {"mean", p.mean},
                   {"sd", p.sd},
                   {"ci_low", p.ci_low},
                   {"ci_high", p.ci_high},
                   {"ess", p.ess},
                   {"mcse", p.mcse}});
  return arr;
}

ojson meta_json(const ChainMeta& m) {
  ojson diag = ojson::object();
  for (const auto& [k, v] : m.diagnostics) diag[k] = v;
  return {{"warnings", m.warnings}, {"diagnostics", std::move(diag)}};
}

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : read_run_config(g.config);
  if (g.seed) cfg.sampler.seed = *g.seed;
  return cfg;
}

void require_leap_valid(const LeapConfig& leap, const Dataset* data,
                        const HistoricalDataset& hist) {
  const auto report = validate_config(leap, data, hist);
  if (!report.ok()) throw ConfigViolations{report.violations};
}

// ------------------------------------------------------------------- fit

struct FitArgs {
  std::string data, historical, model, prior = "leap", emit_draws;
  std::optional<int> chains, draws, burn_in;
};

std::string cmd_fit(const Globals& g, const FitArgs& a) {
  RunConfig cfg = load_config(g);
  if (!a.model.empty()) cfg.model = parse_model_kind(a.model);
  if (a.chains) cfg.sampler.chains = *a.chains;
  if (a.draws) cfg.sampler.draws = *a.draws;
  if (a.burn_in) cfg.sampler.burn_in = *a.burn_in;
  if (a.prior != "leap" && a.prior != "npbpp" && a.prior != "reference")
    throw validation_error("unknown prior '" + a.prior + "' (supported: leap, npbpp, reference)");
  if (a.prior == "reference" && cfg.model != ModelKind::normal_linear)
    throw validation_error("the reference prior is only defined for the linear model");
  if (a.prior != "reference" && a.historical.empty())
    throw validation_error("--historical is required for prior '" + a.prior + "'");

  const Dataset data = read_current_csv(a.data, cfg.model, cfg.intercept);
  std::optional<HistoricalDataset> hist;
  if (!a.historical.empty()) hist = read_historical_csv(a.historical, cfg.model, cfg.intercept);
  cfg.resolve(data.design_cols());

  DrawsMatrix draws;
  ojson ssc = nullptr;
  const auto& s = cfg.sampler;
  if (a.prior == "leap") {
    const LeapConfig leap = cfg.leap();
    require_leap_valid(leap, &data, *hist);
    draws = run_chains(&data, *hist, leap, s.chain_settings(false), s.chains, g.workers);
    check_gamma_rows(draws, leap.K, leap.trunc_a, leap.trunc_b);
    const auto post = posterior_ssc_summary(draws);
    ssc = {{"mean", post.mean}, {"pmf", post.pmf.probs}};
  } else if (a.prior == "npbpp") {
    draws = npp_posterior(data, *hist, cfg.npp(), s.draws * s.chains, s.seed);
  } else {
    draws = reference_posterior(data, cfg.reference, s.chain_settings(false), s.chains, g.workers);
  }

  const auto summary = summarize(draws);
  const auto d = dic(draws, data, cfg.model);
  if (!a.emit_draws.empty()) {
    std::ostringstream os;
    write_draws_csv(os, draws);
    write_file(a.emit_draws, os.str());
  }
  ojson doc{{"version", std::string(kVersion)},
            {"command", "fit"},
            {"prior", a.prior},
            {"seed", s.seed},
            {"inputs", {{"data", a.data}, {"historical", a.historical}}},
            {"draws", draws.rows()},
            {"parameters", parameters_json(summary)},
            {"dic",
             {{"dic", d.dic},
              {"mean_deviance", d.mean_deviance},
              {"deviance_at_mean", d.deviance_at_mean},
              {"pd", d.pd}}},
            {"ssc", ssc}};
  const auto meta = meta_json(draws.meta);
  doc["warnings"] = meta["warnings"];
  doc["diagnostics"] = meta["diagnostics"];
  doc["config"] = to_json(cfg);
  return dump(doc);
}

// ------------------------------------------------------------- enumerate

struct EnumerateArgs {
  std::string data, historical, model, summary;
};

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

std::string cmd_enumerate(const Globals& g, const EnumerateArgs& a) {
  RunConfig cfg = load_config(g);
  if (!a.model.empty()) cfg.model = parse_model_kind(a.model);
  std::optional<Dataset> data;
  if (!a.data.empty()) data = read_current_csv(a.data, cfg.model, cfg.intercept);
  const HistoricalDataset hist = read_historical_csv(a.historical, cfg.model, cfg.intercept);
  cfg.resolve(data ? data->design_cols() : static_cast<int>(hist.X().cols()));
  const LeapConfig leap = cfg.leap();
  const Dataset* dp = data ? &*data : nullptr;
  require_leap_valid(leap, dp, hist);
  partition_count(leap.K, hist.n0());

  const PartitionTable table =
      data ? posterior_partition_table(*data, hist, leap) : prior_partition_table(hist, leap);
  const auto dim = table.rows.empty() ? 0 : table.rows.front().cond_prior_mean.size();
  auto mean_headers = [&](const std::string& base) {
    std::string h;
    if (cfg.model == ModelKind::poisson) return "," + base;
    for (Eigen::Index j = 0; j < dim; ++j) h += "," + base + "[" + std::to_string(j + 1) + "]";
    return h;
  };

  std::ostringstream csv;
  csv << "c0,prior_prob";
  if (table.has_posterior) csv << ",post_prob";
  csv << mean_headers("prior_mean");
  if (table.has_posterior) csv << mean_headers("post_mean");
  csv << '\n';
  for (const auto& r : table.rows) {
    csv << '"' << r.c0.str() << '"' << ',' << cell(r.prior_prob);
    if (table.has_posterior) csv << ',' << cell(r.posterior_prob);
    for (Eigen::Index j = 0; j < r.cond_prior_mean.size(); ++j) csv << ',' << cell(r.cond_prior_mean(j));
    if (table.has_posterior)
      for (Eigen::Index j = 0; j < r.cond_post_mean.size(); ++j) csv << ',' << cell(r.cond_post_mean(j));
    csv << '\n';
  }

  if (!a.summary.empty()) {
    ojson doc{{"version", std::string(kVersion)},
              {"command", "enumerate"},
              {"inputs", {{"data", a.data}, {"historical", a.historical}}},
              {"partitions", table.rows.size()}};
    if (table.has_prior) {
      doc["prior_mean"] = vec_json(partition_averaged_mean(table, Which::prior));
      doc["prior_ssc"] = ssc_marginal_from_table(table, Which::prior).probs;
    }
    if (table.has_posterior) {
      doc["posterior_mean"] = vec_json(partition_averaged_mean(table, Which::posterior));
      doc["posterior_ssc"] = ssc_marginal_from_table(table, Which::posterior).probs;
    }
    doc["config"] = to_json(cfg);
    write_file(a.summary, dump(doc));
  }
  return csv.str();
}

// ------------------------------------------------------------------- ssc

struct SscArgs {
  int n0 = 0;
  std::vector<double> delta;
  std::optional<double> mass;
  bool solve = false, bound = false;
  int low = 0, high = 0, n = 0;
};

std::string cmd_ssc(const SscArgs& a) {
  ojson doc{{"version", std::string(kVersion)}, {"command", "ssc"}};
  if (a.bound) {
    doc["n"] = a.n;
    doc["n0"] = a.n0;
    doc["bound"] = truncation_bound(a.n, a.n0);
    return dump(doc);
  }
  if (a.solve) {
    const double mass = a.mass.value_or(0.95);
    const auto sol = solve_beta_hyperparams(a.n0, a.low, a.high, mass);
    doc["n0"] = a.n0;
    doc["target"] = {{"low", a.low}, {"high", a.high}, {"mass", mass}};
    doc["delta"] = {sol.delta01, sol.delta02};
    doc["achieved"] = {{"low", sol.achieved.low}, {"high", sol.achieved.high}};
    doc["attained"] = sol.attained;
    doc["refinement_steps"] = sol.refinement_steps;
    return dump(doc);
  }
  if (a.delta.size() != 2) throw validation_error("--delta needs two shape values");
  const auto pmf = ssc_prior_pmf_beta(a.n0, a.delta[0], a.delta[1]);
  doc["n0"] = a.n0;
  doc["delta"] = a.delta;
  doc["pmf"] = pmf.probs;
  doc["mean"] = pmf.mean();
  if (a.mass) {
    const auto iv = ssc_interval(pmf, *a.mass);
    doc["interval"] = {{"mass", *a.mass}, {"low", iv.low}, {"high", iv.high}};
  }
  return dump(doc);
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario = "full", priors = "leap,npbpp,reference", estimates;
  SimScenario s;
  SimFitSettings fit;
};

std::string cmd_simulate(const Globals& g, SimulateArgs a) {
  a.s.exchangeability = parse_exchangeability(a.scenario);
  if (g.seed) a.s.seed = *g.seed;
  a.fit.priors.clear();
  std::stringstream ss(a.priors);
  for (std::string name; std::getline(ss, name, ',');)
    if (!name.empty()) a.fit.priors.push_back(name);
  const SimResult res = run_simulation(a.s, a.fit, g.workers);

  ojson metrics = ojson::array();
  for (std::size_t k = 0; k < res.priors.size(); ++k)
    metrics.push_back({{"prior", res.priors[k]},
                       {"pab", res.metrics[k].pab},
                       {"mse", res.metrics[k].mse},
                       {"coverage", res.metrics[k].coverage}});
  ojson doc{{"version", std::string(kVersion)},
            {"command", "simulate"},
            {"seed", a.s.seed},
            {"scenario",
             {{"exchangeability", std::string(to_string(a.s.exchangeability))},
              {"q", a.s.q},
              {"n_extra", a.s.n_extra},
              {"n0", a.s.n0},
              {"reps", a.s.reps},
              {"sigma", a.s.sigma}}},
            {"fit",
             {{"iterations", a.fit.iterations},
              {"burn_in", a.fit.burn_in},
              {"npp_draws", a.fit.npp_draws},
              {"npp_grid", a.fit.npp_grid},
              {"leap_alpha", a.fit.leap_alpha},
              {"reference", {{"coef_sd", a.fit.reference.coef_sd},
                             {"sigma_sd", a.fit.reference.sigma_sd}}}}},
            {"truth", kSimTreatment},
            {"metrics", std::move(metrics)}};
  if (!a.estimates.empty()) {
    std::ostringstream csv;
    csv << "prior,rep,mean,ci_low,ci_high\n";
    for (std::size_t k = 0; k < res.priors.size(); ++k)
      for (std::size_t r = 0; r < res.estimates[k].size(); ++r) {
        const auto& e = res.estimates[k][r];
        csv << res.priors[k] << ',' << r + 1 << ',' << format_double(e.mean) << ','
            << format_double(e.ci_low) << ',' << format_double(e.ci_high) << '\n';
      }
    write_file(a.estimates, csv.str());
  }
  return dump(doc);
}

// ------------------------------------------------------------- summarize

std::string cmd_summarize(const std::string& path, double mass) {
  const DrawsMatrix draws = read_draws_file(path);
  ojson doc{{"version", std::string(kVersion)},
            {"command", "summarize"},
            {"source", path},
            {"draws", draws.rows()},
            {"parameters", parameters_json(summarize(draws, mass))}};
  return dump(doc);
}

int fail(std::ostream& err, int code, const std::string& kind, const std::string& msg,
         const std::vector<Violation>& violations = {}) {
  ojson doc{{"error", kind}, {"message", msg}};
  if (!violations.empty()) {
    ojson list = ojson::array();
    for (const auto& v : violations) list.push_back({{"code", v.code}, {"message", v.message}});
    doc["violations"] = std::move(list);
  }
  err << doc.dump(2) << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent exchangeability prior: fitting, enumeration, elicitation and simulation",
               "leap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output path ('-' for stdout)");
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--workers", g.workers, "worker threads (does not change results)")
      ->check(CLI::PositiveNumber);
  app.fallthrough();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "fit a prior and summarize the posterior");
  c_fit->add_option("--data", fit.data, "current data CSV")->required();
  c_fit->add_option("--historical", fit.historical, "historical data CSV");
  c_fit->add_option("--model", fit.model, "poisson or linear (overrides config)");
  c_fit->add_option("--prior", fit.prior, "leap, npbpp or reference");
  c_fit->add_option("--chains", fit.chains, "number of chains")->check(CLI::PositiveNumber);
  c_fit->add_option("--draws", fit.draws, "retained draws per chain")->check(CLI::PositiveNumber);
  c_fit->add_option("--burn-in", fit.burn_in, "burn-in iterations")->check(CLI::NonNegativeNumber);
  c_fit->add_option("--emit-draws", fit.emit_draws, "write draws CSV here");

  EnumerateArgs en;
  auto* c_en = app.add_subcommand("enumerate", "exact partition table by enumeration");
  c_en->add_option("--data", en.data, "current data CSV (omit for the prior table)");
  c_en->add_option("--historical", en.historical, "historical data CSV")->required();
  c_en->add_option("--model", en.model, "poisson or linear (overrides config)");
  c_en->add_option("--summary", en.summary, "write summary JSON here");

  SscArgs ssc;
  auto* c_ssc = app.add_subcommand("ssc", "sample size contribution tools");
  c_ssc->add_option("--n0", ssc.n0, "historical sample size")->required();
  c_ssc->add_option("--delta", ssc.delta, "beta shapes of gamma1")->expected(2);
  c_ssc->add_option("--mass", ssc.mass, "central interval mass");
  c_ssc->add_flag("--solve", ssc.solve, "solve beta shapes for a target interval");
  c_ssc->add_option("--low", ssc.low, "target interval low end");
  c_ssc->add_option("--high", ssc.high, "target interval high end");
  c_ssc->add_flag("--bound", ssc.bound, "truncation bound min(n / n0, 1)");
  c_ssc->add_option("--n", ssc.n, "current sample size");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "replication study of the linear design");
  c_sim->add_option("--scenario", sim.scenario, "full, half or none");
  c_sim->add_option("--q", sim.s.q, "shift for unexchangeable subjects");
  c_sim->add_option("--n-extra", sim.s.n_extra, "current sample size minus n0");
  c_sim->add_option("--n0", sim.s.n0, "historical sample size");
  c_sim->add_option("--reps", sim.s.reps, "replications");
  c_sim->add_option("--sigma", sim.s.sigma, "residual SD of the generator");
  c_sim->add_option("--priors", sim.priors, "comma separated subset of leap,npbpp,reference");
  c_sim->add_option("--iterations", sim.fit.iterations, "chain length incl. burn-in");
  c_sim->add_option("--burn-in", sim.fit.burn_in, "burn-in iterations");
  c_sim->add_option("--npp-draws", sim.fit.npp_draws, "NPBPP draws per replication");
  c_sim->add_option("--estimates", sim.estimates, "write per-replication CSV here");

  std::string draws_path;
  double mass = 0.95;
  auto* c_sum = app.add_subcommand("summarize", "summarize a draws CSV");
  c_sum->add_option("draws", draws_path, "draws CSV")->required();
  c_sum->add_option("--mass", mass, "credible interval mass");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return fail(err, validation, "usage", e.what());
  }
  if (seed_opt->count()) g.seed = seed;

  try {
    std::string text;
    if (c_fit->parsed()) text = cmd_fit(g, fit);
    else if (c_en->parsed()) text = cmd_enumerate(g, en);
    else if (c_ssc->parsed()) text = cmd_ssc(ssc);
    else if (c_sim->parsed()) text = cmd_simulate(g, sim);
    else text = cmd_summarize(draws_path, mass);
    emit(g, out, text);
    return ok;
  } catch (const ConfigViolations& v) {
    return fail(err, validation, "validation", "invalid configuration", v.violations);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::validation: return fail(err, validation, "validation", e.what());
      case ErrorKind::numerical: return fail(err, numerical, "numerical", e.what());
      case ErrorKind::io: return fail(err, io, "io", e.what());
    }
  } catch (const std::exception& e) {
    return fail(err, numerical, "numerical", e.what());
  }
  return numerical;
}

}  // namespace leap::cli
