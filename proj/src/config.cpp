#include "leap/config.hpp"

#include "leap/error.hpp"

#include <fstream>
#include <set>

namespace leap {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ChainSettings SamplerConfig::chain_settings(bool keep_partitions) const {
  ChainSettings s;
  s.iterations = burn_in + draws * thin;
  s.burn_in = burn_in;
  s.thin = thin;
  s.seed = seed;
  s.keep_partitions = keep_partitions;
  return s;
}

void RunConfig::resolve(int p) {
  if (alpha.empty()) alpha.assign(static_cast<std::size_t>(K), 1.0);
  if (model == ModelKind::poisson) {
    if (poisson_priors.empty()) poisson_priors.assign(static_cast<std::size_t>(K), {});
    if (!npp_poisson) npp_poisson = PoissonGammaPrior{};
  } else {
    if (linear_priors.empty())
      linear_priors.assign(static_cast<std::size_t>(K), NormalGammaPrior::vague(p, default_precision));
    if (!npp_linear) npp_linear = NormalGammaPrior::vague(p, default_precision);
  }
}

LeapConfig RunConfig::leap() const {
  LeapConfig c;
  c.model = model;
  c.K = K;
  c.alpha = alpha;
  c.trunc_a = trunc_a;
  c.trunc_b = trunc_b;
  c.poisson = poisson_priors;
  c.linear = linear_priors;
  return c;
}

NppConfig RunConfig::npp() const {
  NppConfig c;
  c.model = model;
  if (npp_poisson) c.poisson = *npp_poisson;
  if (npp_linear) c.linear = *npp_linear;
  c.a0_prior = a0_prior;
  c.grid_size = grid_size;
  return c;
}

namespace {

void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw validation_error("config: '" + path + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw validation_error("config: unknown key '" + path + "." + key + "'");
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw validation_error("config: '" + path + "." + key + "' has the wrong type (" +
                           e.what() + ")");
  }
}

template <class T>
void maybe(const json& obj, const std::string& key, const std::string& path, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, path);
}

PoissonGammaPrior parse_gamma(const json& j, const std::string& path) {
  only_keys(j, path, {"shape", "rate"});
  PoissonGammaPrior p;
  maybe(j, "shape", path, p.shape);
  maybe(j, "rate", path, p.rate);
  return p;
}

NormalGammaPrior parse_normal_gamma(const json& j, const std::string& path) {
  only_keys(j, path, {"mean", "precision", "delta", "xi"});
  if (!j.contains("mean") || !j.contains("precision"))
    throw validation_error("config: '" + path + "' needs 'mean' and 'precision'");
  const auto mean = get<std::vector<double>>(j, "mean", path);
  const auto prec = get<std::vector<std::vector<double>>>(j, "precision", path);
  const auto p = static_cast<Eigen::Index>(mean.size());
  NormalGammaPrior pr;
  pr.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), p);
  if (static_cast<Eigen::Index>(prec.size()) != p)
    throw validation_error("config: '" + path + ".precision' must be " + std::to_string(p) +
                           " x " + std::to_string(p));
  pr.precision.resize(p, p);
  for (Eigen::Index r = 0; r < p; ++r) {
    if (static_cast<Eigen::Index>(prec[static_cast<std::size_t>(r)].size()) != p)
      throw validation_error("config: '" + path + ".precision' must be " + std::to_string(p) +
                             " x " + std::to_string(p));
    for (Eigen::Index c = 0; c < p; ++c)
      pr.precision(r, c) = prec[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  maybe(j, "delta", path, pr.delta);
  maybe(j, "xi", path, pr.xi);
  return pr;
}

ojson gamma_json(const PoissonGammaPrior& p) { return {{"shape", p.shape}, {"rate", p.rate}}; }

ojson normal_gamma_json(const NormalGammaPrior& p) {
  ojson prec = ojson::array();
  for (Eigen::Index r = 0; r < p.precision.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < p.precision.cols(); ++c) row.push_back(p.precision(r, c));
    prec.push_back(std::move(row));
  }
  return {{"mean", std::vector<double>(p.mean.data(), p.mean.data() + p.mean.size())},
          {"precision", std::move(prec)},
          {"delta", p.delta},
          {"xi", p.xi}};
}

A0Prior parse_a0(const json& j, const std::string& path) {
  only_keys(j, path, {"kind", "upper", "shape1", "shape2", "value"});
  const auto kind = j.contains("kind") ? get<std::string>(j, "kind", path) : "uniform";
  if (kind == "uniform") return A0Prior::uniform();
  if (kind == "truncated_uniform") return A0Prior::truncated(get<double>(j, "upper", path));
  if (kind == "beta")
    return A0Prior::beta(get<double>(j, "shape1", path), get<double>(j, "shape2", path));
  if (kind == "fixed") return A0Prior::fixed(get<double>(j, "value", path));
  throw validation_error("config: unknown a0 prior kind '" + kind +
                         "' (expected uniform, truncated_uniform, beta or fixed)");
}

ojson a0_json(const A0Prior& a) {
  ojson j{{"kind", std::string(to_string(a.kind))}};
  switch (a.kind) {
    case A0Prior::Kind::uniform: break;
    case A0Prior::Kind::truncated_uniform: j["upper"] = a.p1; break;
    case A0Prior::Kind::beta: j["shape1"] = a.p1; j["shape2"] = a.p2; break;
    case A0Prior::Kind::fixed: j["value"] = a.p1; break;
  }
  return j;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  only_keys(doc, "config", {"model", "leap", "npp", "reference", "sampler"});
  if (doc.contains("model")) {
    const auto& m = doc["model"];
    only_keys(m, "model", {"kind", "intercept"});
    if (m.contains("kind")) cfg.model = parse_model_kind(get<std::string>(m, "kind", "model"));
    maybe(m, "intercept", "model", cfg.intercept);
  }
  if (doc.contains("leap")) {
    const auto& l = doc["leap"];
    only_keys(l, "leap", {"K", "alpha", "truncation", "priors", "default_precision"});
    maybe(l, "alpha", "leap", cfg.alpha);
    if (l.contains("K")) cfg.K = get<int>(l, "K", "leap");
    else if (!cfg.alpha.empty()) cfg.K = static_cast<int>(cfg.alpha.size());
    if (l.contains("truncation")) {
      const auto& t = l["truncation"];
      only_keys(t, "leap.truncation", {"a", "b"});
      maybe(t, "a", "leap.truncation", cfg.trunc_a);
      maybe(t, "b", "leap.truncation", cfg.trunc_b);
    }
    maybe(l, "default_precision", "leap", cfg.default_precision);
    if (l.contains("priors")) {
      if (!l["priors"].is_array()) throw validation_error("config: 'leap.priors' must be an array");
      for (std::size_t k = 0; k < l["priors"].size(); ++k) {
        const std::string path = "leap.priors[" + std::to_string(k) + "]";
        if (cfg.model == ModelKind::poisson)
          cfg.poisson_priors.push_back(parse_gamma(l["priors"][k], path));
        else
          cfg.linear_priors.push_back(parse_normal_gamma(l["priors"][k], path));
      }
    }
  }
  if (doc.contains("npp")) {
    const auto& n = doc["npp"];
    only_keys(n, "npp", {"a0_prior", "grid_size", "initial_prior"});
    if (n.contains("a0_prior")) cfg.a0_prior = parse_a0(n["a0_prior"], "npp.a0_prior");
    maybe(n, "grid_size", "npp", cfg.grid_size);
    if (n.contains("initial_prior")) {
      if (cfg.model == ModelKind::poisson)
        cfg.npp_poisson = parse_gamma(n["initial_prior"], "npp.initial_prior");
      else
        cfg.npp_linear = parse_normal_gamma(n["initial_prior"], "npp.initial_prior");
    }
  }
  if (doc.contains("reference")) {
    const auto& r = doc["reference"];
    only_keys(r, "reference", {"coef_sd", "sigma_sd"});
    maybe(r, "coef_sd", "reference", cfg.reference.coef_sd);
    maybe(r, "sigma_sd", "reference", cfg.reference.sigma_sd);
  }
  if (doc.contains("sampler")) {
    const auto& s = doc["sampler"];
    only_keys(s, "sampler", {"draws", "burn_in", "thin", "chains", "seed"});
    maybe(s, "draws", "sampler", cfg.sampler.draws);
    maybe(s, "burn_in", "sampler", cfg.sampler.burn_in);
    maybe(s, "thin", "sampler", cfg.sampler.thin);
    maybe(s, "chains", "sampler", cfg.sampler.chains);
    maybe(s, "seed", "sampler", cfg.sampler.seed);
  }
  const auto& s = cfg.sampler;
  if (s.draws < 1 || s.burn_in < 0 || s.thin < 1 || s.chains < 1)
    throw validation_error("config: sampler needs draws >= 1, burn_in >= 0, thin >= 1, chains >= 1");
  return cfg;
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw validation_error("config '" + path + "': " + e.what());
  }
  return parse_run_config(doc);
}

ojson to_json(const RunConfig& cfg) {
  ojson priors = ojson::array();
  if (cfg.model == ModelKind::poisson)
    for (const auto& p : cfg.poisson_priors) priors.push_back(gamma_json(p));
  else
    for (const auto& p : cfg.linear_priors) priors.push_back(normal_gamma_json(p));

  ojson npp{{"a0_prior", a0_json(cfg.a0_prior)}, {"grid_size", cfg.grid_size}};
  if (cfg.model == ModelKind::poisson && cfg.npp_poisson)
    npp["initial_prior"] = gamma_json(*cfg.npp_poisson);
  if (cfg.model == ModelKind::normal_linear && cfg.npp_linear)
    npp["initial_prior"] = normal_gamma_json(*cfg.npp_linear);

  return ojson{
      {"model", {{"kind", std::string(to_string(cfg.model))}, {"intercept", cfg.intercept}}},
      {"leap",
       {{"K", cfg.K},
        {"alpha", cfg.alpha},
        {"truncation", {{"a", cfg.trunc_a}, {"b", cfg.trunc_b}}},
        {"priors", std::move(priors)},
        {"default_precision", cfg.default_precision}}},
      {"npp", std::move(npp)},
      {"reference", {{"coef_sd", cfg.reference.coef_sd}, {"sigma_sd", cfg.reference.sigma_sd}}},
      {"sampler",
       {{"draws", cfg.sampler.draws},
        {"burn_in", cfg.sampler.burn_in},
        {"thin", cfg.sampler.thin},
        {"chains", cfg.sampler.chains},
        {"seed", cfg.sampler.seed}}}};
}

}  // namespace leap
