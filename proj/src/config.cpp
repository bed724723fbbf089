#include "ldnn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ldnn {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

std::string joined(const std::string& parent, const char* key) {
  return parent.empty() ? key : parent + "." + key;
}

const json& require(const json& j, const char* key, const std::string& parent) {
  const auto it = j.find(key);
  if (it == j.end()) fail(joined(parent, key), "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

InitSpec parse_init(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
  InitSpec init;
  const std::string kind = as_string(require(j, "kind", field), field + ".kind");
  if (kind == "ones") {
    init.kind = InitKind::kOnes;
  } else if (kind == "gaussian") {
    init.kind = InitKind::kGaussian;
    init.stddev = as_number(require(j, "stddev", field), field + ".stddev");
    if (!(init.stddev > 0.0)) fail(field + ".stddev", "must be positive");
  } else if (kind == "constant") {
    init.kind = InitKind::kConstant;
    init.value = as_number(require(j, "value", field), field + ".value");
    if (init.value == 0.0) fail(field + ".value", "must be nonzero (weights start at zero otherwise)");
  } else {
    fail(field + ".kind", "unknown initialization kind '" + kind + "'");
  }
  return init;
}

PriorSpec parse_prior(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
  PriorSpec prior;
  const std::string kind = as_string(require(j, "kind", field), field + ".kind");
  if (kind == "bernoulli" || kind == "group_bernoulli") {
    prior.kind = kind == "bernoulli" ? PriorKind::kBernoulli : PriorKind::kGroupBernoulli;
    prior.p = as_number(require(j, "p", field), field + ".p");
    if (!(prior.p >= 0.0 && prior.p <= 1.0)) fail(field + ".p", "must be in [0, 1]");
  } else if (kind == "gaussian") {
    prior.kind = PriorKind::kGaussian;
    prior.mean = as_number(require(j, "mean", field), field + ".mean");
    prior.stddev = as_number(require(j, "stddev", field), field + ".stddev");
    if (!(prior.stddev >= 0.0)) fail(field + ".stddev", "must be nonnegative");
  } else if (kind == "point_mass") {
    prior.kind = PriorKind::kPointMass;
    prior.value = as_number(require(j, "value", field), field + ".value");
  } else if (kind == "particle_file") {
    prior.kind = PriorKind::kParticleFile;
    prior.path = as_string(require(j, "path", field), field + ".path");
    if (prior.path.empty()) fail(field + ".path", "must be a nonempty path");
  } else {
    fail(field + ".kind", "unknown prior kind '" + kind + "'");
  }
  if (prior.kind == PriorKind::kParticleFile) {
    // The file rows carry V; an init block would be dead configuration.
    if (j.contains("init")) fail(field + ".init", "not applicable to particle_file priors");
  } else {
    prior.init = parse_init(require(j, "init", field), field + ".init");
  }
  return prior;
}

ReweightSpec parse_psi(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
  ReweightSpec spec;
  const std::string kind = as_string(require(j, "kind", field), field + ".kind");
  try {
    spec.kind = psi_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    fail(field + ".kind", e.what());
  }
  if (spec.kind == PsiKind::kIrlsEpsAlpha) {
    if (j.contains("eps")) {
      spec.eps = as_number(j.at("eps"), field + ".eps");
      if (!(spec.eps > 0.0)) fail(field + ".eps", "must be positive");
    }
    if (j.contains("alpha")) spec.alpha = as_number(j.at("alpha"), field + ".alpha");
  } else if (j.contains("eps") || j.contains("alpha")) {
    fail(field, "eps/alpha apply only to irls_eps_alpha");
  }
  return spec;
}

std::vector<MetricKind> parse_metrics(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of metric names");
  if (j.empty()) fail(field, "must name at least one metric");
  std::vector<MetricKind> metrics;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = as_string(j[i], field + "[" + std::to_string(i) + "]");
    const MetricKind m = metric_from_string(name);
    if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) metrics.push_back(m);
  }
  return metrics;
}

json init_json(const InitSpec& init) {
  json j{{"kind", to_string(init.kind)}};
  if (init.kind == InitKind::kGaussian) j["stddev"] = init.stddev;
  if (init.kind == InitKind::kConstant) j["value"] = init.value;
  return j;
}

json prior_json(const PriorSpec& prior) {
  json j{{"kind", to_string(prior.kind)}};
  switch (prior.kind) {
    case PriorKind::kBernoulli:
    case PriorKind::kGroupBernoulli:
      j["p"] = prior.p;
      break;
    case PriorKind::kGaussian:
      j["mean"] = prior.mean;
      j["stddev"] = prior.stddev;
      break;
    case PriorKind::kPointMass:
      j["value"] = prior.value;
      break;
    case PriorKind::kParticleFile:
      j["path"] = prior.path;
      break;
  }
  if (prior.kind != PriorKind::kParticleFile) j["init"] = init_json(prior.init);
  return j;
}

json psi_json(const ReweightSpec& spec) {
  json j{{"kind", to_string(spec.kind)}};
  if (spec.kind == PsiKind::kIrlsEpsAlpha) {
    j["eps"] = spec.eps;
    j["alpha"] = spec.alpha;
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("top level: expected a JSON object");

  ExperimentConfig cfg;
  cfg.n = as_int(require(j, "n", ""), "n");
  if (cfg.n <= 0) fail("n", "must be a positive integer");
  cfg.d = as_int(require(j, "d", ""), "d");
  if (cfg.d <= 0) fail("d", "must be a positive integer");
  cfg.sigma = as_number(require(j, "sigma", ""), "sigma");
  if (!(cfg.sigma >= 0.0)) fail("sigma", "must be nonnegative");
  cfg.lambda = as_number(require(j, "lambda", ""), "lambda");
  if (!(cfg.lambda > 0.0)) fail("lambda", "must be positive");
  cfg.b = as_int(require(j, "b", ""), "b");
  if (cfg.b <= 0) fail("b", "must be a positive integer");
  if (cfg.d % cfg.b != 0) {
    fail("d", "not divisible by b (d=" + std::to_string(cfg.d) + ", b=" + std::to_string(cfg.b) + ")");
  }
  cfg.T = as_int(require(j, "T", ""), "T");
  if (cfg.T < 0) fail("T", "must be nonnegative");
  cfg.trials = as_int(require(j, "trials", ""), "trials");
  if (cfg.trials <= 0) fail("trials", "must be a positive integer");
  {
    const json& s = require(j, "seed", "");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("particles")) {
    const json& p = j.at("particles");
    if (!p.is_number_integer()) fail("particles", "expected an integer");
    cfg.particles = p.get<std::int64_t>();
    if (cfg.particles <= 0) fail("particles", "must be positive");
  }
  cfg.psi = parse_psi(require(j, "psi", ""), "psi");
  cfg.prior = parse_prior(require(j, "prior", ""), "prior");
  if (j.contains("metrics")) cfg.metrics = parse_metrics(j.at("metrics"), "metrics");

  if (j.contains("kappa")) fail("kappa", "derived from d/n; do not set it directly");
  cfg.kappa = static_cast<double>(cfg.d) / static_cast<double>(cfg.n);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
  json j{
      {"n", cfg.n},       {"d", cfg.d}, {"sigma", cfg.sigma}, {"lambda", cfg.lambda},
      {"b", cfg.b},       {"T", cfg.T}, {"psi", psi_json(cfg.psi)},
      {"prior", prior_json(cfg.prior)},
  };
  std::vector<std::string> names;
  names.reserve(cfg.metrics.size());
  for (MetricKind m : cfg.metrics) names.emplace_back(to_string(m));
  std::sort(names.begin(), names.end());
  j["metrics"] = names;
  return j.dump();  // nlohmann keeps object keys sorted, so this is canonical
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = canonical_config_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

const char* to_string(MetricKind m) {
  return m == MetricKind::kL1Error ? "l1_error" : "squared_error";
}

MetricKind metric_from_string(const std::string& name) {
  if (name == "l1_error") return MetricKind::kL1Error;
  if (name == "squared_error") return MetricKind::kSquaredError;
  throw ConfigError("metrics: unknown metric '" + name + "'");
}

const char* to_string(PriorKind k) {
  switch (k) {
    case PriorKind::kBernoulli: return "bernoulli";
    case PriorKind::kGroupBernoulli: return "group_bernoulli";
    case PriorKind::kGaussian: return "gaussian";
    case PriorKind::kPointMass: return "point_mass";
    case PriorKind::kParticleFile: return "particle_file";
  }
  return "?";
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::kOnes: return "ones";
    case InitKind::kGaussian: return "gaussian";
    case InitKind::kConstant: return "constant";
  }
  return "?";
}

std::string describe(const PriorSpec& prior) {
  std::ostringstream os;
  os << to_string(prior.kind);
  switch (prior.kind) {
    case PriorKind::kBernoulli:
    case PriorKind::kGroupBernoulli:
      os << "(p=" << prior.p << ")";
      break;
    case PriorKind::kGaussian:
      os << "(mean=" << prior.mean << ",stddev=" << prior.stddev << ")";
      break;
    case PriorKind::kPointMass:
      os << "(value=" << prior.value << ")";
      break;
    case PriorKind::kParticleFile:
      os << "(" << prior.path << ")";
      break;
  }
  if (prior.kind != PriorKind::kParticleFile) {
    os << ",init=" << to_string(prior.init.kind);
    if (prior.init.kind == InitKind::kGaussian) os << "(stddev=" << prior.init.stddev << ")";
    if (prior.init.kind == InitKind::kConstant) os << "(value=" << prior.init.value << ")";
  }
  return os.str();
}

bool prior_within_assumption(const PriorSpec& prior) {
  return prior.kind != PriorKind::kGaussian;
}

bool metric_within_guarantee(MetricKind m) { return m == MetricKind::kL1Error; }

}  // namespace ldnn
