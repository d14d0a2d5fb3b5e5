#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/pipeline.hpp"

namespace qkm::pipeline {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value);
  } catch (const ConfigError&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  for (const auto& item : csv::split(value)) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string list_text(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(csv::format_double(v));
  return csv::join(parts, ',');
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["channel"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.channel = channels::parse_channel(v);
    };
    m["sweep_values"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.sweep_values = to_list(k, v);
    };
    m["sweep_min"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sweep_min = to_double(k, v); };
    m["sweep_max"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sweep_max = to_double(k, v); };
    m["samples"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.samples = static_cast<int>(to_int(k, v));
    };
    m["gamma0"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.gamma0 = to_double(k, v); };
    m["tau"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tau = to_double(k, v); };
    m["snapshot_time"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.snapshot_time = to_double(k, v);
    };
    m["grid_points"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.grid.points = static_cast<int>(to_int(k, v));
    };
    m["grid_horizon"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.grid.horizon = to_double(k, v);
    };
    m["method"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.method = kernels::parse_method(v);
    };
    m["kernel"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.kernel.kind = kernels::parse_kernel_kind(v);
    };
    m["kernel_c"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kernel.c = to_double(k, v); };
    m["kernel_degree"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.kernel.degree = static_cast<int>(to_int(k, v));
    };
    m["kernel_sigma"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.kernel.sigma = to_double(k, v);
    };
    m["shots"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.shots = qsim::parse_shots(v); };
    m["seed"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      const auto s = to_int(k, v);
      if (s < 0) throw ConfigError("key 'seed': must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    };
    m["models"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.models.clear();
      for (const auto& item : csv::split(v)) c.models.push_back(parse_model(trim(item)));
    };
    m["svr_C"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.svr_C = to_list(k, v); };
    m["svr_epsilon"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.svr_epsilon = to_list(k, v);
    };
    m["krr_ridge"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.krr_ridge = to_list(k, v); };
    m["rbf_gamma"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rbf_gamma = to_list(k, v); };
    m["classical_features"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      if (v == "exact") {
        c.classical_features = FeatureSource::Exact;
      } else if (v == "shot") {
        c.classical_features = FeatureSource::Shot;
      } else {
        throw ConfigError("key 'classical_features': expected exact or shot, got '" + v + "'");
      }
    };
    m["test_fraction"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.test_fraction = to_double(k, v);
    };
    m["folds"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.folds = static_cast<int>(to_int(k, v));
    };
    m["svr_tol"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.svr_tol = to_double(k, v); };
    m["svr_max_passes"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.svr_max_passes = to_double(k, v);
    };
    m["jitter"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.jitter = to_double(k, v); };
    m["jitter_max"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.jitter_max = to_double(k, v);
    };
    m["comparison_samples"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.comparison_samples = static_cast<int>(to_int(k, v));
    };
    m["comparison_C"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.comparison_C = to_double(k, v);
    };
    m["comparison_epsilon"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.comparison_epsilon = to_double(k, v);
    };
    m["out_dir"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; };
    return m;
  }();
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what);
}

bool all_positive(const std::vector<double>& v) {
  return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return x > 0 && std::isfinite(x); });
}

}  // namespace

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::QSVR:
      return "qsvr";
    case ModelId::QKRR:
      return "qkrr";
    case ModelId::SVRRbf:
      return "svr_rbf";
    case ModelId::KRRRbf:
      return "krr_rbf";
  }
  return "?";
}

ModelId parse_model(const std::string& text) {
  for (ModelId id : {ModelId::QSVR, ModelId::QKRR, ModelId::SVRRbf, ModelId::KRRRbf}) {
    if (to_string(id) == text) return id;
  }
  throw ConfigError("unknown model '" + text + "' (qsvr|qkrr|svr_rbf|krr_rbf)");
}

ml::ModelKind model_kind(ModelId id) {
  return id == ModelId::QSVR || id == ModelId::SVRRbf ? ml::ModelKind::SVR : ml::ModelKind::KRR;
}

bool uses_quantum_kernel(ModelId id) { return id == ModelId::QSVR || id == ModelId::QKRR; }

ExperimentConfig ExperimentConfig::defaults(channels::ChannelKind kind) {
  ExperimentConfig c;
  c.channel = kind;
  if (kind == channels::ChannelKind::PhaseDamping) {
    c.sweep_min = 0.05;
    c.sweep_max = 2.0;
    c.snapshot_time = 0.4;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (sweep_values.empty()) {
    require(samples >= 1, "samples", "must be >= 1");
    require(std::isfinite(sweep_min) && std::isfinite(sweep_max) && sweep_min <= sweep_max, "sweep_min",
            "sweep range must be finite with sweep_min <= sweep_max");
    require(samples == 1 || sweep_min < sweep_max, "sweep_max", "must exceed sweep_min for more than one sample");
  }
  for (double g : sweep()) {
    require(g > 0 && std::isfinite(g), "sweep_values",
            "control value " + csv::format_double(g) + " violates the channel parameter range (must be > 0)");
  }
  require(gamma0 > 0 && std::isfinite(gamma0), "gamma0", "must be positive");
  require(tau > 0 && std::isfinite(tau), "tau", "must be positive");
  require(snapshot_time > 0 && std::isfinite(snapshot_time), "snapshot_time", "must be positive");
  require(grid.points >= 2, "grid_points", "must be >= 2");
  require(grid.horizon > 0 && std::isfinite(grid.horizon), "grid_horizon", "must be positive");
  kernel.validate();
  require(!models.empty(), "models", "at least one model is required");
  require(all_positive(svr_C), "svr_C", "needs positive values");
  require(!svr_epsilon.empty() && std::all_of(svr_epsilon.begin(), svr_epsilon.end(),
                                              [](double e) { return e >= 0 && std::isfinite(e); }),
          "svr_epsilon", "needs non-negative values");
  require(all_positive(krr_ridge), "krr_ridge", "needs positive values");
  require(all_positive(rbf_gamma), "rbf_gamma", "needs positive values");
  require(test_fraction > 0 && test_fraction < 1, "test_fraction", "must be in (0, 1)");
  require(folds >= 2, "folds", "must be >= 2");
  require(svr_tol > 0, "svr_tol", "must be positive");
  require(svr_max_passes > 0, "svr_max_passes", "must be positive");
  require(jitter >= 0 && jitter_max >= jitter, "jitter", "need 0 <= jitter <= jitter_max");
  require(comparison_samples >= 2, "comparison_samples", "must be >= 2");
  require(comparison_C > 0, "comparison_C", "must be positive");
  require(comparison_epsilon >= 0, "comparison_epsilon", "must be non-negative");
  require(!out_dir.empty(), "out_dir", "must not be empty");
}

std::vector<double> ExperimentConfig::sweep() const {
  if (!sweep_values.empty()) return sweep_values;
  std::vector<double> out(static_cast<std::size_t>(std::max(samples, 0)));
  for (int k = 0; k < samples; ++k) {
    out[static_cast<std::size_t>(k)] =
        samples == 1 ? sweep_min : sweep_min + (sweep_max - sweep_min) * k / (samples - 1);
  }
  if (samples > 1) out.back() = sweep_max;
  return out;
}

channels::ChannelParams ExperimentConfig::channel_params(double control, double t) const {
  if (channel == channels::ChannelKind::AmplitudeDamping) return channels::ADParams{control * gamma0, gamma0, t};
  return channels::PDParams{control / tau, tau, t};
}

ml::FitOptions ExperimentConfig::fit_options() const { return {svr_tol, svr_max_passes, jitter, jitter_max}; }

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!setters().contains(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }
  auto kind = channels::ChannelKind::AmplitudeDamping;
  for (const auto& [k, v] : entries) {
    if (k == "channel") kind = channels::parse_channel(v);
  }
  ExperimentConfig config = ExperimentConfig::defaults(kind);
  for (const auto& [k, v] : entries) setters().at(k)(config, k, v);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto put = [&os](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  std::vector<std::string> models;
  for (ModelId m : c.models) models.push_back(to_string(m));
  put("channel", channels::to_string(c.channel));
  put("sweep_values", list_text(c.sweep_values));
  put("sweep_min", csv::format_double(c.sweep_min));
  put("sweep_max", csv::format_double(c.sweep_max));
  put("samples", std::to_string(c.samples));
  put("gamma0", csv::format_double(c.gamma0));
  put("tau", csv::format_double(c.tau));
  put("snapshot_time", csv::format_double(c.snapshot_time));
  put("grid_points", std::to_string(c.grid.points));
  put("grid_horizon", csv::format_double(c.grid.horizon));
  put("method", kernels::to_string(c.method));
  put("kernel", kernels::to_string(c.kernel.kind));
  put("kernel_c", csv::format_double(c.kernel.c));
  put("kernel_degree", std::to_string(c.kernel.degree));
  put("kernel_sigma", csv::format_double(c.kernel.sigma));
  put("shots", qsim::to_string(c.shots));
  put("seed", std::to_string(c.seed));
  put("models", csv::join(models, ','));
  put("svr_C", list_text(c.svr_C));
  put("svr_epsilon", list_text(c.svr_epsilon));
  put("krr_ridge", list_text(c.krr_ridge));
  put("rbf_gamma", list_text(c.rbf_gamma));
  put("classical_features", c.classical_features == FeatureSource::Exact ? "exact" : "shot");
  put("test_fraction", csv::format_double(c.test_fraction));
  put("folds", std::to_string(c.folds));
  put("svr_tol", csv::format_double(c.svr_tol));
  put("svr_max_passes", csv::format_double(c.svr_max_passes));
  put("jitter", csv::format_double(c.jitter));
  put("jitter_max", csv::format_double(c.jitter_max));
  put("comparison_samples", std::to_string(c.comparison_samples));
  put("comparison_C", csv::format_double(c.comparison_C));
  put("comparison_epsilon", csv::format_double(c.comparison_epsilon));
  put("out_dir", c.out_dir);
  return os.str();
}

}  // namespace qkm::pipeline
