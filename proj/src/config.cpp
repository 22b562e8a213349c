#include "vsl/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vsl {

using nlohmann::json;

namespace {

const json& require_key(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + key + ": missing required key");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<int>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as_number(*it, prefix + key);
}

std::vector<double> per_edge(const json& obj, const std::string& key, int n,
                             const std::string& prefix) {
  const json& v = require_key(obj, key, prefix);
  const std::string path = prefix + key;
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (!v.is_array()) throw ConfigError(path + ": expected a number or an array");
  if (static_cast<int>(v.size()) != n) {
    throw ConfigError(path + ": expected " + std::to_string(n) + " entries, got " +
                      std::to_string(v.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("invalid JSON: ") + err.what());
  }
  if (!root.is_object()) throw ConfigError("top level: expected an object");
  RunConfig cfg;
  auto& p = cfg.params;
  p.length_km = as_number(require_key(root, "L_km", ""), "L_km");
  p.n = as_int(require_key(root, "n", ""), "n");
  p.delta_s = as_number(require_key(root, "delta_s", ""), "delta_s");
  p.T = as_int(require_key(root, "T", ""), "T");
  p.pi = number_or(root, "pi", 1.0, "");
  p.epsilon = as_number(require_key(root, "epsilon", ""), "epsilon");
  p.beta = number_or(root, "beta", 0.95, "");
  p.eta_bar = number_or(root, "eta_bar", 0.0, "");
  if (p.n < 1) throw ConfigError("n: must be at least 1");

  const json& gamma = require_key(root, "gamma", "");
  if (!gamma.is_array()) throw ConfigError("gamma: expected an array");
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    p.gamma.push_back(as_number(gamma[i], "gamma[" + std::to_string(i) + "]"));
  }

  const json& segs = require_key(root, "segments", "");
  if (!segs.is_array()) throw ConfigError("segments: expected an array");
  if (static_cast<int>(segs.size()) != p.n) {
    throw ConfigError("segments: expected n = " + std::to_string(p.n) + " entries, got " +
                      std::to_string(segs.size()));
  }
  for (std::size_t e = 0; e < segs.size(); ++e) {
    const std::string prefix = "segments[" + std::to_string(e) + "].";
    const json& s = segs[e];
    if (!s.is_object()) throw ConfigError(prefix.substr(0, prefix.size() - 1) + ": expected an object");
    SegmentParams seg;
    seg.f_bar = as_number(require_key(s, "f_bar", prefix), prefix + "f_bar");
    seg.rho_bar = as_number(require_key(s, "rho_bar", prefix), prefix + "rho_bar");
    seg.u_bar = as_number(require_key(s, "u_bar", prefix), prefix + "u_bar");
    seg.f_U = number_or(s, "f_U", seg.f_bar, prefix);
    seg.rho_U = number_or(s, "rho_U", seg.rho_bar, prefix);
    p.segments.push_back(seg);
  }

  if (auto it = root.find("generator"); it != root.end() && !it->is_null()) {
    const json& g = *it;
    if (!g.is_object()) throw ConfigError("generator: expected an object");
    GeneratorConfig gc;
    const std::string prefix = "generator.";
    if (auto s = g.find("seed"); s != g.end()) {
      if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
        throw ConfigError("generator.seed: expected a nonnegative integer");
      }
      gc.seed = s->get<std::uint64_t>();
    }
    if (auto s = g.find("N"); s != g.end()) gc.N = as_int(*s, "generator.N");
    if (gc.N < 1) throw ConfigError("generator.N: must be at least 1");
    gc.spec.rho0_lo = per_edge(g, "rho0_lo", p.n, prefix);
    gc.spec.rho0_hi = per_edge(g, "rho0_hi", p.n, prefix);
    gc.spec.omega_lo = per_edge(g, "omega_lo", p.n, prefix);
    gc.spec.omega_hi = per_edge(g, "omega_hi", p.n, prefix);
    try {
      gc.spec.validate();
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    cfg.generator = gc;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

HighwayScenario make_scenario(const RunConfig& config) {
  try {
    return HighwayScenario::create(config.params);
  } catch (const ModelError& err) {
    throw ConfigError(err.what());
  }
}

RunConfig case_study_config() {
  RunConfig cfg;
  auto& p = cfg.params;
  p.n = 5;
  p.length_km = 10.0;
  p.delta_s = 30.0;
  p.T = 20;
  p.gamma = {40, 60, 80, 100, 120};
  p.pi = 1.0;
  p.epsilon = 0.985;
  p.beta = 0.95;
  p.eta_bar = 0.0;
  for (int e = 0; e < p.n; ++e) p.segments.push_back({3.1e4, 1050.0, 140.0, 3.1e4, 1050.0});
  p.segments[3].f_U = 2.7e4;
  GeneratorConfig g;
  g.spec = case_study_generator(p.n);
  g.seed = 1;
  g.N = 3;
  cfg.generator = g;
  return cfg;
}

std::string to_json(const RunConfig& cfg) {
  const auto& p = cfg.params;
  json root;
  root["L_km"] = p.length_km;
  root["n"] = p.n;
  root["delta_s"] = p.delta_s;
  root["T"] = p.T;
  root["gamma"] = p.gamma;
  root["pi"] = p.pi;
  root["epsilon"] = p.epsilon;
  root["beta"] = p.beta;
  root["eta_bar"] = p.eta_bar;
  root["segments"] = json::array();
  for (const auto& s : p.segments) {
    root["segments"].push_back({{"f_bar", s.f_bar}, {"rho_bar", s.rho_bar}, {"u_bar", s.u_bar},
                                {"f_U", s.f_U}, {"rho_U", s.rho_U}});
  }
  if (cfg.generator) {
    const auto& g = *cfg.generator;
    root["generator"] = {{"seed", g.seed},
                         {"N", g.N},
                         {"rho0_lo", g.spec.rho0_lo},
                         {"rho0_hi", g.spec.rho0_hi},
                         {"omega_lo", g.spec.omega_lo},
                         {"omega_hi", g.spec.omega_hi}};
  }
  return root.dump(2) + "\n";
}

}  // namespace vsl
