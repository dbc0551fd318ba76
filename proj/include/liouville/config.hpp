#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "liouville/engine.hpp"
#include "liouville/errors.hpp"
#include "liouville/families.hpp"
#include "liouville/holder.hpp"
#include "liouville/verify.hpp"

namespace liouville {

// Plain UTF-8 key=value experiment configs with [section] headers, '#' or ';'
// comments, and a fixed schema: unknown sections or keys are errors.
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
  }

  static ConfigFile parse(const std::string& text,
                          const std::string& origin = "<string>") {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!known_schema().count(section))
          throw ConfigError(origin + ": unknown section [" + section + "]");
        cfg.sections_[section];
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key=value");
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": key outside any section");
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (!known_schema().at(section).count(key))
        throw ConfigError(origin + ": unknown key '" + key + "' in [" +
                          section + "]");
      cfg.sections_[section][key] = value;
    }
    return cfg;
  }

  bool has(const std::string& sec, const std::string& key) const {
    auto s = sections_.find(sec);
    return s != sections_.end() && s->second.count(key);
  }

  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double num(const std::string& sec, const std::string& key,
             double fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string& v = sections_.at(sec).at(key);
    try {
      std::size_t used = 0;
      double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + v + "' for " + sec + "." + key);
    }
  }

  int integer(const std::string& sec, const std::string& key,
              int fallback) const {
    double v = num(sec, key, static_cast<double>(fallback));
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config: expected integer for " + sec + "." + key);
    return i;
  }

  std::uint64_t seed(const std::string& sec, const std::string& key,
                     std::uint64_t fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string& v = sections_.at(sec).at(key);
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw ConfigError("config: bad seed '" + v + "'");
    }
  }

  bool flag(const std::string& sec, const std::string& key,
            bool fallback) const {
    if (!has(sec, key)) return fallback;
    std::string v = sections_.at(sec).at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean '" + v + "' for " + sec + "." + key);
  }

  SpherePoint point(const std::string& sec, const std::string& key,
                    const std::string& fallback) const {
    std::string v = str(sec, key, fallback);
    if (v == "inf" || v == "-inf") return SpherePoint::infinity();
    try {
      return SpherePoint::from_real(std::stod(v));
    } catch (const std::exception&) {
      throw ConfigError("config: bad boundary point '" + v + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static const std::map<std::string, std::set<std::string>>& known_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"family", {"kind", "radius", "t_re", "t_im"}},
        {"group", {"multiplier"}},
        {"xi",
         {"kind", "lambda", "lambda_u", "lambda_v", "a", "b", "c", "d",
          "scale"}},
        {"gamma", {"resolution"}},
        {"params",
         {"tolerance", "max_level", "min_level", "scheme", "branch_guard",
          "extrapolate", "count", "per_beta", "beta_lo", "beta_hi",
          "beta_step", "box_count", "eps", "r", "t0_re", "t0_im", "radius",
          "circle_points", "omega", "n_lo", "n_hi", "s_min", "s_max", "seed",
          "safety", "additivity_tol"}}};
    return schema;
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Everything a CLI command may need, decoded and range-checked by the module
// constructors it feeds.
struct ExperimentSpec {
  std::optional<HolomorphicQCFamily> family;
  cplx t{0.0, 0.0};
  std::optional<CyclicFuchsianGroup> group;
  HolderFunction xi;
  int sampler_resolution = 8;
  EvalParams params;
  QuadrupleSource source;
  int count = 10000;
  double eps = kDefaultDecayEps;
  double disk_radius = 0.5;  // |t| <= r disk for the derivative bound
  cplx t0{0.0, 0.0};
  double circle_radius = 0.2;
  int circle_points = 16;
  double omega = 1.0;
  int n_lo = 2, n_hi = 8;
  int per_beta = 200;
  double beta_lo = 0.05, beta_hi = 0.95, beta_step = 0.05;
  int box_count = 100;
  double additivity_tol = 1e-10;
  double safety = 1.25;
  std::uint64_t seed = 0x5eedULL;

  SphereMap map() const {
    if (!family) return identity_sphere_map();
    return family_sphere_map(*family, t);
  }
};

inline ExperimentSpec build_experiment(const ConfigFile& cfg) {
  ExperimentSpec spec;

  std::string fam_kind = cfg.str("family", "kind", "power");
  double fam_radius = cfg.num("family", "radius", 1.0);
  if (fam_kind == "power")
    spec.family = power_stretch_family(fam_radius);
  else if (fam_kind == "vertical")
    spec.family = vertical_stretch_family(fam_radius);
  else if (fam_kind == "power-vertical")
    spec.family = HolomorphicQCFamily::compose(
        power_stretch_family(fam_radius), vertical_stretch_family(fam_radius));
  else if (fam_kind == "none" || fam_kind == "identity")
    spec.family.reset();
  else
    throw ConfigError("config: unknown family kind '" + fam_kind + "'");
  spec.t = cplx{cfg.num("family", "t_re", 0.0), cfg.num("family", "t_im", 0.0)};

  if (cfg.has("group", "multiplier"))
    spec.group.emplace(cfg.num("group", "multiplier", 2.0));

  SpherePoint a = cfg.point("xi", "a", "0");
  SpherePoint b = cfg.point("xi", "b", "1");
  SpherePoint c = cfg.point("xi", "c", "2");
  SpherePoint d = cfg.point("xi", "d", "3");
  GeodesicBox box = make_box(a, b, c, d);
  std::string xi_kind = cfg.str("xi", "kind", "bump");
  double lambda = cfg.num("xi", "lambda", 1.0);
  if (xi_kind == "bump")
    spec.xi = HolderFunction::bump(box, lambda);
  else if (xi_kind == "product")
    spec.xi = HolderFunction::product(box, cfg.num("xi", "lambda_u", lambda),
                                      cfg.num("xi", "lambda_v", lambda));
  else if (xi_kind == "indicator" || xi_kind == "step")
    spec.xi = HolderFunction::indicator(box);
  else
    throw ConfigError("config: unknown xi kind '" + xi_kind + "'");
  double scale = cfg.num("xi", "scale", 1.0);
  if (scale != 1.0) spec.xi = spec.xi.scaled(scale);

  spec.sampler_resolution = cfg.integer("gamma", "resolution", 8);

  spec.params.tolerance = cfg.num("params", "tolerance", 1e-6);
  spec.params.max_level = cfg.integer("params", "max_level", 12);
  spec.params.min_level = cfg.integer("params", "min_level", 1);
  std::string scheme = cfg.str("params", "scheme", "euclidean");
  if (scheme == "euclidean")
    spec.params.scheme = PartitionScheme::normalized_euclidean;
  else if (scheme == "angle")
    spec.params.scheme = PartitionScheme::angle_equal;
  else
    throw ConfigError("config: unknown partition scheme '" + scheme + "'");
  spec.params.branch_guard = cfg.flag("params", "branch_guard", true);
  spec.params.extrapolate = cfg.flag("params", "extrapolate", true);

  spec.count = cfg.integer("params", "count", spec.count);
  spec.eps = cfg.num("params", "eps", spec.eps);
  spec.disk_radius = cfg.num("params", "r", spec.disk_radius);
  spec.t0 = cplx{cfg.num("params", "t0_re", 0.0), cfg.num("params", "t0_im", 0.0)};
  spec.circle_radius = cfg.num("params", "radius", spec.circle_radius);
  spec.circle_points = cfg.integer("params", "circle_points", spec.circle_points);
  spec.omega = cfg.num("params", "omega", spec.omega);
  spec.n_lo = cfg.integer("params", "n_lo", spec.n_lo);
  spec.n_hi = cfg.integer("params", "n_hi", spec.n_hi);
  spec.per_beta = cfg.integer("params", "per_beta", spec.per_beta);
  spec.beta_lo = cfg.num("params", "beta_lo", spec.beta_lo);
  spec.beta_hi = cfg.num("params", "beta_hi", spec.beta_hi);
  spec.beta_step = cfg.num("params", "beta_step", spec.beta_step);
  spec.box_count = cfg.integer("params", "box_count", spec.box_count);
  spec.additivity_tol = cfg.num("params", "additivity_tol", spec.additivity_tol);
  spec.safety = cfg.num("params", "safety", spec.safety);
  spec.source.s_min = cfg.num("params", "s_min", spec.source.s_min);
  spec.source.s_max = cfg.num("params", "s_max", spec.source.s_max);
  spec.seed = cfg.seed("params", "seed", spec.seed);
  return spec;
}

}  // namespace liouville
