// Command-line front end: cross-ratio queries, verification harnesses with
// CSV/JSON artifacts, and functional evaluation over a transform sampler.
//
// Exit codes: 0 pass, 1 assertion failure, 2 usage/config error,
// 3 evaluation left the admissible neighborhood.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "liouville/beltrami_solver.hpp"
#include "liouville/config.hpp"
#include "liouville/engine.hpp"
#include "liouville/io.hpp"
#include "liouville/verify.hpp"

namespace {

using liouville::cplx;
using nlohmann::json;

cplx parse_complex(const std::string& s) {
  auto to_double = [&](const std::string& v) {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw liouville::Error("cannot parse number " + v);
    return out;
  };
  std::string t = s;
  if (t.empty()) throw liouville::Error("empty point");
  if (t.back() == 'i' || t.back() == 'I') {
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;) {
      char ch = t[k];
      if ((ch == '+' || ch == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    if (split == std::string::npos) {
      if (t.empty() || t == "+") return {0.0, 1.0};
      if (t == "-") return {0.0, -1.0};
      return {0.0, to_double(t)};
    }
    std::string re = t.substr(0, split);
    std::string im = t.substr(split);
    double imv = im == "+" ? 1.0 : (im == "-" ? -1.0 : to_double(im));
    return {to_double(re), imv};
  }
  return {to_double(t), 0.0};
}

liouville::SpherePoint parse_point(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "-inf")
    return liouville::SpherePoint::infinity();
  return liouville::SpherePoint::from_complex(parse_complex(s));
}

std::string fmt_complex_sig(cplx v, int digits) {
  if (v.imag() == 0.0) return liouville::fmt_sig(v.real(), digits);
  std::string s = liouville::fmt_sig(v.real(), digits);
  s += v.imag() < 0.0 ? "-" : "+";
  s += liouville::fmt_sig(std::abs(v.imag()), digits);
  s += "i";
  return s;
}

std::string g(double v) { return liouville::fmt_g(v); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw liouville::IoError("cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw liouville::IoError("write failed for " + path);
}

int run_cr(const std::vector<std::string>& args) {
  liouville::Quadruple q{parse_point(args[0]), parse_point(args[1]),
                         parse_point(args[2]), parse_point(args[3])};
  cplx cr = liouville::cross_ratio(q);
  cplx lg = std::log(cr);
  std::cout << fmt_complex_sig(cr, 15) << " " << fmt_complex_sig(lg, 15)
            << "\n";
  return 0;
}

struct CommonFlags {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

liouville::ExperimentSpec load_spec(const std::string& config_path,
                                    const CommonFlags& flags) {
  // An absent config behaves as an empty one so both paths share the
  // documented defaults (bump test function, power family at t = 0).
  liouville::ConfigFile cfg = config_path.empty()
                                  ? liouville::ConfigFile::parse("")
                                  : liouville::ConfigFile::load(config_path);
  liouville::ExperimentSpec spec = liouville::build_experiment(cfg);
  if (flags.seed) spec.seed = *flags.seed;
  if (flags.tolerance) spec.params.tolerance = *flags.tolerance;
  return spec;
}

std::string out_path(const CommonFlags& flags, const std::string& name) {
  std::filesystem::create_directories(flags.out_dir);
  return (std::filesystem::path(flags.out_dir) / name).string();
}

int run_verify(const std::string& name, const liouville::ExperimentSpec& spec,
               const CommonFlags& flags) {
  using namespace liouville;
  json summary;
  bool pass = false;

  if (name == "decay") {
    if (!spec.family) throw ConfigError("verify decay: a family is required");
    DecayReport rep = verify_decay(*spec.family, spec.t, spec.count,
                                   spec.source, spec.eps, spec.seed);
    CsvWriter csv(out_path(flags, "decay.csv"),
                  {"index", "t_re", "t_im", "x", "lhs", "rhs", "ok"});
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      csv.row({std::to_string(i), g(rep.t.real()), g(rep.t.imag()), g(r.x),
               g(r.lhs), g(r.rhs), r.ok ? "1" : "0"});
    }
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", rep.worst_margin},
               {"samples", rep.samples},
               {"violations", rep.violations},
               {"dilatation", rep.dilatation},
               {"eps", rep.eps},
               {"fitted_exponent", rep.fitted_exponent},
               {"required_exponent", rep.required_exponent}};
    pass = rep.pass;
  } else if (name == "derivative") {
    if (!spec.family)
      throw ConfigError("verify derivative: a family is required");
    DerivativeBoundReport rep = verify_derivative_bound(
        *spec.family, spec.disk_radius, spec.count, spec.source, spec.eps,
        spec.seed, spec.safety);
    CsvWriter csv(out_path(flags, "derivative.csv"),
                  {"index", "t_re", "t_im", "x", "x_t", "lhs", "rhs_unit",
                   "bound", "schwarz_q", "calibration", "ok"});
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      csv.row({std::to_string(i), g(r.t.real()), g(r.t.imag()), g(r.x),
               g(r.x_t), g(r.lhs), g(r.rhs_unit), g(rep.c_fit * r.rhs_unit),
               g(r.schwarz_q), r.calibration ? "1" : "0", r.ok ? "1" : "0"});
    }
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", rep.worst_margin},
               {"samples", rep.holdout_samples},
               {"violations", rep.violations},
               {"c_fit", rep.c_fit},
               {"schwarz_max", rep.schwarz_max},
               {"dilatation", rep.dilatation},
               {"eps", rep.eps},
               {"safety", rep.safety}};
    pass = rep.pass;
  } else if (name == "rate") {
    RateReport rep = verify_rate(spec.xi, spec.map(), spec.omega, spec.params,
                                 spec.n_lo, spec.n_hi);
    CsvWriter csv(out_path(flags, "rate.csv"),
                  {"n", "I_re", "I_im", "delta"});
    for (const auto& lvl : rep.trace.levels)
      csv.row({std::to_string(lvl.level), g(lvl.partial.real()),
               g(lvl.partial.imag()), g(lvl.delta)});
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", rep.bound - rep.slope},
               {"samples", static_cast<int>(rep.trace.levels.size())},
               {"slope", rep.slope},
               {"bound", rep.bound},
               {"lambda", rep.lambda},
               {"omega", rep.omega},
               {"exact", rep.exact}};
    pass = rep.pass;
  } else if (name == "holomorphy") {
    if (!spec.family)
      throw ConfigError("verify holomorphy: a family is required");
    HolomorphyReport rep =
        verify_holomorphy(spec.xi, *spec.family, spec.t0, spec.circle_radius,
                          spec.circle_points, spec.params);
    CsvWriter csv(out_path(flags, "holomorphy.csv"),
                  {"index", "t_re", "t_im", "F_re", "F_im"});
    for (std::size_t i = 0; i < rep.circle.size(); ++i)
      csv.row({std::to_string(i), g(rep.circle[i].first.real()),
               g(rep.circle[i].first.imag()), g(rep.circle[i].second.real()),
               g(rep.circle[i].second.imag())});
    csv.close();
    double worst = rep.threshold -
                   std::max(rep.mean_value_residual, rep.dbar_residual);
    summary = {{"pass", rep.pass},
               {"worst_margin", worst},
               {"samples", static_cast<int>(rep.circle.size())},
               {"mean_value_residual", rep.mean_value_residual},
               {"dbar_residual", rep.dbar_residual},
               {"threshold", rep.threshold},
               {"derivative_series_re", rep.derivative_series.real()},
               {"derivative_series_im", rep.derivative_series.imag()},
               {"derivative_fd_re", rep.derivative_fd.real()},
               {"derivative_fd_im", rep.derivative_fd.imag()},
               {"derivative_rel_err", rep.derivative_rel_err}};
    pass = rep.pass;
  } else if (name == "punctured-disk") {
    PuncturedDiskReport rep =
        verify_punctured_disk(spec.per_beta, spec.beta_lo, spec.beta_hi,
                              spec.beta_step, spec.seed);
    CsvWriter csv(out_path(flags, "punctured-disk.csv"),
                  {"index", "beta", "b1_re", "b1_im", "rho", "radius", "lhs",
                   "rhs", "ok"});
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      csv.row({std::to_string(i), g(r.beta), g(r.b1.real()), g(r.b1.imag()),
               g(r.check.rho), g(r.check.radius), g(r.check.lhs),
               g(r.check.rhs), r.check.holds ? "1" : "0"});
    }
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", rep.worst_margin},
               {"samples", rep.samples},
               {"violations", rep.violations}};
    pass = rep.pass;
  } else if (name == "partition") {
    PartitionReport rep =
        verify_partition(spec.box_count, spec.n_hi < 6 ? spec.n_hi : 6,
                         spec.additivity_tol, spec.params.scheme, spec.seed);
    CsvWriter csv(out_path(flags, "partition.csv"),
                  {"index", "level", "measure", "additivity_error", "max_cell",
                   "cell_bound", "ok"});
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      csv.row({std::to_string(i), std::to_string(r.level), g(r.measure),
               g(r.additivity_error), g(r.max_cell), g(r.cell_bound),
               r.ok ? "1" : "0"});
    }
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", spec.additivity_tol - rep.worst_additivity},
               {"samples", rep.samples},
               {"violations", rep.violations}};
    pass = rep.pass;
  } else if (name == "invariance") {
    if (!spec.family || !spec.group)
      throw ConfigError("verify invariance: family and group are required");
    InvarianceReport rep = verify_group_invariance(*spec.family, spec.t,
                                                   *spec.group, spec.xi,
                                                   spec.params);
    CsvWriter csv(out_path(flags, "invariance.csv"),
                  {"base_re", "base_im", "conjugated_re", "conjugated_im",
                   "difference", "bound", "ok"});
    csv.row({g(rep.base.real()), g(rep.base.imag()), g(rep.conjugated.real()),
             g(rep.conjugated.imag()), g(rep.difference), g(rep.bound),
             rep.pass ? "1" : "0"});
    csv.close();
    summary = {{"pass", rep.pass},
               {"worst_margin", rep.bound - rep.difference},
               {"samples", 1},
               {"difference", rep.difference},
               {"bound", rep.bound}};
    pass = rep.pass;
  } else {
    throw ConfigError("unknown verification '" + name + "'");
  }

  write_json(out_path(flags, name + "_summary.json"), summary);
  std::cout << name << ": " << (pass ? "pass" : "FAIL")
            << " worst_margin=" << summary["worst_margin"].dump()
            << " samples=" << summary["samples"].dump() << "\n";
  return pass ? 0 : 1;
}

int run_eval(const liouville::ExperimentSpec& spec, const CommonFlags& flags) {
  using namespace liouville;
  GammaSampler sampler = GammaSampler::uniform(spec.sampler_resolution);
  SphereMap map = spec.map();
  CsvWriter csv(out_path(flags, "eval.csv"),
                {"index", "p", "q", "r", "value_re", "value_im", "levels",
                 "delta_last", "ok"});
  std::ofstream trace_out(out_path(flags, "eval_trace.jsonl"),
                          std::ios::binary | std::ios::trunc);
  if (!trace_out) throw IoError("cannot open eval trace output");
  double best = 0.0;
  std::size_t best_index = 0;
  bool any = false;
  for (std::size_t i = 0; i < sampler.transforms.size(); ++i) {
    const SampledGamma& sg = sampler.transforms[i];
    try {
      EvaluationTrace tr = eval_current(spec.xi, sg.g, map, spec.params);
      for (const auto& lvl : tr.levels) {
        json line = {{"n", lvl.level},
                     {"I_re", lvl.partial.real()},
                     {"I_im", lvl.partial.imag()},
                     {"delta", lvl.delta}};
        trace_out << line.dump() << "\n";
      }
      csv.row({std::to_string(i), g(sg.p), g(sg.q), g(sg.r),
               g(tr.value.real()), g(tr.value.imag()),
               std::to_string(tr.levels.size()),
               g(tr.levels.back().delta), "1"});
      double v = std::abs(tr.value);
      if (!any || v > best) {
        best = v;
        best_index = i;
        any = true;
      }
    } catch (const OutsideNeighborhood&) {
      if (i == 0) throw;  // base evaluation itself is inadmissible
      csv.row({std::to_string(i), g(sg.p), g(sg.q), g(sg.r), "nan", "nan",
               "0", "nan", "0"});
    }
  }
  csv.close();
  if (!trace_out) throw IoError("eval trace write failed");
  trace_out.close();
  json summary = {{"pass", any},
                  {"worst_margin", 0.0},
                  {"samples", static_cast<int>(sampler.transforms.size())},
                  {"seminorm", best},
                  {"argmax_index", static_cast<int>(best_index)}};
  write_json(out_path(flags, "eval_summary.json"), summary);
  std::cout << "seminorm=" << fmt_g(best) << " argmax=" << best_index
            << " samples=" << sampler.transforms.size() << "\n";
  return any ? 0 : 1;
}

int run_solve(const liouville::ExperimentSpec&, const CommonFlags& flags,
              const std::string& kind, int n, int iterations) {
  using namespace liouville;
  GridMap sol;
  if (kind == "bump") {
    sol = solve_beltrami_grid(smoothed_disk_bump(0.2), 4.0, n, iterations);
  } else if (kind == "power") {
    sol = solve_beltrami_grid(truncated_power_stretch(0.5), 16.0, n,
                              iterations);
  } else {
    throw ConfigError("solve: kind must be bump or power");
  }
  std::string grid_path = out_path(flags, "solution.grid");
  write_grid(grid_path, sol.f, static_cast<std::uint32_t>(sol.n));
  json summary = {{"pass", true},
                  {"worst_margin", 0.0},
                  {"samples", sol.n * sol.n},
                  {"residual", sol.residual},
                  {"iterations", static_cast<int>(sol.residual_history.size())},
                  {"grid", grid_path}};
  write_json(out_path(flags, "solve_summary.json"), summary);
  std::cout << "residual=" << fmt_g(sol.residual) << " grid=" << grid_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liouville currents of quasi-Fuchsian deformations"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 1;
  app.add_option("--threads", threads, "worker threads for engine sums");
  CommonFlags flags;
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "sampler seed (never affects pass/fail)");
  double tol_value = 0.0;
  auto* tol_opt =
      app.add_option("--tolerance", tol_value, "evaluation tolerance override");
  app.add_option("--out", flags.out_dir, "output directory for artifacts");

  auto* cr_cmd = app.add_subcommand("cr", "cross-ratio and its principal log");
  std::vector<std::string> cr_args;
  cr_cmd->add_option("points", cr_args, "four points (real, a+bi, or inf)")
      ->expected(4);

  auto* verify_cmd = app.add_subcommand("verify", "run a verification harness");
  std::string verify_name;
  verify_cmd
      ->add_option("name", verify_name,
                   "decay|derivative|rate|holomorphy|punctured-disk|partition|"
                   "invariance")
      ->required();
  std::string verify_config;
  verify_cmd->add_option("--config", verify_config, "experiment config file");

  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate the functional over a sampler");
  std::string eval_config;
  eval_cmd->add_option("--config", eval_config, "experiment config file");

  auto* solve_cmd =
      app.add_subcommand("solve", "grid Beltrami solver examples");
  std::string solve_kind = "bump";
  solve_cmd->add_option("kind", solve_kind, "bump|power");
  int solve_n = 512;
  solve_cmd->add_option("--n", solve_n, "grid size (power of two)");
  int solve_iters = 20;
  solve_cmd->add_option("--iterations", solve_iters, "solver iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  liouville::set_thread_count(threads);
  try {
    if (cr_cmd->parsed()) return run_cr(cr_args);
    if (*seed_opt) flags.seed = seed_value;
    if (*tol_opt) flags.tolerance = tol_value;
    if (verify_cmd->parsed())
      return run_verify(verify_name, load_spec(verify_config, flags), flags);
    if (eval_cmd->parsed())
      return run_eval(load_spec(eval_config, flags), flags);
    if (solve_cmd->parsed())
      return run_solve(liouville::ExperimentSpec{}, flags, solve_kind, solve_n,
                       solve_iters);
  } catch (const liouville::OutsideNeighborhood& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liouville::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
