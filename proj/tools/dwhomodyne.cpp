// dwhomodyne: run scenarios and write their artifacts.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dwh/dwh.hpp"

namespace {

using namespace dwh;

struct Options {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> formats;
  std::string variant = "a";
  std::optional<int> n_atoms;
  std::optional<std::size_t> trajectories;
};

std::string output_dir(const Options& o, const RunConfig& cfg) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("DWHOMODYNE_OUT"); env && *env) return env;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  return "out";
}

RunConfig load(const Options& o, Route route, const RunConfig& fallback) {
  if (o.configs.size() > 1) throw InvalidParameter("only one --config is accepted by this subcommand");
  RunConfig cfg = o.configs.empty() ? fallback : parse_config(o.configs.front());
  cfg.scenario.route = route;
  if (o.seed) cfg.scenario.stochastic.seed = *o.seed;
  if (o.n_atoms) cfg.scenario.trap.n_atoms = *o.n_atoms;
  if (o.trajectories) cfg.scenario.stochastic.trajectories = *o.trajectories;
  if (!o.formats.empty()) cfg.output.formats = o.formats;
  if (auto v = config_violations(cfg); !v.empty()) throw ValidationError(std::move(v));
  return cfg;
}

RunConfig require_config(const Options& o, Route route) {
  if (o.configs.empty()) throw InvalidParameter("--config is required for the " + std::string(to_string(route)) + " subcommand");
  return load(o, route, {});
}

void emit(const RunOutput& run, const RunConfig& cfg, const Options& o) {
  const std::string dir = output_dir(o, cfg);
  const auto files = emit_artifacts(run, cfg, dir, cfg.output.formats);
  for (const auto& f : files) std::cout << dir << "/" << f << "\n";
}

RunConfig wrap(Scenario sc) {
  RunConfig c;
  c.scenario = std::move(sc);
  return c;
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out{fig3_scenario('a'), fig3_scenario('b'), fig4_scenario("caption"), fig4_scenario("text")};
  Scenario rabi;
  rabi.name = "rabi";
  rabi.trap = {1.0, 0.001, 0.001, 0.0005, 100};
  rabi.initial.jx0 = 30.0;
  rabi.initial.jy0 = 20.0;
  rabi.initial.jz0 = 10.0;
  rabi.grid.t_end = 50.0;
  out.push_back(rabi);
  Scenario coherent;
  coherent.name = "coherent_n10";
  coherent.trap = {1.0, 0.0, 0.0, 0.0, 10};
  coherent.initial.theta = std::numbers::pi / 2;
  coherent.initial.phi = 0.0;
  coherent.grid.t_end = 20.0;
  out.push_back(coherent);
  return out;
}

int run_validate(const Options& o) {
  std::vector<Scenario> scenarios;
  if (o.configs.empty()) {
    scenarios = builtin_scenarios();
  } else {
    for (const auto& path : o.configs) scenarios.push_back(parse_config(path).scenario);
  }
  bool ok = true;
  for (const auto& sc : scenarios) {
    const auto rep = cross_validate(sc);
    std::cout << report_text(rep);
    ok = ok && rep.passed();
  }
  std::cout << (ok ? "all hard checks passed" : "hard check failures") << "\n";
  return ok ? 0 : 1;
}

int dispatch(const std::string& cmd, const Options& o) {
  if (cmd == "validate") return run_validate(o);

  RunConfig cfg;
  RunOutput run;
  if (cmd == "meanfield" || cmd == "perturbative" || cmd == "master" || cmd == "trajectory") {
    cfg = require_config(o, route_from_string(cmd));
    run = run_scenario(cfg.scenario);
  } else if (cmd == "sweep") {
    Scenario def;
    def.name = "sweep";
    def.trap.omega = 1.0;
    def.trap.n_atoms = 1000;
    cfg = load(o, Route::sweep, wrap(def));
    run = run_scenario(cfg.scenario);
  } else if (cmd == "fig3") {
    if (o.variant != "a" && o.variant != "b") throw InvalidParameter("--variant must be 'a' or 'b'");
    cfg = load(o, Route::fig3, wrap(fig3_scenario(o.variant[0])));
    run = run_scenario(cfg.scenario);
  } else if (cmd == "fig4") {
    cfg = load(o, Route::meanfield, wrap(fig4_scenario("caption")));
    run = run_fig4();
  } else if (cmd == "fig5") {
    RunConfig def = wrap(fig5_scenario(o.n_atoms.value_or(10), o.trajectories.value_or(20), o.seed.value_or(2024)));
    cfg = load(o, Route::fig5, def);
    run = run_scenario(cfg.scenario);
  } else {
    throw InvalidParameter("unknown subcommand '" + cmd + "'");
  }
  emit(run, cfg, o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-well atomic homodyne detection simulator", "dwhomodyne"};
  app.set_version_flag("--version", std::string(dwh::kVersion));
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"meanfield", "integrate the mean-field equations of a config"},
      {"perturbative", "evaluate the epsilon expansion of a config"},
      {"master", "evolve the measurement master equation of a config"},
      {"trajectory", "run seeded conditional trajectories of a config"},
      {"fig3", "analytic homodyne current (--variant a|b)"},
      {"fig4", "unconditional current, both parameterizations"},
      {"fig5", "conditional currents with ensemble and master overlay"},
      {"sweep", "self-trapping regime map"},
      {"validate", "cross-validate configs, or the built-in scenarios"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.configs, "scenario config file")->check(CLI::ExistingFile);
    if (std::string(name) == "validate") continue;
    sub->add_option("--out", opt.out, "output directory (default $DWHOMODYNE_OUT, then config, then ./out)");
    sub->add_option("--seed", opt.seed, "master seed for stochastic runs");
    sub->add_option("--format", opt.formats, "csv|json|svg, repeatable")
        ->check(CLI::IsMember({"csv", "json", "svg"}))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--n-atoms", opt.n_atoms, "atom number override");
    sub->add_option("--trajectories", opt.trajectories, "trajectory count override");
    if (std::string(name) == "fig3") sub->add_option("--variant", opt.variant, "a|b")->check(CLI::IsMember({"a", "b"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, opt);
  } catch (const dwh::ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 1;
  } catch (const dwh::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const dwh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
