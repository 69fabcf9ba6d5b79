#pragma once

// Run configuration: flat `key = value` text grouped in [sections].
//
//   [scenario]   name, route, variant, double_count_guard, note
//   [trap]       omega, kappa, eta, lambda, n_atoms
//   [cavity]     xi, n_photons, gamma, drive, detuning, lo_amp, cav_amp, gamma_meas
//   [initial]    jx0, jy0, jz0, theta, phi, phase0, beta_mag
//   [integrator] t0, t_end, dt, stride, samples
//   [stochastic] seed, trajectories, threads, sse_form, noise_substeps
//   [sweep]      kappa_n_over_omega, eta_over_kappa, jx_fraction, jz_sign, periods, max_step_phase
//   [output]     dir, formats
//
// Required: scenario.name, scenario.route, trap.omega, trap.n_atoms,
// integrator.t_end. Lines starting with '#' or ';' are comments. Unknown
// sections or keys are errors, and every problem in a file is reported at once.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dwh/errors.hpp"
#include "dwh/experiments.hpp"
#include "dwh/timeseries.hpp"

namespace dwh {

struct OutputSettings {
  std::string dir;  // empty = use the CLI flag, the environment or "out"
  std::vector<std::string> formats{"csv"};

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct RunConfig {
  Scenario scenario;
  OutputSettings output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class ConfigMode {
  config,    // a run configuration
  manifest,  // a manifest: the [run] and [meta.*] sections are skipped
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view text) {
  Int v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidParameter("not an integer: '" + std::string(text) + "'");
  return v;
}

inline bool parse_bool(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw InvalidParameter("not a boolean (true|false): '" + std::string(text) + "'");
}

inline std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item));
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

inline std::string join_strings(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i];
  }
  return out;
}

struct Field {
  std::string_view section;
  std::string_view key;
  bool required;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;  // nullopt = not emitted
};

template <class Access>
Field real_field(std::string_view sec, std::string_view key, Access access, bool required = false) {
  return {sec, key, required, [access](RunConfig& c, std::string_view v) { access(c) = parse_double(v); },
          [access](const RunConfig& c) -> std::optional<std::string> {
            return format_double(access(c));
          }};
}

template <class Access>
Field optional_real_field(std::string_view sec, std::string_view key, Access access) {
  return {sec, key, false, [access](RunConfig& c, std::string_view v) { access(c) = parse_double(v); },
          [access](const RunConfig& c) -> std::optional<std::string> {
            const auto& o = access(c);
            if (!o) return std::nullopt;
            return format_double(*o);
          }};
}

template <class Int, class Access>
Field int_field(std::string_view sec, std::string_view key, Access access, bool required = false) {
  return {sec, key, required, [access](RunConfig& c, std::string_view v) { access(c) = parse_int<Int>(v); },
          [access](const RunConfig& c) -> std::optional<std::string> {
            return std::to_string(access(c));
          }};
}

inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) return false;
  return true;
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto sc = [](RunConfig& c) -> Scenario& { return c.scenario; };
    f.push_back({"scenario", "name", true,
                 [sc](RunConfig& c, std::string_view v) {
                   if (!valid_name(v)) throw InvalidParameter("name may only contain letters, digits, '_', '-' and '.'");
                   sc(c).name = std::string(v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.scenario.name; }});
    f.push_back({"scenario", "route", true,
                 [sc](RunConfig& c, std::string_view v) { sc(c).route = route_from_string(v); },
                 [](const RunConfig& c) -> std::optional<std::string> { return std::string(to_string(c.scenario.route)); }});
    f.push_back({"scenario", "variant", false,
                 [sc](RunConfig& c, std::string_view v) { sc(c).variant.tag = variant_from_string(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return std::string(to_string(c.scenario.variant.tag));
                 }});
    f.push_back({"scenario", "double_count_guard", false,
                 [sc](RunConfig& c, std::string_view v) { sc(c).variant.double_count_guard = parse_bool(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return c.scenario.variant.double_count_guard ? "true" : "false";
                 }});
    f.push_back({"scenario", "note", false, [sc](RunConfig& c, std::string_view v) { sc(c).note = std::string(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.scenario.note.empty()) return std::nullopt;
                   return c.scenario.note;
                 }});

    f.push_back(real_field("trap", "omega", [](auto& c) -> auto& { return c.scenario.trap.omega; }, true));
    f.push_back(real_field("trap", "kappa", [](auto& c) -> auto& { return c.scenario.trap.kappa; }));
    f.push_back(real_field("trap", "eta", [](auto& c) -> auto& { return c.scenario.trap.eta; }));
    f.push_back(real_field("trap", "lambda", [](auto& c) -> auto& { return c.scenario.trap.lambda; }));
    f.push_back(int_field<int>("trap", "n_atoms", [](auto& c) -> auto& { return c.scenario.trap.n_atoms; }, true));

    f.push_back(real_field("cavity", "xi", [](auto& c) -> auto& { return c.scenario.cavity.xi; }));
    f.push_back(real_field("cavity", "n_photons", [](auto& c) -> auto& { return c.scenario.cavity.n_photons; }));
    f.push_back(real_field("cavity", "gamma", [](auto& c) -> auto& { return c.scenario.cavity.gamma; }));
    f.push_back(real_field("cavity", "drive", [](auto& c) -> auto& { return c.scenario.cavity.drive; }));
    f.push_back(real_field("cavity", "detuning", [](auto& c) -> auto& { return c.scenario.cavity.detuning; }));
    f.push_back(real_field("cavity", "lo_amp", [](auto& c) -> auto& { return c.scenario.cavity.lo_amp; }));
    f.push_back(real_field("cavity", "cav_amp", [](auto& c) -> auto& { return c.scenario.cavity.cav_amp; }));
    f.push_back(optional_real_field("cavity", "gamma_meas",
                                    [](auto& c) -> auto& { return c.scenario.gamma_meas; }));

    f.push_back(real_field("initial", "jx0", [](auto& c) -> auto& { return c.scenario.initial.jx0; }));
    f.push_back(real_field("initial", "jy0", [](auto& c) -> auto& { return c.scenario.initial.jy0; }));
    f.push_back(real_field("initial", "jz0", [](auto& c) -> auto& { return c.scenario.initial.jz0; }));
    f.push_back(optional_real_field("initial", "theta",
                                    [](auto& c) -> auto& { return c.scenario.initial.theta; }));
    f.push_back(optional_real_field("initial", "phi",
                                    [](auto& c) -> auto& { return c.scenario.initial.phi; }));
    f.push_back(real_field("initial", "phase0", [](auto& c) -> auto& { return c.scenario.initial.phase0; }));
    f.push_back(optional_real_field("initial", "beta_mag",
                                    [](auto& c) -> auto& { return c.scenario.initial.beta_mag; }));

    f.push_back(real_field("integrator", "t0", [](auto& c) -> auto& { return c.scenario.grid.t0; }));
    f.push_back(real_field("integrator", "t_end", [](auto& c) -> auto& { return c.scenario.grid.t_end; }, true));
    f.push_back(real_field("integrator", "dt", [](auto& c) -> auto& { return c.scenario.grid.dt; }));
    f.push_back(int_field<std::size_t>("integrator", "stride",
                                       [](auto& c) -> auto& { return c.scenario.grid.stride; }));
    f.push_back(int_field<std::size_t>("integrator", "samples",
                                       [](auto& c) -> auto& { return c.scenario.grid.samples; }));

    f.push_back(int_field<std::uint64_t>("stochastic", "seed",
                                         [](auto& c) -> auto& { return c.scenario.stochastic.seed; }));
    f.push_back(int_field<std::size_t>("stochastic", "trajectories",
                                       [](auto& c) -> auto& { return c.scenario.stochastic.trajectories; }));
    f.push_back(int_field<unsigned>("stochastic", "threads",
                                    [](auto& c) -> auto& { return c.scenario.stochastic.threads; }));
    f.push_back({"stochastic", "sse_form", false,
                 [](RunConfig& c, std::string_view v) {
                   if (v == "normalized") c.scenario.stochastic.form = SseForm::normalized;
                   else if (v == "linear") c.scenario.stochastic.form = SseForm::linear;
                   else throw InvalidParameter("sse_form must be 'normalized' or 'linear'");
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return c.scenario.stochastic.form == SseForm::linear ? "linear" : "normalized";
                 }});
    f.push_back(int_field<std::size_t>("stochastic", "noise_substeps",
                                       [](auto& c) -> auto& { return c.scenario.stochastic.noise_substeps; }));

    f.push_back({"sweep", "kappa_n_over_omega", false,
                 [](RunConfig& c, std::string_view v) { c.scenario.sweep.kappa_n_over_omega = parse_double_list(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return join_doubles(c.scenario.sweep.kappa_n_over_omega);
                 }});
    f.push_back({"sweep", "eta_over_kappa", false,
                 [](RunConfig& c, std::string_view v) { c.scenario.sweep.eta_over_kappa = parse_double_list(v); },
                 [](const RunConfig& c) -> std::optional<std::string> { return join_doubles(c.scenario.sweep.eta_over_kappa); }});
    f.push_back(real_field("sweep", "jx_fraction", [](auto& c) -> auto& { return c.scenario.sweep.jx_fraction; }));
    f.push_back(int_field<int>("sweep", "jz_sign", [](auto& c) -> auto& { return c.scenario.sweep.jz_sign; }));
    f.push_back(real_field("sweep", "periods", [](auto& c) -> auto& { return c.scenario.sweep.periods; }));
    f.push_back(real_field("sweep", "max_step_phase",
                           [](auto& c) -> auto& { return c.scenario.sweep.max_step_phase; }));

    f.push_back({"output", "dir", false, [](RunConfig& c, std::string_view v) { c.output.dir = std::string(v); },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.output.dir.empty()) return std::nullopt;
                   return c.output.dir;
                 }});
    f.push_back({"output", "formats", false,
                 [](RunConfig& c, std::string_view v) {
                   auto list = split_list(v);
                   for (const auto& fmt : list)
                     if (fmt != "csv" && fmt != "json" && fmt != "svg")
                       throw InvalidParameter("unknown format '" + fmt + "' (csv|json|svg)");
                   c.output.formats = std::move(list);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return join_strings(c.output.formats); }});
    return f;
  }();
  return table;
}

inline const char* const kSections[] = {"scenario", "trap", "cavity", "initial", "integrator", "stochastic", "sweep", "output"};

}  // namespace config_detail

/// Invariants beyond the per-field parse: physical parameters and the grid.
inline std::vector<std::string> config_violations(const RunConfig& c) {
  std::vector<std::string> out;
  for (auto& v : c.scenario.trap.violations()) out.push_back("trap: " + v);
  for (auto& v : c.scenario.cavity.violations()) out.push_back("cavity: " + v);
  const auto& g = c.scenario.grid;
  if (!(g.t_end > g.t0)) out.push_back("integrator: t_end must exceed t0");
  if (!(g.dt > 0.0) || !std::isfinite(g.dt)) out.push_back("integrator: dt must be positive");
  if (g.stride == 0) out.push_back("integrator: stride must be >= 1");
  if (g.samples == 1) out.push_back("integrator: samples must be 0 or >= 2");
  if (c.scenario.gamma_meas && !(*c.scenario.gamma_meas >= 0.0)) out.push_back("cavity: gamma_meas must be >= 0");
  if (c.scenario.cavity.drive != 0.0 && c.scenario.cavity.gamma == 0.0 && !c.scenario.gamma_meas)
    out.push_back("cavity: gamma must be > 0 when drive is set");
  if (c.scenario.stochastic.trajectories == 0) out.push_back("stochastic: trajectories must be >= 1");
  if (c.scenario.stochastic.noise_substeps == 0) out.push_back("stochastic: noise_substeps must be >= 1");
  if (c.scenario.initial.beta_mag && !(*c.scenario.initial.beta_mag > 0.0))
    out.push_back("initial: beta_mag must be > 0");
  return out;
}

inline RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>",
                                   ConfigMode mode = ConfigMode::config) {
  using namespace config_detail;
  RunConfig cfg;
  std::vector<std::string> problems;
  std::vector<std::string> seen;
  std::string section;
  bool skipping = false;
  std::size_t line_no = 0;

  auto where = [&](std::size_t line) { return source + ":" + std::to_string(line) + ": "; };
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(where(line_no) + "malformed section header");
        skipping = true;
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      skipping = false;
      if (mode == ConfigMode::manifest && (section == "run" || section.rfind("meta.", 0) == 0)) {
        skipping = true;
        continue;
      }
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections)) {
        problems.push_back(where(line_no) + "unknown section [" + section + "]");
        skipping = true;
      }
      continue;
    }
    if (skipping) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back(where(line_no) + "expected 'key = value'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty()) {
      problems.push_back(where(line_no) + "key '" + std::string(key) + "' outside any section");
      continue;
    }
    const std::string full = section + "." + std::string(key);
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Field& f) { return f.section == section && f.key == key; });
    if (it == table.end()) {
      problems.push_back(where(line_no) + "unknown key '" + full + "'");
      continue;
    }
    if (std::find(seen.begin(), seen.end(), full) != seen.end()) {
      problems.push_back(where(line_no) + "duplicate key '" + full + "'");
      continue;
    }
    seen.push_back(full);
    try {
      it->set(cfg, value);
    } catch (const Error& e) {
      problems.push_back(where(line_no) + full + ": " + e.what());
    }
  }

  for (const auto& f : fields()) {
    const std::string full = std::string(f.section) + "." + std::string(f.key);
    if (f.required && std::find(seen.begin(), seen.end(), full) == seen.end())
      problems.push_back(source + ": missing required key '" + full + "'");
  }
  if (problems.empty())
    for (auto& v : config_violations(cfg)) problems.push_back(source + ": " + v);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return cfg;
}

inline RunConfig parse_config(const std::string& path, ConfigMode mode = ConfigMode::config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, mode);
}

/// Every field, defaults included, in canonical order.
inline std::string emit_config(const RunConfig& cfg, bool include_output_dir = true) {
  using namespace config_detail;
  std::string out;
  for (const char* sec : kSections) {
    out += "[";
    out += sec;
    out += "]\n";
    for (const auto& f : fields()) {
      if (f.section != sec) continue;
      if (!include_output_dir && f.section == "output" && f.key == "dir") continue;
      if (auto v = f.get(cfg)) {
        out += f.key;
        out += " = ";
        out += *v;
        out += "\n";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace dwh
