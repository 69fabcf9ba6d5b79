#pragma once

// Artifact serialization: CSV, JSON, SVG line plots, two-column curve files
// and the run manifest. Every number is written in shortest round-trip form
// and nothing time- or host-dependent is emitted, so identical runs produce
// identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dwh/config.hpp"
#include "dwh/errors.hpp"
#include "dwh/experiments.hpp"
#include "dwh/timeseries.hpp"

#ifndef DWH_VERSION
#define DWH_VERSION "unknown"
#endif

namespace dwh {

inline constexpr const char* kVersion = DWH_VERSION;

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

/// Header `t,jx,jy,jz,phase,current` with absent channels omitted, followed
/// by the extra channels in order.
inline std::string csv_text(const TimeSeries& s) {
  s.check_consistent();
  std::string out = "t";
  if (s.has_states()) out += ",jx,jy,jz";
  if (s.has_phase()) out += ",phase";
  if (s.has_current()) out += ",current";
  for (const auto& c : s.extra) out += "," + c.name;
  out += "\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += format_double(s.times[i]);
    if (s.has_states()) {
      out += "," + format_double(s.states[i].jx);
      out += "," + format_double(s.states[i].jy);
      out += "," + format_double(s.states[i].jz);
    }
    if (s.has_phase()) out += "," + format_double(s.phase[i]);
    if (s.has_current()) out += "," + format_double(s.current[i]);
    for (const auto& c : s.extra) out += "," + format_double(c.values[i]);
    out += "\n";
  }
  return out;
}

inline TimeSeries parse_csv_text(std::string_view text, const std::string& source = "<csv>") {
  auto next_line = [&]() -> std::string_view {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };
  auto split = [](std::string_view line) {
    std::vector<std::string_view> cells;
    while (true) {
      const auto comma = line.find(',');
      cells.push_back(line.substr(0, comma));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    return cells;
  };
  if (text.empty()) throw IoError(source + ": empty CSV");
  const auto header = split(next_line());
  if (header.empty() || header[0] != "t") throw IoError(source + ": first column must be 't'");

  TimeSeries s;
  int ix = -1, iy = -1, iz = -1, iphase = -1, icur = -1;
  std::vector<int> extra_col;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto h = header[c];
    const int ci = static_cast<int>(c);
    if (h == "jx") ix = ci;
    else if (h == "jy") iy = ci;
    else if (h == "jz") iz = ci;
    else if (h == "phase") iphase = ci;
    else if (h == "current") icur = ci;
    else {
      s.extra.push_back({std::string(h), {}});
      extra_col.push_back(ci);
    }
  }
  const bool states = ix >= 0 || iy >= 0 || iz >= 0;
  if (states && (ix < 0 || iy < 0 || iz < 0)) throw IoError(source + ": jx, jy and jz must appear together");

  std::size_t line_no = 1;
  while (!text.empty()) {
    ++line_no;
    const auto line = next_line();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " columns");
    try {
      s.times.push_back(parse_double(cells[0]));
      if (states) s.states.push_back({parse_double(cells[ix]), parse_double(cells[iy]), parse_double(cells[iz])});
      if (iphase >= 0) s.phase.push_back(parse_double(cells[iphase]));
      if (icur >= 0) s.current.push_back(parse_double(cells[icur]));
      for (std::size_t k = 0; k < extra_col.size(); ++k) s.extra[k].values.push_back(parse_double(cells[extra_col[k]]));
    } catch (const InvalidParameter& e) {
      throw IoError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return s;
}

inline TimeSeries read_csv(const std::filesystem::path& path) { return parse_csv_text(read_text_file(path), path.string()); }

inline std::string sweep_csv_text(const SweepTable& t) {
  std::string out = "kappa_n_over_omega,eta_over_kappa,order_parameter,error\n";
  for (const auto& c : t.cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += format_double(c.kappa_n_over_omega) + "," + format_double(c.eta_over_kappa) + "," +
           format_double(c.order_parameter) + "," + err + "\n";
  }
  return out;
}

inline std::string report_text(const ValidationReport& r) {
  std::string out = "scenario " + r.scenario + ": " + (r.passed() ? "PASS" : "FAIL") + "\n";
  for (const auto& e : r.entries) {
    out += "  ";
    if (e.skipped) {
      out += "SKIP " + e.name + " (" + e.note + ")\n";
      continue;
    }
    out += e.passed ? "PASS " : (e.hard ? "FAIL " : "WARN ");
    out += e.name + " [" + e.channel + "] max_dev=" + format_double(e.max_dev) + " tol=" + format_double(e.tol);
    if (!e.hard) out += " (informational)";
    if (!e.note.empty()) out += " " + e.note;
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json series_json(const TimeSeries& s) {
  using nlohmann::ordered_json;
  auto number = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(format_double(v)); };
  auto array = [&](const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(number(x));
    return a;
  };
  ordered_json j;
  j["meta"] = ordered_json::object();
  for (const auto& [k, v] : s.meta) j["meta"][k] = v;
  j["t"] = array(s.times);
  if (s.has_states()) {
    std::vector<double> x, y, z;
    for (const auto& b : s.states) {
      x.push_back(b.jx);
      y.push_back(b.jy);
      z.push_back(b.jz);
    }
    j["jx"] = array(x);
    j["jy"] = array(y);
    j["jz"] = array(z);
  }
  if (s.has_phase()) j["phase"] = array(s.phase);
  if (s.has_current()) j["current"] = array(s.current);
  for (const auto& c : s.extra) j[c.name] = array(c.values);
  return j;
}

inline std::string json_text(const RunOutput& run) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = run.name;
  j["version"] = kVersion;
  j["meta"] = ordered_json::object();
  for (const auto& [k, v] : run.meta) j["meta"][k] = v;
  j["artifacts"] = ordered_json::object();
  for (const auto& a : run.artifacts) j["artifacts"][a.label] = series_json(a.series);
  if (run.sweep) {
    ordered_json cells = ordered_json::array();
    for (const auto& c : run.sweep->cells) {
      ordered_json cell;
      cell["kappa_n_over_omega"] = c.kappa_n_over_omega;
      cell["eta_over_kappa"] = c.eta_over_kappa;
      cell["order_parameter"] = std::isfinite(c.order_parameter) ? ordered_json(c.order_parameter) : ordered_json(nullptr);
      if (!c.error.empty()) cell["error"] = c.error;
      cells.push_back(cell);
    }
    j["sweep"] = cells;
  }
  if (run.report) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : run.report->entries) {
      ordered_json x;
      x["name"] = e.name;
      x["channel"] = e.channel;
      x["max_dev"] = e.max_dev;
      x["tol"] = e.tol;
      x["passed"] = e.passed;
      x["hard"] = e.hard;
      x["skipped"] = e.skipped;
      x["note"] = e.note;
      entries.push_back(x);
    }
    j["validation"] = {{"scenario", run.report->scenario}, {"passed", run.report->passed()}, {"entries", entries}};
  }
  return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// SVG

namespace io_detail {
inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}
}  // namespace io_detail

/// One panel per channel, stacked, with linear axes and the value range
/// printed beside each panel.
inline std::string svg_text(const std::string& title, const TimeSeries& s) {
  using io_detail::fixed;
  std::vector<std::pair<std::string, std::vector<double>>> channels;
  if (s.has_states()) {
    std::vector<double> x, y, z;
    for (const auto& b : s.states) {
      x.push_back(b.jx);
      y.push_back(b.jy);
      z.push_back(b.jz);
    }
    channels.emplace_back("jx", std::move(x));
    channels.emplace_back("jy", std::move(y));
    channels.emplace_back("jz", std::move(z));
  }
  if (s.has_phase()) channels.emplace_back("phase", s.phase);
  if (s.has_current()) channels.emplace_back("current", s.current);

  const double width = 800, panel = 160, left = 90, right = 20, top = 40, gap = 30;
  const double height = top + static_cast<double>(channels.size()) * (panel + gap) + 30;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" +
                    fixed(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         io_detail::escape(title) + "</text>\n";
  if (s.size() == 0) return out + "</svg>\n";

  const double t0 = s.times.front(), t1 = s.times.back();
  const double tspan = t1 > t0 ? t1 - t0 : 1.0;
  for (std::size_t p = 0; p < channels.size(); ++p) {
    const auto& [name, v] = channels[p];
    double lo = INFINITY, hi = -INFINITY;
    for (double x : v)
      if (std::isfinite(x)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    if (hi == lo) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double y0 = top + static_cast<double>(p) * (panel + gap);
    const double w = width - left - right;
    out += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(y0) + "\" width=\"" + fixed(w) + "\" height=\"" +
           fixed(panel) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    out += "<text x=\"8\" y=\"" + fixed(y0 + panel / 2) + "\" font-family=\"sans-serif\" font-size=\"12\">" + name +
           "</text>\n";
    out += "<text x=\"8\" y=\"" + fixed(y0 + 12) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
           format_double(hi) + "</text>\n";
    out += "<text x=\"8\" y=\"" + fixed(y0 + panel) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
           format_double(lo) + "</text>\n";
    out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) continue;
      const double px = left + (s.times[i] - t0) / tspan * w;
      const double py = y0 + panel - (v[i] - lo) / (hi - lo) * panel;
      if (!first) out += " ";
      out += fixed(px) + "," + fixed(py);
      first = false;
    }
    out += "\"/>\n";
  }
  const double yb = height - 10;
  out += "<text x=\"" + fixed(left) + "\" y=\"" + fixed(yb) + "\" font-family=\"sans-serif\" font-size=\"10\">t = " +
         format_double(t0) + "</text>\n";
  out += "<text x=\"" + fixed(width - right - 120) + "\" y=\"" + fixed(yb) +
         "\" font-family=\"sans-serif\" font-size=\"10\">t = " + format_double(t1) + "</text>\n";
  return out + "</svg>\n";
}

inline std::string two_column_text(const std::vector<double>& t, const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < t.size() && i < v.size(); ++i) out += format_double(t[i]) + " " + format_double(v[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Manifest and artifact emission

/// The configuration echo (parseable with ConfigMode::manifest) followed by
/// a [run] section and one [meta.<label>] section per artifact.
inline std::string manifest_text(const RunConfig& cfg, const RunOutput& run, const std::vector<std::string>& files) {
  std::string out = emit_config(cfg, false);
  out += "[run]\n";
  out += "version = " + std::string(kVersion) + "\n";
  for (const auto& [k, v] : run.meta) out += k + " = " + v + "\n";
  out += "files = ";
  for (std::size_t i = 0; i < files.size(); ++i) out += (i ? ", " : "") + files[i];
  out += "\n\n";
  for (const auto& a : run.artifacts) {
    out += "[meta." + a.label + "]\n";
    for (const auto& [k, v] : a.series.meta) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

/// Writes every artifact of `run` into `dir` in the requested formats and
/// returns the file names written (manifest last).
inline std::vector<std::string> emit_artifacts(const RunOutput& run, const RunConfig& cfg,
                                               const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };

  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    files.push_back(name);
  };
  for (const auto& a : run.artifacts) {
    if (wants("csv")) put(a.label + ".csv", csv_text(a.series));
    if (wants("svg")) put(a.label + ".svg", svg_text(a.label, a.series));
    if (run.figure) {
      if (a.series.has_current()) put(a.label + "_current.dat", two_column_text(a.series.times, a.series.current));
      if (a.series.has_states()) {
        std::vector<double> jx = a.series.jx();
        put(a.label + "_jx.dat", two_column_text(a.series.times, jx));
      }
    }
  }
  if (run.sweep) put(run.name + "_sweep.csv", sweep_csv_text(*run.sweep));
  if (run.report) put(run.name + "_validation.txt", report_text(*run.report));
  if (wants("json")) put(run.name + ".json", json_text(run));
  const std::string manifest = run.name + ".manifest";
  files.push_back(manifest);
  write_text_file(dir / manifest, manifest_text(cfg, run, files));
  return files;
}

}  // namespace dwh
