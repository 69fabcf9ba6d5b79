#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dwh/errors.hpp"
#include "dwh/model.hpp"

namespace dwh {

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidParameter("not a number: '" + std::string(text) + "'");
  return v;
}

struct Channel {
  std::string name;
  std::vector<double> values;
};

// Ordered so that serialized manifests are stable.
using Meta = std::map<std::string, std::string>;

struct TimeSeries {
  std::vector<double> times;
  std::vector<BlochState> states;  // empty when the series carries no spin data
  std::vector<double> phase;       // empty = channel absent
  std::vector<double> current;     // empty = channel absent
  std::vector<Channel> extra;      // appended after the fixed columns, in order
  Meta meta;

  std::size_t size() const noexcept { return times.size(); }
  bool has_states() const noexcept { return !states.empty(); }
  bool has_phase() const noexcept { return !phase.empty(); }
  bool has_current() const noexcept { return !current.empty(); }

  const Channel* find(std::string_view name) const {
    for (const auto& c : extra)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::vector<double>& add_channel(std::string name) {
    extra.push_back({std::move(name), {}});
    extra.back().values.reserve(times.size());
    return extra.back().values;
  }

  std::vector<double> jx() const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.jx);
    return out;
  }

  void check_consistent() const {
    const auto n = times.size();
    auto same = [&](std::size_t m, const std::string& what) {
      if (m != 0 && m != n) throw InvalidParameter("channel '" + what + "' length differs from times");
    };
    same(states.size(), "states");
    same(phase.size(), "phase");
    same(current.size(), "current");
    for (const auto& c : extra)
      if (c.values.size() != n) throw InvalidParameter("channel '" + c.name + "' length differs from times");
    for (std::size_t i = 1; i < n; ++i)
      if (!(times[i] > times[i - 1])) throw InvalidParameter("times must be strictly increasing");
  }
};

}  // namespace dwh
