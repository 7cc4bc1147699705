#pragma once

// File formats: trace/command/profile/sensitivity CSV and model/shaper/
// parameter/metrics JSON. Numbers are written in the shortest form that
// parses back to the same double, so outputs are deterministic and lossless.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "jointshape/analysis.hpp"
#include "jointshape/error.hpp"
#include "jointshape/oscillator.hpp"
#include "jointshape/shaping.hpp"
#include "jointshape/sysid.hpp"

namespace jointshape::io {

using json = nlohmann::json;

inline constexpr std::string_view kTraceHeader = "time_s,theta_rad";
inline constexpr std::string_view kCommandHeader = "time_s,u_rad";
inline constexpr std::string_view kProfileHeader = "segment,delay_s,theta_i_rad,theta_f_rad,velocity_rad_s";
inline constexpr std::string_view kSensitivityHeader = "ratio,residual_percent";

/// Relative slack on the spacing of time stamps read from CSV.
inline constexpr double kUniformSpacingTolerance = 1e-6;

inline std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "io", "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "io", "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "io", "failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void parse_fail(std::string_view source, std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Parse, "io", std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

inline double parse_number(std::string_view field, std::string_view source, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    parse_fail(source, line, "'" + std::string(field) + "' is not a number");
  }
  return value;
}

struct CsvRows {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
};

inline CsvRows parse_csv(std::string_view text, std::string_view header, std::size_t columns,
                         std::string_view source) {
  CsvRows out;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != header) {
        parse_fail(source, line_no, "expected header '" + std::string(header) + "'");
      }
      saw_header = true;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_number(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                    : comma - start),
                                 source, line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() != columns) {
      parse_fail(source, line_no,
                 "expected " + std::to_string(columns) + " columns, got " + std::to_string(row.size()));
    }
    out.rows.push_back(std::move(row));
    out.lines.push_back(line_no);
  }
  if (!saw_header) parse_fail(source, line_no, "missing header '" + std::string(header) + "'");
  return out;
}

// Checks that column 0 is uniformly spaced and returns (start, dt, values).
struct UniformSeries {
  double start = 0.0;
  double dt = 0.0;
  std::vector<double> values;
};

inline UniformSeries uniform_series(const CsvRows& csv, std::string_view source) {
  if (csv.rows.size() < 2) parse_fail(source, csv.lines.empty() ? 1 : csv.lines.back(), "need at least 2 rows");
  UniformSeries out;
  out.start = csv.rows.front()[0];
  const double span = csv.rows.back()[0] - out.start;
  out.dt = span / static_cast<double>(csv.rows.size() - 1);
  if (!(out.dt > 0.0)) parse_fail(source, csv.lines[1], "time stamps must increase");
  // Interval check first so the error points at the row that breaks the spacing.
  const double first_step = csv.rows[1][0] - csv.rows[0][0];
  for (std::size_t i = 2; i < csv.rows.size(); ++i) {
    if (std::abs(csv.rows[i][0] - csv.rows[i - 1][0] - first_step) > 1e-3 * first_step) {
      parse_fail(source, csv.lines[i], "time stamps are not uniformly spaced");
    }
  }
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double expected = out.start + out.dt * static_cast<double>(i);
    if (std::abs(csv.rows[i][0] - expected) > kUniformSpacingTolerance * std::max(out.dt, std::abs(expected))) {
      parse_fail(source, csv.lines[i], "time stamps are not uniformly spaced");
    }
    if (!std::isfinite(csv.rows[i][1])) parse_fail(source, csv.lines[i], "value is not finite");
    out.values.push_back(csv.rows[i][1]);
  }
  return out;
}

}  // namespace detail

inline std::string trace_to_csv(const Trace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_double(trace.time_at(i));
    out += ',';
    out += format_double(trace.samples[i]);
    out += '\n';
  }
  return out;
}

inline Trace trace_from_csv(std::string_view text, std::string_view source = "<trace>") {
  auto series = detail::uniform_series(detail::parse_csv(text, kTraceHeader, 2, source), source);
  Trace trace;
  trace.samples = std::move(series.values);
  trace.dt = series.dt;
  trace.start_time = series.start;
  return trace;
}

inline std::string command_to_csv(const SampledCommand& command) {
  std::string out(kCommandHeader);
  out += '\n';
  for (std::size_t i = 0; i < command.samples.size(); ++i) {
    out += format_double(command.time_at(i));
    out += ',';
    out += format_double(command.samples[i]);
    out += '\n';
  }
  return out;
}

inline SampledCommand command_from_csv(std::string_view text, std::string_view source = "<command>") {
  const auto csv = detail::parse_csv(text, kCommandHeader, 2, source);
  auto series = detail::uniform_series(csv, source);
  if (std::abs(series.start) > kUniformSpacingTolerance * series.dt) {
    detail::parse_fail(source, csv.lines.front(), "command must start at t = 0");
  }
  return SampledCommand{std::move(series.values), series.dt};
}

inline std::string profile_to_csv(const SegmentedProfile& profile) {
  std::string out(kProfileHeader);
  out += '\n';
  for (std::size_t i = 0; i < profile.segments.size(); ++i) {
    const auto& s = profile.segments[i];
    out += std::to_string(i + 1);
    for (double v : {s.start_time, s.start_position, s.end_position, s.velocity}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline SegmentedProfile profile_from_csv(std::string_view text, std::string_view source = "<profile>") {
  const auto csv = detail::parse_csv(text, kProfileHeader, 5, source);
  SegmentedProfile profile;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& r = csv.rows[i];
    if (r[0] != static_cast<double>(i + 1)) detail::parse_fail(source, csv.lines[i], "segments must be numbered 1, 2, ...");
    profile.segments.push_back(Segment{r[1], r[2], r[3], r[4]});
  }
  validate(profile, 1e-6);
  return profile;
}

inline std::string sensitivity_to_csv(const SensitivityCurve& curve) {
  std::string out(kSensitivityHeader);
  out += '\n';
  for (const auto& p : curve.points) {
    out += format_double(p.ratio);
    out += ',';
    out += p.residual_percent ? format_double(*p.residual_percent) : std::string("nan");
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "io", std::string(source) + ": " + e.what());
  }
}

namespace detail {

inline double number_field(const json& j, const char* key, std::string_view source) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorKind::Parse, "io", std::string(source) + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace detail

inline json model_to_json(const OscillatorModel& model) {
  return json{{"omega_n_rad_s", model.natural_frequency()}, {"zeta", model.damping_ratio()}};
}

inline json model_to_json(const PhysicalJointModel& model) {
  return json{{"inertia", model.inertia}, {"stiffness", model.stiffness}, {"damping", model.damping}};
}

/// Accepts either the normalized or the physical form.
inline OscillatorModel model_from_json(const json& j, std::string_view source = "<model>") {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "io", std::string(source) + ": model must be an object");
  const bool normalized = j.contains("omega_n_rad_s") || j.contains("zeta");
  const bool physical = j.contains("inertia") || j.contains("stiffness") || j.contains("damping");
  if (normalized == physical) {
    throw Error(ErrorKind::Parse, "io",
                std::string(source) + ": model needs either omega_n_rad_s/zeta or inertia/stiffness/damping");
  }
  if (normalized) {
    return OscillatorModel::create(detail::number_field(j, "omega_n_rad_s", source),
                                   detail::number_field(j, "zeta", source));
  }
  return normalize(PhysicalJointModel{detail::number_field(j, "inertia", source),
                                      detail::number_field(j, "stiffness", source),
                                      detail::number_field(j, "damping", source)});
}

inline json shaper_to_json(const ImpulseShaper& shaper) {
  json impulses = json::array();
  for (const auto& imp : shaper.impulses()) impulses.push_back({{"amplitude", imp.amplitude}, {"time_s", imp.time}});
  return json{{"impulses", impulses}};
}

inline ImpulseShaper shaper_from_json(const json& j, std::string_view source = "<shaper>") {
  if (!j.is_object() || !j.contains("impulses") || !j.at("impulses").is_array()) {
    throw Error(ErrorKind::Parse, "io", std::string(source) + ": expected {\"impulses\": [...]}");
  }
  std::vector<Impulse> impulses;
  for (const auto& item : j.at("impulses")) {
    impulses.push_back(Impulse{detail::number_field(item, "amplitude", source),
                               detail::number_field(item, "time_s", source)});
  }
  return ImpulseShaper::create(std::move(impulses));
}

inline json params_to_json(const IdentifiedParams& p) {
  return json{{"omega_d_rad_s", p.damped_frequency},
              {"zeta", p.damping_ratio},
              {"omega_n_rad_s", p.natural_frequency},
              {"period_s", p.period}};
}

inline IdentifiedParams params_from_json(const json& j, std::string_view source = "<params>") {
  IdentifiedParams p;
  p.damped_frequency = detail::number_field(j, "omega_d_rad_s", source);
  p.damping_ratio = detail::number_field(j, "zeta", source);
  p.natural_frequency = detail::number_field(j, "omega_n_rad_s", source);
  p.period = detail::number_field(j, "period_s", source);
  return p;
}

inline json metrics_to_json(const ResponseMetrics& m) {
  json j{{"max_overshoot_percent", m.max_overshoot_percent},
         {"residual_amplitude", m.residual_amplitude},
         {"settling_time", nullptr},
         {"time_penalty", m.time_penalty}};
  if (m.settling_time) j["settling_time"] = *m.settling_time;
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace jointshape::io
