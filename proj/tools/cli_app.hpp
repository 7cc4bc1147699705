#pragma once

// Command-line front end. Kept in a header so the tests can drive it in-process.

#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jointshape/jointshape.hpp"
#include "jointshape/reproduce.hpp"
#include "jointshape/svg.hpp"

namespace jointshape::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kInputParse = 3,
  kModelValidation = 4,
  kAnchorFailure = 5,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Io: return kInputParse;
    default: return kModelValidation;
  }
}

/// Raised for option combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return s;
}

struct ModelOptions {
  std::optional<double> omega_n;
  std::optional<double> zeta;
  std::optional<double> inertia;
  std::optional<double> stiffness;
  std::optional<double> damping;
  std::string model_file;

  void add(CLI::App& app) {
    app.add_option("--omega-n", omega_n, "Natural frequency, rad/s");
    app.add_option("--zeta", zeta, "Damping ratio");
    app.add_option("--inertia", inertia, "Joint inertia J, kg·m²");
    app.add_option("--stiffness", stiffness, "Torsional stiffness K_T, N·m/rad");
    app.add_option("--damping", damping, "Torsional damping B_T, N·m·s/rad");
    app.add_option("--model", model_file, "Model JSON file");
  }

  bool given() const {
    return omega_n || zeta || inertia || stiffness || damping || !model_file.empty();
  }

  OscillatorModel resolve() const {
    const bool normalized = omega_n || zeta;
    const bool physical = inertia || stiffness || damping;
    const bool file = !model_file.empty();
    if (normalized + physical + file != 1) {
      throw UsageError("give exactly one model source: --omega-n/--zeta, --inertia/--stiffness/--damping, or --model");
    }
    if (file) return io::model_from_json(io::parse_json(io::read_file(model_file), model_file), model_file);
    if (normalized) {
      if (!omega_n || !zeta) throw UsageError("--omega-n and --zeta must be given together");
      return OscillatorModel::create(*omega_n, *zeta);
    }
    if (!inertia || !stiffness || !damping) {
      throw UsageError("--inertia, --stiffness and --damping must be given together");
    }
    return normalize(PhysicalJointModel{*inertia, *stiffness, *damping});
  }
};

struct CommandOptions {
  std::optional<double> ramp_target;
  std::optional<double> ramp_speed;
  std::optional<double> step;
  std::optional<double> constant;
  std::string command_file;

  void add(CLI::App& app) {
    app.add_option("--ramp-target", ramp_target, "Ramp command target, rad");
    app.add_option("--ramp-speed", ramp_speed, "Ramp command speed, rad/s");
    app.add_option("--step", step, "Step command target, rad");
    app.add_option("--constant", constant, "Constant command value, rad");
    app.add_option("--command", command_file, "Sampled command CSV (time_s,u_rad)");
  }

  std::optional<Command> resolve() const {
    const bool ramp = ramp_target || ramp_speed;
    const int sources = ramp + static_cast<bool>(step) + static_cast<bool>(constant) + !command_file.empty();
    if (sources > 1) throw UsageError("give at most one command: ramp, --step, --constant or --command");
    if (ramp) {
      if (!ramp_target || !ramp_speed) throw UsageError("--ramp-target and --ramp-speed must be given together");
      return Command{Ramp{*ramp_target, *ramp_speed}};
    }
    if (step) return Command{Step{*step}};
    if (constant) return Command{Constant{*constant}};
    if (!command_file.empty()) return Command{io::command_from_csv(io::read_file(command_file), command_file)};
    return std::nullopt;
  }
};

struct ShaperOptions {
  std::string shaper_file;
  std::string type = "zvd";
  std::string frequency = "damped";

  void add(CLI::App& app, bool with_design) {
    app.add_option("--shaper", shaper_file, "Shaper JSON file");
    if (with_design) {
      app.add_option("--type", type, "Shaper design when no --shaper file is given")
          ->check(CLI::IsMember({"zvd", "zv", "none"}));
      app.add_option("--frequency", frequency, "Impulse spacing frequency")
          ->check(CLI::IsMember({"damped", "natural"}));
    }
  }

  ImpulseShaper design(const OscillatorModel& model) const {
    const auto choice = frequency == "natural" ? FrequencyChoice::Natural : FrequencyChoice::Damped;
    if (type == "zv") return design_zv(model, choice);
    if (type == "none") return ImpulseShaper::identity();
    return design_zvd(model, choice);
  }

  std::optional<ImpulseShaper> load() const {
    if (shaper_file.empty()) return std::nullopt;
    return io::shaper_from_json(io::parse_json(io::read_file(shaper_file), shaper_file), shaper_file);
  }
};

struct Output {
  std::string path;
  std::string format = "csv";
  bool degrees = false;

  void add(CLI::App& app, std::vector<std::string> formats) {
    app.add_option("-o,--output", path, "Output file (stdout when omitted)");
    if (formats.size() > 1) {
      app.add_option("--format", format, "Output format")->check(CLI::IsMember(formats));
    }
    if (std::find(formats.begin(), formats.end(), "svg") != formats.end()) {
      app.add_flag("--degrees", degrees, "Show angles in degrees on plots (files stay in radians)");
    }
  }
  double angle(double rad) const { return degrees ? rad * 180.0 / std::numbers::pi : rad; }
  std::string angle_unit() const { return degrees ? "deg" : "rad"; }
};

struct PendingWrite {
  std::string path;
  std::string content;
};

}  // namespace detail

/// Parses argv, runs one subcommand and returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elastic-joint vibration suppression: identification, ZVD input shaping and servo segments",
               "jointshape"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  detail::ModelOptions model_opts;
  detail::CommandOptions command_opts;
  detail::ShaperOptions shaper_opts;
  detail::Output output;
  double dt = kDefaultDt;
  std::optional<double> duration;

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the oscillator response to a command");
  double theta0 = 0.0;
  double omega0 = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string metrics_path;
  model_opts.add(*simulate_cmd);
  command_opts.add(*simulate_cmd);
  simulate_cmd->add_option("--shaper", shaper_opts.shaper_file, "Shape the command with this shaper first");
  simulate_cmd->add_option("--theta0", theta0, "Initial position, rad");
  simulate_cmd->add_option("--omega0", omega0, "Initial velocity, rad/s");
  simulate_cmd->add_option("--dt", dt, "Time step, s")->capture_default_str();
  simulate_cmd->add_option("--duration", duration, "Simulated time, s (default: command + 5 damped periods)");
  simulate_cmd->add_option("--noise", noise, "Uniform measurement noise amplitude added to the trace, rad");
  simulate_cmd->add_option("--seed", seed, "Noise seed")->capture_default_str();
  simulate_cmd->add_option("--metrics", metrics_path, "Also write response metrics JSON to this file");
  output.add(*simulate_cmd, {"csv", "svg"});

  // identify
  auto* identify_cmd = app.add_subcommand("identify", "Identify ωd, ζ, ωn from recorded traces");
  std::vector<std::string> trace_files;
  std::optional<double> baseline;
  identify_cmd->add_option("--traces", trace_files, "Trace CSV files (time_s,theta_rad)")->required();
  identify_cmd->add_option("--baseline", baseline, "Settling value, rad (default: mean of the last 10%)");
  output.add(*identify_cmd, {"json"});

  // design
  auto* design_cmd = app.add_subcommand("design", "Design a ZVD or ZV shaper");
  model_opts.add(*design_cmd);
  design_cmd->add_option("--type", shaper_opts.type, "Shaper type")->check(CLI::IsMember({"zvd", "zv"}));
  design_cmd->add_option("--frequency", shaper_opts.frequency, "Impulse spacing frequency")
      ->check(CLI::IsMember({"damped", "natural"}));
  output.add(*design_cmd, {"json"});

  // shape
  auto* shape_cmd = app.add_subcommand("shape", "Convolve a command with a shaper");
  model_opts.add(*shape_cmd);
  command_opts.add(*shape_cmd);
  shaper_opts.add(*shape_cmd, true);
  shape_cmd->add_option("--dt", dt, "Sample interval, s")->capture_default_str();
  output.add(*shape_cmd, {"csv", "svg"});

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "Compile a shaped ramp into servo segments");
  double ramp_target = 0.0;
  double ramp_speed = 0.0;
  std::string rounding = "none";
  model_opts.add(*segment_cmd);
  shaper_opts.add(*segment_cmd, true);
  segment_cmd->add_option("--ramp-target", ramp_target, "Ramp target, rad")->required();
  segment_cmd->add_option("--ramp-speed", ramp_speed, "Ramp speed, rad/s")->required();
  segment_cmd->add_option("--round", rounding, "Round to servo-table precision")
      ->check(CLI::IsMember({"none", "table"}));
  output.add(*segment_cmd, {"csv"});

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Residual vibration under model error");
  std::string parameter = "natural_frequency";
  double ratio_min = 0.8;
  double ratio_max = 1.2;
  double ratio_step = 0.01;
  std::vector<double> ratios;
  model_opts.add(*sweep_cmd);
  command_opts.add(*sweep_cmd);
  shaper_opts.add(*sweep_cmd, true);
  sweep_cmd->add_option("--parameter", parameter, "Perturbed parameter")
      ->check(CLI::IsMember({"natural_frequency", "damping_ratio"}));
  sweep_cmd->add_option("--ratio-min", ratio_min, "Smallest actual/nominal ratio")->capture_default_str();
  sweep_cmd->add_option("--ratio-max", ratio_max, "Largest actual/nominal ratio")->capture_default_str();
  sweep_cmd->add_option("--ratio-step", ratio_step, "Ratio grid spacing")->capture_default_str();
  sweep_cmd->add_option("--ratios", ratios, "Explicit ratio list (overrides the grid)");
  sweep_cmd->add_option("--dt", dt, "Time step, s")->capture_default_str();
  output.add(*sweep_cmd, {"csv", "svg"});

  // reproduce
  auto* reproduce_cmd = app.add_subcommand("reproduce", "Recompute the reference anchors and report pass/fail");
  std::string report_path;
  reproduce_cmd->add_option("--report", report_path, "Report file (also printed to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: code=" << kUsage << " kind=usage module=cli message=\"" << detail::one_line(e.what()) << "\"\n";
    return kUsage;
  }

  std::vector<detail::PendingWrite> writes;
  auto emit = [&](const std::string& path, std::string content) {
    writes.push_back({path, std::move(content)});
  };

  try {
    if (simulate_cmd->parsed()) {
      const auto model = model_opts.resolve();
      Command command = command_opts.resolve().value_or(Command{Constant{0.0}});
      const auto shaper = shaper_opts.load();
      double end = command_end_time(command);
      double penalty = 0.0;
      Command raw = command;
      if (shaper) {
        command = shape_command(*shaper, command, dt);
        penalty = time_penalty(*shaper);
        end += penalty;
      }
      const double length = duration.value_or(residual_window_duration(model, end));
      auto trace = simulate(model, command, dt, length, InitialState{theta0, omega0});
      if (noise > 0.0) {
        std::mt19937_64 rng(seed);
        for (double& x : trace.samples) {
          const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
          x += noise * (2.0 * unit - 1.0);
        }
      }
      if (!metrics_path.empty()) {
        emit(metrics_path, io::dump(io::metrics_to_json(compute_metrics(
                               trace, command_final_value(command), end, kDefaultSettlingBandPercent, penalty))));
      }
      if (output.format == "svg") {
        svg::Chart chart{"Simulated response", "time (s)", "angle (" + output.angle_unit() + ")", {}};
        svg::Series cmd_series{"command", {}, "#1f77b4", true};
        svg::Series resp{"response", {}, "#d62728", false};
        for (std::size_t i = 0; i < trace.size(); ++i) {
          const double t = trace.time_at(i);
          cmd_series.points.emplace_back(t, output.angle(command_value(command, t)));
          resp.points.emplace_back(t, output.angle(trace.samples[i]));
        }
        chart.series = {cmd_series, resp};
        if (shaper) {
          const auto unshaped = simulate(model, raw, dt, length, InitialState{theta0, omega0});
          svg::Series base{"unshaped response", {}, "#000000", false};
          for (std::size_t i = 0; i < unshaped.size(); ++i) {
            base.points.emplace_back(unshaped.time_at(i), output.angle(unshaped.samples[i]));
          }
          chart.series.push_back(base);
        }
        emit(output.path, svg::render(chart));
      } else {
        emit(output.path, io::trace_to_csv(trace));
      }
    } else if (identify_cmd->parsed()) {
      std::vector<Trace> traces;
      for (const auto& f : trace_files) traces.push_back(io::trace_from_csv(io::read_file(f), f));
      emit(output.path, io::dump(io::params_to_json(identify_averaged(traces, baseline))));
    } else if (design_cmd->parsed()) {
      emit(output.path, io::dump(io::shaper_to_json(shaper_opts.design(model_opts.resolve()))));
    } else if (shape_cmd->parsed() || segment_cmd->parsed() || sweep_cmd->parsed()) {
      auto shaper = shaper_opts.load();
      std::optional<OscillatorModel> model;
      if (model_opts.given()) model = model_opts.resolve();
      if (shaper && !model_opts.given() && sweep_cmd->parsed()) {
        throw UsageError("sweep needs the nominal model as well as the shaper");
      }
      if (!shaper) {
        if (!model) throw UsageError("give --shaper or a model to design one from");
        shaper = shaper_opts.design(*model);
      }

      if (segment_cmd->parsed()) {
        auto profile = segment_ramp(*shaper, Ramp{ramp_target, ramp_speed});
        if (rounding == "table") profile = round_for_table(profile);
        emit(output.path, io::profile_to_csv(profile));
      } else {
        const auto command = command_opts.resolve();
        if (!command) throw UsageError("a command is required: ramp, --step, --constant or --command");
        if (shape_cmd->parsed()) {
          const auto shaped = shape_command(*shaper, *command, dt);
          if (output.format == "svg") {
            svg::Chart chart{"Unshaped and shaped commands", "time (s)", "command (" + output.angle_unit() + ")", {}};
            svg::Series a{"unshaped", {}, "#000000", false};
            svg::Series b{"shaped", {}, "#d62728", true};
            for (std::size_t i = 0; i < shaped.samples.size(); ++i) {
              const double t = shaped.time_at(i);
              a.points.emplace_back(t, output.angle(command_value(*command, t)));
              b.points.emplace_back(t, output.angle(shaped.samples[i]));
            }
            chart.series = {a, b};
            emit(output.path, svg::render(chart));
          } else {
            emit(output.path, io::command_to_csv(shaped));
          }
        } else {
          const auto grid = ratios.empty() ? ratio_grid(ratio_min, ratio_max, ratio_step) : ratios;
          const auto curve = robustness_sweep(
              *shaper, *model,
              parameter == "damping_ratio" ? SweepParameter::DampingRatio : SweepParameter::NaturalFrequency, grid,
              *command, dt);
          for (const auto& p : curve.points) {
            if (!p.error.empty()) err << "warning: ratio " << p.ratio << ": " << detail::one_line(p.error) << "\n";
          }
          if (output.format == "svg") {
            svg::Chart chart{"Sensitivity curve", parameter + " ratio (actual/nominal)", "residual (% of move)", {}};
            svg::Series s{"residual", {}, "#1f77b4", false};
            for (const auto& p : curve.points) {
              if (p.residual_percent) s.points.emplace_back(p.ratio, *p.residual_percent);
            }
            chart.series = {s};
            emit(output.path, svg::render(chart));
          } else {
            emit(output.path, io::sensitivity_to_csv(curve));
          }
        }
      }
    } else if (reproduce_cmd->parsed()) {
      const auto report = reproduce::run();
      const auto text = reproduce::to_text(report);
      out << text;
      if (!report_path.empty()) io::write_file(report_path, text);
      if (!report.all_passed()) {
        err << "error: code=" << kAnchorFailure << " kind=anchor-failure module=cli message=\"one or more anchors failed\"\n";
        return kAnchorFailure;
      }
      return kSuccess;
    }

    for (const auto& w : writes) {
      if (w.path.empty() || w.path == "-") {
        out << w.content;
      } else {
        io::write_file(w.path, w.content);
      }
    }
    return kSuccess;
  } catch (const UsageError& e) {
    err << "error: code=" << kUsage << " kind=usage module=cli message=\"" << detail::one_line(e.what()) << "\"\n";
    return kUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << "error: code=" << code << " kind=" << to_string(e.kind()) << " module=" << e.module() << " message=\""
        << detail::one_line(e.what()) << "\"\n";
    return code;
  }
}

}  // namespace jointshape::cli
