// Command-line front end. Talks to the simulator through the C API only.
//
// Exit codes: 0 success, 2 config/argument/domain error, 3 numeric failure
// (including infeasible calibration and untunable loads).

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "harvestsim/harvestsim.h"

namespace {

int exit_code(hs_status s) {
  switch (s) {
    case HS_OK: return 0;
    case HS_ERR_ARGUMENT:
    case HS_ERR_CONFIG:
    case HS_ERR_DOMAIN: return 2;
    case HS_ERR_NUMERIC:
    case HS_ERR_CALIBRATION:
    case HS_ERR_UNTUNABLE: return 3;
    case HS_ERR_INTERNAL: return 1;
  }
  return 1;
}

struct Failure {
  int code;
};

void check(hs_status s) {
  if (s == HS_OK) return;
  std::cerr << "error: " << hs_last_error() << "\n";
  throw Failure{exit_code(s)};
}

[[noreturn]] void usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  throw Failure{2};
}

struct StrFree {
  void operator()(char* p) const { hs_string_free(p); }
};
using OwnedStr = std::unique_ptr<char, StrFree>;

struct ScenarioFree {
  void operator()(hs_scenario* p) const { hs_scenario_free(p); }
};
using Scenario = std::unique_ptr<hs_scenario, ScenarioFree>;

struct ResultFree {
  void operator()(hs_sim_result* p) const { hs_sim_result_free(p); }
};

void write_output(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) usage_error("cannot write '" + path + "'");
}

struct Source {
  std::string config;
  std::string preset;

  void add_to(CLI::App* cmd) {
    cmd->add_option("config", config, "Scenario config (JSON)");
    cmd->add_option("--preset", preset, "Use a built-in preset instead of a config file");
  }

  Scenario load() const {
    if (config.empty() == preset.empty()) usage_error("give exactly one of a config path or --preset");
    hs_scenario* s = nullptr;
    check(config.empty() ? hs_scenario_preset(preset.c_str(), &s) : hs_scenario_load(config.c_str(), &s));
    return Scenario(s);
  }
};

std::optional<hs_variant> parse_variant(const std::string& v) {
  if (v.empty()) return std::nullopt;
  if (v == "with_pump") return HS_WITH_PUMP;
  if (v == "no_pump") return HS_NO_PUMP;
  usage_error("--variant must be with_pump or no_pump");
}

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) usage_error(what + ": '" + s + "' is not a number");
  return v;
}

struct Range {
  double start, stop, step;
};

Range default_range(const std::string& axis) {
  if (axis == "distance") return {0.2, 6.0, 0.1};
  if (axis == "frequency") return {830e6, 900e6, 1e6};
  if (axis == "tx_power") return {0.1, 4.0, 0.1};
  usage_error("--axis must be distance, frequency or tx_power");
}

Range parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos || text.find(':', b + 1) != std::string::npos) {
    usage_error("--range expects start:stop:step");
  }
  return {parse_number(text.substr(0, a), "--range"), parse_number(text.substr(a + 1, b - a - 1), "--range"),
          parse_number(text.substr(b + 1), "--range")};
}

int jobs_from(int flag) {
  if (const char* env = std::getenv("HARVESTSIM_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) usage_error("HARVESTSIM_JOBS must be a non-negative integer");
    return static_cast<int>(v);
  }
  return flag;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RF energy-harvester simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hs_version());

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one scenario, write its event log");
  Source sim_src;
  sim_src.add_to(sim);
  std::string sim_out, sim_variant;
  double sim_distance = 0.0;
  sim->add_option("--out", sim_out, "Event-log CSV path (default: stdout after the summary)");
  sim->add_option("--distance", sim_distance, "Override the distance (m)");
  sim->add_option("--variant", sim_variant, "with_pump or no_pump");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Sweep one axis, write a CSV table");
  Source sw_src;
  sw_src.add_to(sw);
  std::string sw_axis, sw_range, sw_out, sw_variant;
  bool sw_compare = false;
  int sw_jobs = 0;
  sw->add_option("--axis", sw_axis, "distance, frequency or tx_power");
  sw->add_option("--range", sw_range, "start:stop:step in axis units (m, Hz, W)");
  sw->add_flag("--compare", sw_compare, "Run both variants and report ranges, ratio and crossover");
  sw->add_option("--out", sw_out, "CSV path (default: stdout)");
  sw->add_option("--jobs", sw_jobs, "Worker threads, 0 = all cores (HARVESTSIM_JOBS overrides)");
  sw->add_option("--variant", sw_variant, "with_pump or no_pump");

  // tune
  auto* tune = app.add_subcommand("tune", "Find the L-C match for a load");
  std::string zload;
  double tune_freq = 866.5e6, tune_z0 = 50.0;
  tune->add_option("--zload", zload, "Load impedance R,X in ohms")->required();
  tune->add_option("--freq", tune_freq, "Frequency (Hz)");
  tune->add_option("--z0", tune_z0, "Source resistance (ohm)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit the model to anchors, write the calibrated config");
  Source cal_src;
  cal_src.add_to(cal);
  std::string cal_anchors, cal_reading = "points", cal_out;
  cal->add_option("--anchors", cal_anchors, "Anchors file (default: built-in prototype anchors)");
  cal->add_option("--reading", cal_reading, "Built-in no-pump peak: points or relative");
  cal->add_option("--out", cal_out, "Calibrated config path")->required();

  // report
  auto* rep = app.add_subcommand("report", "Print thresholds, ranges, efficiencies and sizing");
  Source rep_src;
  rep_src.add_to(rep);

  // preset
  auto* pre = app.add_subcommand("preset", "Print or save a built-in preset");
  std::string pre_name, pre_out;
  bool pre_list = false;
  pre->add_option("name", pre_name, "Preset name");
  pre->add_flag("--list", pre_list, "List preset names");
  pre->add_option("--out", pre_out, "Config path (default: stdout)");

  // anchors
  auto* anc = app.add_subcommand("anchors", "Print the built-in calibration anchors as an anchors file");
  std::string anc_reading = "points", anc_out;
  anc->add_option("--reading", anc_reading, "points or relative");
  anc->add_option("--out", anc_out, "Anchors path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      Scenario s = sim_src.load();
      if (sim_distance != 0.0) check(hs_scenario_set_distance(s.get(), sim_distance));
      if (auto v = parse_variant(sim_variant)) check(hs_scenario_set_variant(s.get(), *v));
      hs_sim_result* raw = nullptr;
      check(hs_simulate(s.get(), &raw));
      std::unique_ptr<hs_sim_result, ResultFree> res(raw);
      hs_summary sum{};
      check(hs_result_summary(res.get(), &sum));
      char* csv = nullptr;
      check(hs_result_events_csv(res.get(), &csv));
      OwnedStr csv_owned(csv);
      std::string summary = "# rate_hz " + fmt(sum.rate_hz) + "\n# received_dbm " + fmt(sum.received_dbm) +
                            "\n# v_rect_v " + fmt(sum.v_rect) + "\n# activated " + std::to_string(sum.activated) +
                            "\n# releases " + std::to_string(sum.releases) + "\n# logs " +
                            std::to_string(sum.logs) + "\n# brownouts " + std::to_string(sum.brownouts) +
                            "\n# cycle_input_j " + fmt(sum.cycle_input_j) + "\n# cycle_load_j " +
                            fmt(sum.cycle_load_j) + "\n# simulated_s " + fmt(sum.simulated_s) + "\n";
      std::fputs(summary.c_str(), stdout);
      write_output(sim_out, csv);
      return 0;
    }

    if (sw->parsed()) {
      Scenario s = sw_src.load();
      if (auto v = parse_variant(sw_variant)) check(hs_scenario_set_variant(s.get(), *v));
      if (!sw_range.empty()) {
        if (sw_axis.empty()) usage_error("--range needs --axis");
        const Range r = parse_range(sw_range);
        check(hs_scenario_set_sweep(s.get(), sw_axis.c_str(), r.start, r.stop, r.step));
      } else if (!sw_axis.empty()) {
        // Keep the scenario's own range when it sweeps the same axis.
        const char* axis = nullptr;
        double a = 0, b = 0, c = 0;
        if (hs_scenario_get_sweep(s.get(), &axis, &a, &b, &c) != HS_OK || sw_axis != axis) {
          const Range r = default_range(sw_axis);
          check(hs_scenario_set_sweep(s.get(), sw_axis.c_str(), r.start, r.stop, r.step));
        }
      }
      const int jobs = jobs_from(sw_jobs);
      char* csv = nullptr;
      if (!sw_compare) {
        check(hs_sweep_csv(s.get(), jobs, &csv));
        OwnedStr owned(csv);
        write_output(sw_out, csv);
        return 0;
      }
      hs_comparison c{};
      check(hs_compare_csv(s.get(), jobs, &csv, &c));
      OwnedStr owned(csv);
      write_output(sw_out, csv);
      // Keep stdout pure CSV when it carries the table.
      std::FILE* rep_stream = sw_out.empty() ? stderr : stdout;
      std::string r = "# threshold_dbm with_pump " + fmt(c.threshold_pump_dbm) + " no_pump " +
                      fmt(c.threshold_ref_dbm) + " gap_db " + fmt(c.sensitivity_gap_db) + "\n" +
                      "# max_range_m with_pump " + fmt(c.range_pump_m) + " no_pump " + fmt(c.range_ref_m) +
                      " ratio " + fmt(c.range_ratio) + "\n";
      r += "# crossover " + (c.has_crossover ? fmt(c.crossover) : std::string("none")) + "\n";
      r += "# last_active with_pump " + (c.has_last_active_pump ? fmt(c.last_active_pump) : std::string("none")) +
           " no_pump " + (c.has_last_active_ref ? fmt(c.last_active_ref) : std::string("none")) + "\n";
      if (c.has_best_axis) {
        r += "# min_activation_eirp_at with_pump " + fmt(c.best_axis_pump) + " no_pump " + fmt(c.best_axis_ref) +
             "\n";
      }
      std::fputs(r.c_str(), rep_stream);
      return 0;
    }

    if (tune->parsed()) {
      const auto comma = zload.find(',');
      if (comma == std::string::npos) usage_error("--zload expects R,X");
      const double r = parse_number(zload.substr(0, comma), "--zload");
      const double x = parse_number(zload.substr(comma + 1), "--zload");
      hs_tune_result t{};
      const hs_status st = hs_tune(r, x, tune_freq, tune_z0, &t);
      if (st == HS_OK || st == HS_ERR_UNTUNABLE) {
        std::printf("L %s nH\nC %s pF\ntopology %s\ngamma %s\nreturn_loss_db %s\n", fmt(t.l_henries * 1e9).c_str(),
                    fmt(t.c_farads * 1e12).c_str(), t.topology, fmt(t.gamma_mag).c_str(),
                    fmt(t.return_loss_db).c_str());
      }
      check(st);
      return 0;
    }

    if (cal->parsed()) {
      Scenario s = cal_src.load();
      char* report = nullptr;
      const hs_status st =
          hs_calibrate(s.get(), cal_anchors.empty() ? nullptr : cal_anchors.c_str(), cal_reading.c_str(), &report);
      OwnedStr owned(report);
      if (report) std::fputs(report, stdout);
      check(st);
      check(hs_scenario_save(s.get(), cal_out.c_str()));
      return 0;
    }

    if (rep->parsed()) {
      Scenario s = rep_src.load();
      char* text = nullptr;
      check(hs_report(s.get(), &text));
      OwnedStr owned(text);
      std::fputs(text, stdout);
      return 0;
    }

    if (pre->parsed()) {
      if (pre_list) {
        char* names = nullptr;
        check(hs_preset_names(&names));
        OwnedStr owned(names);
        std::fputs(names, stdout);
        return 0;
      }
      if (pre_name.empty()) usage_error("give a preset name or --list");
      hs_scenario* raw = nullptr;
      check(hs_scenario_preset(pre_name.c_str(), &raw));
      Scenario s(raw);
      char* json = nullptr;
      check(hs_scenario_to_json(s.get(), &json));
      OwnedStr owned(json);
      write_output(pre_out, json);
      return 0;
    }

    if (anc->parsed()) {
      char* json = nullptr;
      check(hs_reference_anchors_json(anc_reading.c_str(), &json));
      OwnedStr owned(json);
      write_output(anc_out, json);
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
