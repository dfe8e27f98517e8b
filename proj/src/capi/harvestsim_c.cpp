#include "harvestsim/harvestsim.h"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "calibration.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "harvester.hpp"
#include "link_budget.hpp"
#include "sim_harness.hpp"

using namespace harvestsim;

struct hs_scenario {
  config::Config cfg;
};

struct hs_sim_result {
  harness::RunResult run;
};

namespace {

thread_local std::string g_last_error;

hs_status fail(hs_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
hs_status guard(F&& body) {
  try {
    body();
    return HS_OK;
  } catch (const calibration::CalibrationError& e) {
    return fail(HS_ERR_CALIBRATION, e.what());
  } catch (const rf::UntunableLoad& e) {
    return fail(HS_ERR_UNTUNABLE, e.what());
  } catch (const ConfigError& e) {
    return fail(HS_ERR_CONFIG, e.what());
  } catch (const DomainError& e) {
    return fail(HS_ERR_DOMAIN, e.what());
  } catch (const NumericError& e) {
    return fail(HS_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(HS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HS_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string printf_string(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string printf_string(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list ap2;
  va_copy(ap2, ap);
  const int n = std::vsnprintf(nullptr, 0, fmt, ap);
  va_end(ap);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, ap2);
  va_end(ap2);
  return out;
}

#define HS_REQUIRE(p)                                              \
  do {                                                             \
    if (!(p)) return fail(HS_ERR_ARGUMENT, #p " must not be null"); \
  } while (0)

std::string residual_report(const std::vector<calibration::Residual>& rs) {
  std::string out;
  for (const auto& r : rs) {
    out += printf_string("%-40s value %-12.6g target %-12.6g residual %-12.3g %s\n", r.label.c_str(), r.value,
                         r.target, r.residual(), r.ok ? "ok" : "MISS");
  }
  return out;
}

calibration::EfficiencyReading reading_of(const char* reading) {
  return reading ? calibration::efficiency_reading_from_string(reading) : calibration::EfficiencyReading::Points;
}

}  // namespace

extern "C" {

const char* hs_version(void) { return "1.0.0"; }

const char* hs_last_error(void) { return g_last_error.c_str(); }

const char* hs_status_name(hs_status s) {
  switch (s) {
    case HS_OK: return "ok";
    case HS_ERR_ARGUMENT: return "argument error";
    case HS_ERR_CONFIG: return "config error";
    case HS_ERR_DOMAIN: return "domain error";
    case HS_ERR_NUMERIC: return "numeric error";
    case HS_ERR_CALIBRATION: return "calibration error";
    case HS_ERR_UNTUNABLE: return "untunable load";
    case HS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void hs_string_free(char* s) { std::free(s); }

hs_status hs_scenario_load(const char* path, hs_scenario** out) {
  HS_REQUIRE(path);
  HS_REQUIRE(out);
  return guard([&] { *out = new hs_scenario{config::load_config(path)}; });
}

hs_status hs_scenario_parse(const char* json, hs_scenario** out) {
  HS_REQUIRE(json);
  HS_REQUIRE(out);
  return guard([&] { *out = new hs_scenario{config::parse_config(json)}; });
}

hs_status hs_scenario_preset(const char* name, hs_scenario** out) {
  HS_REQUIRE(name);
  HS_REQUIRE(out);
  return guard([&] { *out = new hs_scenario{config::preset(name)}; });
}

hs_status hs_preset_names(char** out) {
  HS_REQUIRE(out);
  return guard([&] {
    std::string s;
    for (const auto& n : config::preset_names()) s += n + "\n";
    *out = dup(s);
  });
}

void hs_scenario_free(hs_scenario* s) { delete s; }

hs_status hs_scenario_clone(const hs_scenario* s, hs_scenario** out) {
  HS_REQUIRE(s);
  HS_REQUIRE(out);
  return guard([&] { *out = new hs_scenario{s->cfg}; });
}

hs_status hs_scenario_to_json(const hs_scenario* s, char** out) {
  HS_REQUIRE(s);
  HS_REQUIRE(out);
  return guard([&] { *out = dup(config::dump_config(s->cfg)); });
}

hs_status hs_scenario_save(const hs_scenario* s, const char* path) {
  HS_REQUIRE(s);
  HS_REQUIRE(path);
  return guard([&] { config::save_config(s->cfg, path); });
}

int hs_scenario_equal(const hs_scenario* a, const hs_scenario* b) {
  if (!a || !b) return 0;
  return a->cfg == b->cfg ? 1 : 0;
}

hs_status hs_scenario_set_variant(hs_scenario* s, hs_variant v) {
  HS_REQUIRE(s);
  if (v != HS_WITH_PUMP && v != HS_NO_PUMP) return fail(HS_ERR_ARGUMENT, "unknown variant");
  s->cfg.scenario.variant = v == HS_WITH_PUMP ? chain::Variant::WithPump : chain::Variant::NoPump;
  return HS_OK;
}

hs_status hs_scenario_get_variant(const hs_scenario* s, hs_variant* out) {
  HS_REQUIRE(s);
  HS_REQUIRE(out);
  *out = s->cfg.scenario.variant == chain::Variant::WithPump ? HS_WITH_PUMP : HS_NO_PUMP;
  return HS_OK;
}

hs_status hs_scenario_set_distance(hs_scenario* s, double meters) {
  HS_REQUIRE(s);
  if (!(meters > 0.0)) return fail(HS_ERR_DOMAIN, "link.distance: must be > 0");
  s->cfg.scenario.distance_m = meters;
  return HS_OK;
}

hs_status hs_scenario_set_duration(hs_scenario* s, double seconds) {
  HS_REQUIRE(s);
  if (!(seconds > 0.0)) return fail(HS_ERR_CONFIG, "chain.integrator.duration: must be > 0");
  s->cfg.scenario.duration_s = seconds;
  return HS_OK;
}

hs_status hs_scenario_set_sweep(hs_scenario* s, const char* axis, double start, double stop, double step) {
  HS_REQUIRE(s);
  HS_REQUIRE(axis);
  return guard([&] {
    harness::SweepSpec spec{harness::axis_from_string(axis), start, stop, step};
    spec.validate();
    s->cfg.sweep = spec;
  });
}

hs_status hs_scenario_get_sweep(const hs_scenario* s, const char** axis, double* start, double* stop,
                                double* step) {
  HS_REQUIRE(s);
  HS_REQUIRE(axis && start && stop && step);
  return guard([&] {
    if (!s->cfg.sweep) throw ConfigError("sweep", "scenario has no sweep");
    const auto& sw = *s->cfg.sweep;
    *axis = harness::to_string(sw.axis).data();
    *start = sw.start;
    *stop = sw.stop;
    *step = sw.step;
  });
}

hs_status hs_simulate(const hs_scenario* s, hs_sim_result** out) {
  HS_REQUIRE(s);
  HS_REQUIRE(out);
  return guard([&] { *out = new hs_sim_result{harness::run_scenario(s->cfg.scenario)}; });
}

hs_status hs_result_summary(const hs_sim_result* r, hs_summary* out) {
  HS_REQUIRE(r);
  HS_REQUIRE(out);
  const auto& sum = r->run.summary;
  *out = hs_summary{sum.rate_hz,
                    sum.received_dbm,
                    sum.v_rect,
                    sum.cycle_input_j,
                    sum.cycle_load_j,
                    sum.simulated_s,
                    sum.releases,
                    sum.logs,
                    sum.brownouts,
                    r->run.final.events.size(),
                    sum.activated ? 1 : 0,
                    sum.sustained ? 1 : 0};
  return HS_OK;
}

hs_status hs_result_events_csv(const hs_sim_result* r, char** out) {
  HS_REQUIRE(r);
  HS_REQUIRE(out);
  return guard([&] { *out = dup(harness::events_csv(r->run.final)); });
}

void hs_sim_result_free(hs_sim_result* r) { delete r; }

hs_status hs_sweep_csv(const hs_scenario* s, int jobs, char** csv_out) {
  HS_REQUIRE(s);
  HS_REQUIRE(csv_out);
  if (!s->cfg.sweep) return fail(HS_ERR_CONFIG, "sweep: no sweep configured");
  return guard([&] { *csv_out = dup(harness::to_csv(harness::sweep(s->cfg.scenario, *s->cfg.sweep, jobs))); });
}

hs_status hs_compare_csv(const hs_scenario* s, int jobs, char** csv_out, hs_comparison* report) {
  HS_REQUIRE(s);
  HS_REQUIRE(csv_out);
  if (!s->cfg.sweep) return fail(HS_ERR_CONFIG, "sweep: no sweep configured");
  return guard([&] {
    const auto c = harness::compare_variants(s->cfg.scenario, *s->cfg.sweep, jobs);
    if (report) {
      *report = hs_comparison{};
      report->threshold_pump_dbm = c.pump.threshold_dbm;
      report->threshold_ref_dbm = c.reference.threshold_dbm;
      report->sensitivity_gap_db = c.sensitivity_gap_db;
      report->range_pump_m = c.pump.max_range_m;
      report->range_ref_m = c.reference.max_range_m;
      report->range_ratio = c.range_ratio;
      report->has_crossover = c.crossover.has_value();
      report->crossover = c.crossover.value_or(0.0);
      report->has_last_active_pump = c.pump.last_active.has_value();
      report->last_active_pump = c.pump.last_active.value_or(0.0);
      report->has_last_active_ref = c.reference.last_active.has_value();
      report->last_active_ref = c.reference.last_active.value_or(0.0);
      report->has_best_axis = c.pump.best_axis.has_value() && c.reference.best_axis.has_value();
      report->best_axis_pump = c.pump.best_axis.value_or(0.0);
      report->best_axis_ref = c.reference.best_axis.value_or(0.0);
    }
    *csv_out = dup(harness::to_csv(c.table));
  });
}

hs_status hs_tune(double r_load, double x_load, double freq_hz, double z0, hs_tune_result* out) {
  HS_REQUIRE(out);
  auto fill = [out](const rf::TuneResult& t) {
    const double rl = t.gamma_mag < 1e-5 ? 100.0 : -20.0 * std::log10(t.gamma_mag);
    *out = hs_tune_result{t.network.l_henries, t.network.c_farads, t.gamma_mag, rl,
                          rf::to_string(t.network.topology).data()};
  };
  return guard([&] {
    try {
      fill(rf::tune({r_load, x_load}, freq_hz, {z0, 0.0}));
    } catch (const rf::UntunableLoad& e) {
      fill(e.best());
      throw;
    }
  });
}

hs_status hs_calibrate(hs_scenario* s, const char* anchors_path, const char* reading, char** report_out) {
  HS_REQUIRE(s);
  if (report_out) *report_out = nullptr;
  return guard([&] {
    config::AnchorSet set;
    if (anchors_path) {
      set = config::load_anchors(anchors_path);
    } else {
      set.anchors = calibration::reference_anchors(reading_of(reading));
    }
    const double f = set.freq_hz.value_or(s->cfg.scenario.link.freq_hz);
    try {
      const auto res = calibration::calibrate(set.anchors, s->cfg.scenario.harvester, set.free, f);
      s->cfg.scenario.harvester = res.model;
      if (report_out) {
        *report_out = dup(residual_report(res.residuals) +
                          (res.changed ? "model updated\n" : "anchors already met, model unchanged\n"));
      }
    } catch (const calibration::CalibrationError& e) {
      if (report_out) *report_out = dup(residual_report(e.best().residuals));
      throw;
    }
  });
}

hs_status hs_reference_anchors_json(const char* reading, char** out) {
  HS_REQUIRE(out);
  return guard([&] {
    config::AnchorSet set;
    set.anchors = calibration::reference_anchors(reading_of(reading));
    *out = dup(config::dump_anchors(set));
  });
}

hs_status hs_report(const hs_scenario* s, char** out) {
  HS_REQUIRE(s);
  HS_REQUIRE(out);
  return guard([&] {
    using chain::Variant;
    const auto& sc = s->cfg.scenario;
    sc.validate();
    const auto& h = sc.harvester;
    const auto link = sc.effective_link();
    const double f = link.freq_hz;
    const double p_av = sc.available_power_w();
    std::string r;
    r += printf_string("scenario            %s (%s)\n", sc.name.c_str(), chain::to_string(sc.variant).data());
    r += printf_string("link                EIRP %.2f dBm, %.4g MHz, plf %.3g, n %.4g, excess loss %.3f dB\n",
                       link::watts_to_dbm(link.eirp_w), f / 1e6, link.plf, link.path_loss_exponent,
                       link.excess_loss_db);
    r += printf_string("available power     %.3f dBm at %.3g m\n", p_av > 0 ? link::watts_to_dbm(p_av) : -HUGE_VAL,
                       sc.distance_m);
    const auto z_load = rectifier::input_impedance_at(h.rectifier, f);
    const auto refl = rf::reflection_and_return_loss(rf::network_input_impedance(h.matching, z_load, f), h.antenna.z0);
    r += printf_string("match               L %.3g nH, C %.3g pF, |G| %.3g, return loss %.1f dB\n",
                       h.matching.l_henries * 1e9, h.matching.c_farads * 1e12, refl.gamma_mag, refl.return_loss_db);
    double thr[2];
    double range[2];
    for (int i = 0; i < 2; ++i) {
      const Variant v = i == 0 ? Variant::WithPump : Variant::NoPump;
      thr[i] = harvester::activation_threshold(h, v, f);
      range[i] = link::max_range(link, link::PowerLevel::watts(thr[i]));
      const auto pk = harvester::peak_system_efficiency(h, v, f);
      r += printf_string("%-19s threshold %.3f dBm, range %.3f m, peak efficiency %.2f %% at %.2f dBm\n",
                         chain::to_string(v).data(), link::watts_to_dbm(thr[i]), range[i], 100.0 * pk.efficiency,
                         link::watts_to_dbm(pk.p_available_w));
    }
    r += printf_string("comparison          sensitivity gap %.3f dB, range ratio %.3f\n",
                       link::watts_to_dbm(thr[1]) - link::watts_to_dbm(thr[0]), range[0] / range[1]);
    const auto& ch = h.chain;
    const auto size = chain::sizing_check(ch.storage, ch.mcu, ch.pump.v_release, ch.mcu.v_reg);
    r += printf_string("storage             hysteresis energy %.3f uJ, headroom %.3f uC vs event %.3f uC (%s), "
                       "event drop %.3f V\n",
                       1e6 * chain::stored_energy_delta(ch.storage.capacitance, ch.pump.v_release, ch.pump.v_reconnect),
                       1e6 * size.available_charge, 1e6 * size.required_charge, size.feasible ? "ok" : "too small",
                       size.event_voltage_drop);
    if (p_av > 0.0) {
      const auto pump = chain::cycle_period(harvester::pump_input(h, p_av, f), ch);
      const chain::ReferenceSource src(h.rectifier, harvester::delivered_power(h, p_av, f));
      const auto ref = chain::reference_cycle_period(src, ch);
      r += printf_string("closed-form rate    with_pump %.4g Hz, no_pump %.4g Hz\n", pump.rate_hz, ref.rate_hz);
    }
    *out = dup(r);
  });
}

}  // extern "C"
