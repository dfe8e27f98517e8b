#include "power_chain.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace harvestsim::chain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bound on threshold transitions handled inside a single step.
constexpr int kMaxTransitionsPerStep = 64;

void check_step(double dt) {
  if (!(dt > 0.0 && dt <= kMaxStep)) {
    throw ConfigError("chain.integrator.dt", "step must be in (0, 1 ms], got " + std::to_string(dt));
  }
}

void emit(ChainState& s, EventKind kind) { s.events.push_back({s.t, kind, s.cap.v}); }

// MCU bookkeeping shared by both variants while the load is connected.
// Advances the log timer by h and reports a completed log.
void advance_log(ChainState& s, double h, bool log_boundary, const McuLoad& mcu) {
  s.log_elapsed += h;
  if (log_boundary || s.log_elapsed >= mcu.t_exec) {
    emit(s, EventKind::LogComplete);
    s.log_elapsed = 0.0;
    s.first_log_done = true;
  }
}

void disconnect(ChainState& s) {
  if (!s.first_log_done) emit(s, EventKind::Brownout);
  emit(s, EventKind::Disconnect);
  s.mode = Mode::Idle;
  s.startup_elapsed = 0.0;
  s.log_elapsed = 0.0;
}

void release(ChainState& s) {
  emit(s, EventKind::Release);
  s.mode = Mode::Discharging;
  s.log_elapsed = 0.0;
  s.first_log_done = false;
}

// One connected-load substep. `charge_current` is the current (A) pushed into
// the capacitor at the substep start; returns the time consumed.
double discharge_substep(ChainState& s, double remaining, double charge_current, double v_release,
                         double v_off, const McuLoad& mcu) {
  const double c = s.cap.capacitance;
  const double rate = (charge_current - mcu.i_active) / c;
  const double v0 = s.cap.v;
  const double t_log = mcu.t_exec - s.log_elapsed;
  double t_off = kInf;
  double t_clamp = kInf;
  if (rate < 0.0) t_off = (v0 - v_off) / -rate;
  if (rate > 0.0 && v0 < v_release) t_clamp = (v_release - v0) / rate;
  const double h = std::max(0.0, std::min({remaining, t_log, t_off, t_clamp}));

  double v1 = v0 + rate * h;
  if (h == t_off) v1 = v_off;
  if (rate > 0.0 && v1 >= v_release) {
    if (v0 >= v_release) {
      // Pinned at the release voltage: surplus is shed.
      s.energy.shed += (charge_current - mcu.i_active) * v_release * h;
    }
    v1 = std::min(v1, v_release);
  }
  s.energy.load += mcu.i_active * 0.5 * (v0 + v1) * h;
  s.cap.v = std::max(v1, 0.0);
  s.t += h;
  advance_log(s, h, h == t_log, mcu);
  if (h == t_off || s.cap.v <= v_off) disconnect(s);
  return h;
}

}  // namespace

std::string_view to_string(Variant v) { return v == Variant::WithPump ? "with_pump" : "no_pump"; }

Variant variant_from_string(std::string_view s) {
  if (s == "with_pump") return Variant::WithPump;
  if (s == "no_pump") return Variant::NoPump;
  throw DomainError("unknown variant '" + std::string(s) + "' (expected with_pump or no_pump)");
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Idle:
      return "Idle";
    case Mode::Charging:
      return "Charging";
    case Mode::Discharging:
      return "Discharging";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::PumpStart:
      return "PumpStart";
    case EventKind::Release:
      return "Release";
    case EventKind::Disconnect:
      return "Disconnect";
    case EventKind::LogComplete:
      return "LogComplete";
    case EventKind::Brownout:
      return "Brownout";
  }
  return "?";
}

void ChargePumpModel::validate() const {
  if (!(v_start > 0.0 && v_start < v_reconnect && v_reconnect < v_release)) {
    throw DomainError("chain.pump: need 0 < start_voltage < reconnect_voltage < release_voltage");
  }
  if (!(eta_pump > 0.0 && eta_pump <= 1.0)) throw DomainError("chain.pump.efficiency: must be in (0, 1]");
  if (!(t_startup >= 0.0)) throw DomainError("chain.pump.startup_time: must be >= 0");
  if (!(input_resistance > 0.0) || !std::isfinite(input_resistance)) {
    throw DomainError("chain.pump.input_resistance: must be > 0");
  }
}

void StorageCap::validate() const {
  if (!(capacitance > 0.0)) throw DomainError("chain.storage.capacitance: must be > 0");
  if (!(v >= 0.0)) throw DomainError("chain.storage.initial_voltage: must be >= 0");
}

void McuLoad::validate() const {
  if (!(i_active > 0.0)) throw DomainError("chain.mcu.active_current: must be > 0");
  if (!(t_exec > 0.0)) throw DomainError("chain.mcu.exec_time: must be > 0");
  if (!(v_reg > 0.0)) throw DomainError("chain.mcu.regulated_voltage: must be > 0");
}

void ReferenceSupervisor::validate() const {
  if (!(v_floor > 0.0 && v_floor < v_release)) {
    throw DomainError("chain.reference_supervisor: need 0 < floor_voltage < release_voltage");
  }
}

void ChainModels::validate() const {
  pump.validate();
  supervisor.validate();
  mcu.validate();
  storage.validate();
}

ChainState ChainState::initial(const ChainModels& m) {
  ChainState s;
  s.cap = m.storage;
  return s;
}

double stored_energy_delta(double capacitance, double v_hi, double v_lo) {
  if (!(v_lo >= 0.0) || !(v_hi >= v_lo)) throw DomainError("stored_energy_delta: need v_hi >= v_lo >= 0");
  return 0.5 * capacitance * (v_hi * v_hi - v_lo * v_lo);
}

EventBudget mcu_event_budget(const McuLoad& mcu) {
  const double q = mcu.i_active * mcu.t_exec;
  return {q, q * mcu.v_reg};
}

SizingReport sizing_check(const StorageCap& cap, const McuLoad& mcu, double v_hi, double v_lo) {
  if (!(v_hi > v_lo)) throw DomainError("sizing_check: need v_hi > v_lo");
  SizingReport r;
  r.available_charge = cap.capacitance * (v_hi - v_lo);
  r.required_charge = mcu_event_budget(mcu).charge_c;
  r.margin = r.available_charge - r.required_charge;
  r.feasible = r.margin >= 0.0;
  r.event_voltage_drop = r.required_charge / cap.capacitance;
  return r;
}

ChainState step(ChainState s, PumpInput in, double dt, const ChainModels& m) {
  check_step(dt);
  if (!(in.p_dc >= 0.0)) throw DomainError("step: input power must be >= 0");
  const auto& pump = m.pump;
  const double c = s.cap.capacitance;
  const bool input_ok = in.v_rect >= pump.v_start;
  const double out_power = pump.eta_pump * in.p_dc;
  s.energy.input += in.p_dc * dt;

  double remaining = dt;
  for (int guard = 0; remaining > 0.0 && guard < kMaxTransitionsPerStep; ++guard) {
    switch (s.mode) {
      case Mode::Idle: {
        if (!input_ok) {
          s.startup_elapsed = 0.0;
          s.t += remaining;
          remaining = 0.0;
          break;
        }
        const double need = pump.t_startup - s.startup_elapsed;
        if (need <= 0.0) {
          emit(s, EventKind::PumpStart);
          s.mode = Mode::Charging;
          break;
        }
        const double h = std::min(need, remaining);
        s.startup_elapsed = h == need ? pump.t_startup : s.startup_elapsed + h;
        s.t += h;
        remaining -= h;
        break;
      }
      case Mode::Charging: {
        if (!input_ok) {
          s.mode = Mode::Idle;
          s.startup_elapsed = 0.0;
          break;
        }
        if (out_power <= 0.0) {
          s.t += remaining;
          remaining = 0.0;
          break;
        }
        const double v0 = s.cap.v;
        double h = 0.0;
        if (v0 < kSeedVoltage) {
          // Linear region below the seed voltage.
          const double rate = out_power / (c * kSeedVoltage);
          const double t_seed = (kSeedVoltage - v0) / rate;
          h = std::min(remaining, t_seed);
          s.cap.v = h == t_seed ? kSeedVoltage : v0 + rate * h;
          s.energy.harvested += out_power * h;
        } else {
          // Energy form of the same law: ½C·V² grows at η·p.
          const double t_release = 0.5 * c * (pump.v_release * pump.v_release - v0 * v0) / out_power;
          h = std::min(remaining, std::max(t_release, 0.0));
          s.cap.v = h == t_release ? pump.v_release : std::sqrt(v0 * v0 + 2.0 * out_power * h / c);
          s.energy.harvested += out_power * h;
        }
        s.t += h;
        remaining -= h;
        if (s.cap.v >= pump.v_release) release(s);
        break;
      }
      case Mode::Discharging: {
        const bool feed = input_ok && pump.feeds_during_discharge;
        const double i_charge = feed ? out_power / std::max(s.cap.v, kSeedVoltage) : 0.0;
        const double h = discharge_substep(s, remaining, i_charge, pump.v_release, pump.v_reconnect, m.mcu);
        if (feed) s.energy.harvested += out_power * h;
        remaining -= h;
        break;
      }
    }
  }
  return s;
}

ReferenceSource::ReferenceSource(const rectifier::RectifierModel& model, double p_delivered_w)
    : model_(&model),
      p_delivered_(p_delivered_w),
      v_open_(rectifier::open_circuit_voltage(p_delivered_w, model)) {}

double ReferenceSource::current(double v) const {
  if (v >= v_open_) return 0.0;
  last_current_ = rectifier::output_current(p_delivered_, v, *model_, last_current_);
  return last_current_;
}

ChainState reference_variant_step(ChainState s, const ReferenceSource& src, double dt, const ChainModels& m) {
  check_step(dt);
  const auto& sup = m.supervisor;
  const double c = s.cap.capacitance;

  double remaining = dt;
  for (int guard = 0; remaining > 0.0 && guard < kMaxTransitionsPerStep; ++guard) {
    const double i_in = src.current(s.cap.v);
    if (s.mode != Mode::Discharging) {
      s.mode = i_in > 0.0 ? Mode::Charging : Mode::Idle;
      if (s.mode == Mode::Idle) {
        s.t += remaining;
        remaining = 0.0;
        break;
      }
      const double v0 = s.cap.v;
      const double rate = i_in / c;
      const double t_release = (sup.v_release - v0) / rate;
      const double h = std::min(remaining, std::max(t_release, 0.0));
      s.cap.v = h == t_release ? sup.v_release : v0 + rate * h;
      const double e = i_in * 0.5 * (v0 + s.cap.v) * h;
      s.energy.input += e;
      s.energy.harvested += e;
      s.t += h;
      remaining -= h;
      if (s.cap.v >= sup.v_release) release(s);
    } else {
      const double v0 = s.cap.v;
      const double h = discharge_substep(s, remaining, i_in, sup.v_release, sup.v_floor, m.mcu);
      const double e = i_in * 0.5 * (v0 + s.cap.v) * h;
      s.energy.input += e;
      s.energy.harvested += e;
      remaining -= h;
    }
  }
  return s;
}

CyclePeriod cycle_period(PumpInput in, const ChainModels& m) {
  const auto& pump = m.pump;
  const auto& mcu = m.mcu;
  const double c = m.storage.capacitance;
  if (in.v_rect < pump.v_start || !(in.p_dc > 0.0)) return {};
  const double a = pump.eta_pump * in.p_dc;
  const double t_charge = stored_energy_delta(c, pump.v_release, pump.v_reconnect) / a;
  double t_discharge = 0.0;
  if (pump.feeds_during_discharge) {
    if (a / pump.v_reconnect >= mcu.i_active) return {mcu.t_exec, 1.0 / mcu.t_exec, 1.0, true};
    // ∫ C·V dV / (i·V − a) from v_reconnect to v_release.
    const double i = mcu.i_active;
    t_discharge = c / i *
                  ((pump.v_release - pump.v_reconnect) +
                   a / i * std::log((i * pump.v_release - a) / (i * pump.v_reconnect - a)));
  } else {
    t_discharge = c * (pump.v_release - pump.v_reconnect) / mcu.i_active;
  }
  CyclePeriod r;
  r.period_s = pump.t_startup + t_charge + t_discharge;
  r.logs_per_cycle = std::floor(t_discharge / mcu.t_exec);
  r.rate_hz = r.logs_per_cycle / r.period_s;
  return r;
}

CyclePeriod reference_cycle_period(const ReferenceSource& src, const ChainModels& m) {
  const auto& sup = m.supervisor;
  const auto& mcu = m.mcu;
  const double c = m.storage.capacitance;
  if (src.open_circuit_voltage() <= sup.v_release) return {};
  if (src.current(sup.v_floor) >= mcu.i_active) return {mcu.t_exec, 1.0 / mcu.t_exec, 1.0, true};

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double t_charge = c * Quad::integrate([&](double v) { return 1.0 / src.current(v); }, sup.v_floor,
                                              sup.v_release, 15, 1e-10);
  const double t_discharge = c * Quad::integrate([&](double v) { return 1.0 / (mcu.i_active - src.current(v)); },
                                                 sup.v_floor, sup.v_release, 15, 1e-10);
  CyclePeriod r;
  r.period_s = t_charge + t_discharge;
  r.logs_per_cycle = std::floor(t_discharge / mcu.t_exec);
  r.rate_hz = r.logs_per_cycle / r.period_s;
  return r;
}

}  // namespace harvestsim::chain
