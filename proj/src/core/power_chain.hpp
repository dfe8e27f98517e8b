#pragma once

#include <string_view>
#include <vector>

#include "rectifier.hpp"

namespace harvestsim::chain {

enum class Variant { WithPump, NoPump };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

/// DC-DC charge pump with its output supervisor.
struct ChargePumpModel {
  double v_start = 0.35;      ///< oscillator start threshold on the rectified input
  double v_release = 2.4;     ///< supervisor connects the load
  double v_reconnect = 1.85;  ///< supervisor disconnects, new charge cycle
  double eta_pump = 0.5;
  double t_startup = 0.05;    ///< build-up delay before charge reaches the output
  double input_resistance = 20e3;  ///< DC load the running pump presents to the rectifier
  bool feeds_during_discharge = true;

  void validate() const;
  friend bool operator==(const ChargePumpModel&, const ChargePumpModel&) = default;
};

struct StorageCap {
  double capacitance = 10e-6;
  double v = 0.0;

  void validate() const;
  friend bool operator==(const StorageCap&, const StorageCap&) = default;
};

struct McuLoad {
  double i_active = 0.5e-3;
  double t_exec = 9e-3;
  double v_reg = 1.8;

  void validate() const;
  friend bool operator==(const McuLoad&, const McuLoad&) = default;
};

/// Supervisor of the pump-less reference path.
struct ReferenceSupervisor {
  double v_release = 2.4;
  double v_floor = 1.8;

  void validate() const;
  friend bool operator==(const ReferenceSupervisor&, const ReferenceSupervisor&) = default;
};

struct ChainModels {
  ChargePumpModel pump;
  ReferenceSupervisor supervisor;
  McuLoad mcu;
  StorageCap storage;  ///< capacitance and initial voltage

  void validate() const;
  friend bool operator==(const ChainModels&, const ChainModels&) = default;
};

enum class Mode { Idle, Charging, Discharging };
enum class EventKind { PumpStart, Release, Disconnect, LogComplete, Brownout };

std::string_view to_string(Mode m);
std::string_view to_string(EventKind k);

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::PumpStart;
  double v = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Running energy totals, joules.
struct EnergyLedger {
  double input = 0.0;      ///< DC energy offered to the storage path (pump input, or rectifier into cap)
  double harvested = 0.0;  ///< energy the pump / rectifier pushed toward the capacitor
  double load = 0.0;       ///< energy drawn by the MCU
  double shed = 0.0;       ///< surplus dropped while the capacitor sat at the release voltage

  friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

/// Full hybrid state. Only step() / reference_variant_step() change `mode`.
struct ChainState {
  Mode mode = Mode::Idle;
  StorageCap cap;
  double t = 0.0;
  std::vector<Event> events;
  EnergyLedger energy;
  double startup_elapsed = 0.0;
  double log_elapsed = 0.0;
  bool first_log_done = false;

  static ChainState initial(const ChainModels& m);
  bool connected() const noexcept { return mode == Mode::Discharging; }

  friend bool operator==(const ChainState&, const ChainState&) = default;
};

/// Lower bound on V in the pump charging law dV/dt = η·p / (C·max(V, V_seed)).
inline constexpr double kSeedVoltage = 0.05;
inline constexpr double kMaxStep = 1e-3;

double stored_energy_delta(double capacitance, double v_hi, double v_lo);

struct EventBudget {
  double charge_c = 0.0;
  double energy_j = 0.0;
};

EventBudget mcu_event_budget(const McuLoad& mcu);

struct SizingReport {
  bool feasible = false;
  double available_charge = 0.0;  ///< C·(v_hi − v_lo)
  double required_charge = 0.0;   ///< i_active·t_exec
  double margin = 0.0;            ///< available − required
  double event_voltage_drop = 0.0;  ///< i_active·t_exec / C
};

SizingReport sizing_check(const StorageCap& cap, const McuLoad& mcu, double v_hi, double v_lo);

/// Rectifier output seen by the charge pump.
struct PumpInput {
  double v_rect = 0.0;
  double p_dc = 0.0;
};

/// Advances the with-pump chain by `dt` (0 < dt ≤ 1 ms). Threshold crossings
/// inside the step are located exactly and timestamped.
ChainState step(ChainState state, PumpInput input, double dt, const ChainModels& models);

/// Rectifier driving the storage capacitor directly.
class ReferenceSource {
 public:
  ReferenceSource(const rectifier::RectifierModel& model, double p_delivered_w);

  double open_circuit_voltage() const noexcept { return v_open_; }
  /// Charging current into the capacitor at voltage v.
  double current(double v) const;

 private:
  const rectifier::RectifierModel* model_;
  double p_delivered_;
  double v_open_;
  mutable double last_current_ = -1.0;
};

/// Advances the pump-less reference chain: the capacitor charges through the
/// rectifier only while its open-circuit voltage exceeds V, and the 2.4 V
/// supervisor releases the load down to its 1.8 V floor.
ChainState reference_variant_step(ChainState state, const ReferenceSource& source, double dt,
                                  const ChainModels& models);

struct CyclePeriod {
  double period_s = 0.0;
  double rate_hz = 0.0;
  double logs_per_cycle = 0.0;
  /// The load never disconnects; the MCU logs back to back.
  bool sustained = false;
};

/// Steady-state cycle of the with-pump chain: t_startup + charge from
/// v_reconnect to v_release + discharge back to v_reconnect.
CyclePeriod cycle_period(PumpInput input, const ChainModels& models);

/// Same for the reference chain, integrating the rectifier current numerically.
CyclePeriod reference_cycle_period(const ReferenceSource& source, const ChainModels& models);

}  // namespace harvestsim::chain
