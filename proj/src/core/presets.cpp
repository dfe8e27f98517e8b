#include <cmath>

#include "config.hpp"
#include "errors.hpp"

namespace harvestsim::config {

namespace {

// Fitted against the prototype's activation thresholds and peak
// efficiencies (points reading), see calibration::reference_anchors.
constexpr double kLossFactor = 0.63516373635667611;
constexpr double kEffectiveInputResistance = 886.01510151571676;
constexpr double kPumpInputResistance = 17920.805659261445;
constexpr double kEfficiencyLoad = 12134.176879378912;
// Office link: exponent from the 3x range ratio over a 5 dB sensitivity gap,
// excess loss placing the pump's range at 4.8 m with 3.2 W EIRP.
constexpr double kOfficeExponent = 1.048;
constexpr double kOfficeExcessLossDb = 9.5486370959810074;

Config base(bool free_space) {
  Config c;
  auto& s = c.scenario;
  s.name = free_space ? "paper-2013-free-space" : "paper-2013";
  s.link.eirp_w = 3.2;
  s.link.freq_hz = 866.5e6;
  s.link.plf = 0.5;
  s.link.path_loss_exponent = free_space ? 2.0 : kOfficeExponent;
  s.g_tx_dbi = 5.5;
  s.distance_m = 1.0;
  s.variant = chain::Variant::WithPump;

  auto& h = s.harvester;
  h.antenna.gain_dbi = 1.85;
  h.matching = {3.3e-9, 8.2e-12, rf::Topology::SeriesLShuntCLoad};
  h.rectifier.stages = 4;
  h.rectifier.load_ohms = 3000.0;

  auto& ch = h.chain;
  ch.pump.v_start = 0.35;
  ch.pump.v_release = 2.4;
  ch.pump.v_reconnect = 1.85;
  ch.pump.eta_pump = 0.5;
  ch.pump.t_startup = 0.05;
  ch.supervisor.v_release = 2.4;
  ch.supervisor.v_floor = 1.8;
  ch.mcu.i_active = 0.5e-3;
  ch.mcu.t_exec = 9e-3;
  ch.mcu.v_reg = 1.8;
  ch.storage.capacitance = 10e-6;

  c.sweep = harness::SweepSpec{harness::Axis::Distance, 0.2, 6.0, 0.1};
  return c;
}

bool free_space_name(std::string_view name) {
  if (name == "paper-2013") return false;
  if (name == "paper-2013-free-space") return true;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

}  // namespace

std::vector<std::string> preset_names() { return {"paper-2013", "paper-2013-free-space"}; }

Config preset_before_calibration(std::string_view name) { return base(free_space_name(name)); }

Config preset(std::string_view name) {
  const bool free_space = free_space_name(name);
  Config c = base(free_space);
  auto& h = c.scenario.harvester;
  h.rectifier.loss_factor = kLossFactor;
  h.rectifier.effective_input_resistance = kEffectiveInputResistance;
  h.rectifier.load_ohms = kEfficiencyLoad;
  h.chain.pump.input_resistance = kPumpInputResistance;
  if (!free_space) c.scenario.link.excess_loss_db = kOfficeExcessLossDb;
  return c;
}

}  // namespace harvestsim::config
