#pragma once

#include "power_chain.hpp"
#include "rectifier.hpp"
#include "rf_frontend.hpp"

namespace harvestsim::harvester {

/// Power sweep over which peak system efficiency is searched.
struct EfficiencySweep {
  double start_dbm = -30.0;
  double stop_dbm = 10.0;

  friend bool operator==(const EfficiencySweep&, const EfficiencySweep&) = default;
};

/// Everything between the antenna port and the MCU.
struct HarvesterModel {
  rf::AntennaModel antenna;
  rf::MatchingNetwork matching;
  rectifier::RectifierModel rectifier;
  chain::ChainModels chain;
  EfficiencySweep efficiency_sweep;

  void validate() const;
  friend bool operator==(const HarvesterModel&, const HarvesterModel&) = default;
};

double gamma_at(const HarvesterModel& m, double freq_hz);
double delivered_power(const HarvesterModel& m, double p_available_w, double freq_hz);

/// Rectifier loaded by the running pump.
chain::PumpInput pump_input(const HarvesterModel& m, double p_available_w, double freq_hz);

/// Voltage the variant's activation rule looks at: the pump input for
/// WithPump, the rectifier open-circuit voltage for NoPump.
double activation_voltage(const HarvesterModel& m, chain::Variant v, double p_available_w, double freq_hz);

bool activates(const HarvesterModel& m, chain::Variant v, double p_available_w, double freq_hz);

/// Minimum available power (W) at the antenna port that activates the
/// variant: pump oscillator start for WithPump, open-circuit voltage above
/// the 2.4 V supervisor for NoPump.
double activation_threshold(const HarvesterModel& m, chain::Variant v, double freq_hz);

/// End-to-end efficiency into the rectifier load with the output node held at
/// or below the supervisor release voltage. WithPump routes the rectifier
/// output through the pump (input resistance, η_pump) first.
double system_efficiency(const HarvesterModel& m, chain::Variant v, double p_available_w, double freq_hz);

struct EfficiencyPeak {
  double p_available_w = 0.0;
  double efficiency = 0.0;
};

EfficiencyPeak peak_system_efficiency(const HarvesterModel& m, chain::Variant v, double freq_hz);

}  // namespace harvestsim::harvester
