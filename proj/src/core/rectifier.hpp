#pragma once

#include "rf_frontend.hpp"

namespace harvestsim::rectifier {

/// Schottky diode large-signal parameters. Defaults are datasheet-typical
/// HSMS-285x numbers.
struct DiodeParams {
  double i_s = 3e-6;
  double ideality = 1.06;
  double r_s = 25.0;
  double v_t = 0.02585;

  void validate() const;
  friend bool operator==(const DiodeParams&, const DiodeParams&) = default;
};

/// Behavioural N-stage voltage multiplier.
///
/// The RF drive is a peak swing V_p = loss_factor·sqrt(2·P·R_eff). Each of
/// the 2N diodes drops V_D(I) = n·v_t·ln(1 + I/I_s) + I·r_s at the DC output
/// current I, and the ladder has a Thevenin source resistance 2N²·R_eff so
/// that DC output power never exceeds loss_factor²·P:
///
///   V_dc = 2N·(V_p − V_D(I)) − I·2N²·R_eff
///
/// `input_impedance` is the RF port impedance at `design_freq_hz` and only
/// feeds the matching network; `junction_capacitance_f` sets its dispersion.
struct RectifierModel {
  int stages = 4;
  DiodeParams diode;
  double load_ohms = 3000.0;
  rf::Impedance input_impedance{9.956459522311704, 21.516725906779623};
  double design_freq_hz = 866.5e6;
  double junction_capacitance_f = 1e-12;
  double effective_input_resistance = 50.0;
  double loss_factor = 1.0;

  void validate() const;
  friend bool operator==(const RectifierModel&, const RectifierModel&) = default;
};

/// RF input impedance at `freq_hz`, modelled as series R + L_eq + C_j with L_eq
/// chosen so the design-frequency value is reproduced. C_j = 0 disables
/// dispersion.
rf::Impedance input_impedance_at(const RectifierModel& model, double freq_hz);

double peak_swing(double p_delivered_w, const RectifierModel& model);
double source_resistance(const RectifierModel& model);
double open_circuit_voltage(double p_delivered_w, const RectifierModel& model);
double diode_drop(double current_a, const DiodeParams& diode);

/// Residual of the stage equation, 2N(V_p − V_D(V/R)) − (V/R)·R_out − V.
double stage_residual(double v_dc, double p_delivered_w, const RectifierModel& model, double load_ohms);

/// DC output voltage into a resistive load. Throws NumericError carrying the
/// last iterate if the solver does not converge in 200 iterations.
double output_voltage(double p_delivered_w, const RectifierModel& model, double load_ohms);

/// output_voltage() into the model's own load.
double rectified_voltage(double p_delivered_w, const RectifierModel& model);

/// DC current pushed into a node held at `v_node` (e.g. a capacitor). Zero
/// once v_node reaches the open-circuit voltage. `guess` warm-starts Newton.
double output_current(double p_delivered_w, double v_node, const RectifierModel& model, double guess = -1.0);

/// V_dc² / (load · P) into the model's own load.
double conversion_efficiency(double p_delivered_w, const RectifierModel& model);

}  // namespace harvestsim::rectifier
