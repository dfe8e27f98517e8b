#include "rectifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace harvestsim::rectifier {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTwoPi = 6.28318530717958647692;

// Root of a strictly decreasing f on [lo, hi] with f(lo) > 0 >= f(hi).
// Newton steps, falling back to bisection when a step leaves the bracket.
template <class F, class DF>
double solve_decreasing(F f, DF df, double lo, double hi, double x, const char* what) {
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = df(x);
    double next = (d < 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 1e-13 * std::max(1.0, std::abs(next)) + 1e-300;
    if (std::abs(next - x) <= tol || hi - lo <= tol) return next;
    x = next;
  }
  throw NumericError(std::string(what) + ": no convergence after 200 iterations", x);
}

}  // namespace

void DiodeParams::validate() const {
  if (!(i_s > 0.0)) throw DomainError("rectifier.diode.saturation_current: must be > 0");
  if (!(ideality >= 1.0 && ideality <= 2.0)) throw DomainError("rectifier.diode.ideality: must be in [1, 2]");
  if (!(r_s > 0.0)) throw DomainError("rectifier.diode.series_resistance: must be > 0");
  if (!(v_t > 0.0)) throw DomainError("rectifier.diode.thermal_voltage: must be > 0");
}

void RectifierModel::validate() const {
  if (stages < 1) throw DomainError("rectifier.stages: must be >= 1");
  diode.validate();
  if (!(load_ohms > 0.0) || !std::isfinite(load_ohms)) throw DomainError("rectifier.load: must be > 0");
  if (!(input_impedance.resistance > 0.0)) throw DomainError("rectifier.input_impedance.resistance: must be > 0");
  if (!(design_freq_hz > 0.0)) throw DomainError("rectifier.design_frequency: must be > 0");
  if (!(junction_capacitance_f >= 0.0)) throw DomainError("rectifier.junction_capacitance: must be >= 0");
  if (!(effective_input_resistance > 0.0) || !std::isfinite(effective_input_resistance)) {
    throw DomainError("rectifier.effective_input_resistance: must be > 0");
  }
  if (!(loss_factor > 0.0 && loss_factor <= 1.0)) throw DomainError("rectifier.loss_factor: must be in (0, 1]");
}

rf::Impedance input_impedance_at(const RectifierModel& model, double freq_hz) {
  if (!(freq_hz > 0.0)) throw DomainError("input_impedance_at: frequency must be > 0");
  if (model.junction_capacitance_f <= 0.0) return model.input_impedance;
  const double w0 = kTwoPi * model.design_freq_hz;
  const double w = kTwoPi * freq_hz;
  const double x_cap0 = 1.0 / (w0 * model.junction_capacitance_f);
  const double l_eq = (model.input_impedance.reactance + x_cap0) / w0;
  return {model.input_impedance.resistance, w * l_eq - 1.0 / (w * model.junction_capacitance_f)};
}

double peak_swing(double p_delivered_w, const RectifierModel& model) {
  if (!(p_delivered_w >= 0.0)) throw DomainError("rectifier: delivered power must be >= 0");
  return model.loss_factor * std::sqrt(2.0 * p_delivered_w * model.effective_input_resistance);
}

double source_resistance(const RectifierModel& model) {
  return 2.0 * model.stages * model.stages * model.effective_input_resistance;
}

double open_circuit_voltage(double p_delivered_w, const RectifierModel& model) {
  return 2.0 * model.stages * peak_swing(p_delivered_w, model);
}

double diode_drop(double current_a, const DiodeParams& diode) {
  return diode.ideality * diode.v_t * std::log1p(current_a / diode.i_s) + current_a * diode.r_s;
}

double stage_residual(double v_dc, double p_delivered_w, const RectifierModel& model, double load_ohms) {
  const double i = v_dc / load_ohms;
  const double two_n = 2.0 * model.stages;
  return two_n * (peak_swing(p_delivered_w, model) - diode_drop(i, model.diode)) - i * source_resistance(model) - v_dc;
}

double output_voltage(double p_delivered_w, const RectifierModel& model, double load_ohms) {
  if (!(load_ohms > 0.0)) throw DomainError("rectifier: load must be > 0");
  const double voc = open_circuit_voltage(p_delivered_w, model);
  if (voc <= 0.0) return 0.0;
  const double two_n = 2.0 * model.stages;
  const double r_out = source_resistance(model);
  const auto& d = model.diode;
  auto f = [&](double v) { return stage_residual(v, p_delivered_w, model, load_ohms); };
  auto df = [&](double v) {
    const double i = v / load_ohms;
    const double dvd_di = d.ideality * d.v_t / (d.i_s + i) + d.r_s;
    return -(two_n * dvd_di + r_out) / load_ohms - 1.0;
  };
  // Small-signal guess: the diodes behave like their zero-bias resistance.
  const double r_video = two_n * (d.ideality * d.v_t / d.i_s + d.r_s);
  const double guess = voc * load_ohms / (load_ohms + r_out + r_video);
  return solve_decreasing(f, df, 0.0, voc, guess, "rectified_voltage");
}

double rectified_voltage(double p_delivered_w, const RectifierModel& model) {
  return output_voltage(p_delivered_w, model, model.load_ohms);
}

double output_current(double p_delivered_w, double v_node, const RectifierModel& model, double guess) {
  const double voc = open_circuit_voltage(p_delivered_w, model);
  const double v = std::max(v_node, 0.0);
  if (voc <= v) return 0.0;
  const double two_n = 2.0 * model.stages;
  const double r_out = source_resistance(model);
  const auto& d = model.diode;
  auto h = [&](double i) { return two_n * (peak_swing(p_delivered_w, model) - diode_drop(i, d)) - i * r_out - v; };
  auto dh = [&](double i) { return -two_n * (d.ideality * d.v_t / (d.i_s + i) + d.r_s) - r_out; };
  const double hi = (voc - v) / r_out;
  return solve_decreasing(h, dh, 0.0, hi, guess, "rectifier output_current");
}

double conversion_efficiency(double p_delivered_w, const RectifierModel& model) {
  if (!(p_delivered_w > 0.0)) throw DomainError("conversion_efficiency: delivered power must be > 0");
  const double v = rectified_voltage(p_delivered_w, model);
  return v * v / (model.load_ohms * p_delivered_w);
}

}  // namespace harvestsim::rectifier
