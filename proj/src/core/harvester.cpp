#include "harvester.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "link_budget.hpp"

namespace harvestsim::harvester {

using chain::Variant;

void HarvesterModel::validate() const {
  if (!(antenna.z0.resistance > 0.0)) throw DomainError("frontend.antenna.impedance.resistance: must be > 0");
  if (!(matching.l_henries >= 0.0)) throw DomainError("frontend.matching.l: must be >= 0");
  if (!(matching.c_farads >= 0.0)) throw DomainError("frontend.matching.c: must be >= 0");
  rectifier.validate();
  chain.validate();
  if (!(efficiency_sweep.start_dbm < efficiency_sweep.stop_dbm)) {
    throw DomainError("rectifier.efficiency_sweep: start must be below stop");
  }
}

double gamma_at(const HarvesterModel& m, double freq_hz) {
  const auto z_load = rectifier::input_impedance_at(m.rectifier, freq_hz);
  const auto z_in = rf::network_input_impedance(m.matching, z_load, freq_hz);
  return rf::reflection_and_return_loss(z_in, m.antenna.z0).gamma_mag;
}

double delivered_power(const HarvesterModel& m, double p_available_w, double freq_hz) {
  return rf::delivered_power(p_available_w, gamma_at(m, freq_hz));
}

chain::PumpInput pump_input(const HarvesterModel& m, double p_available_w, double freq_hz) {
  const double p_del = delivered_power(m, p_available_w, freq_hz);
  const double r_in = m.chain.pump.input_resistance;
  const double v = rectifier::output_voltage(p_del, m.rectifier, r_in);
  return {v, v * v / r_in};
}

double activation_voltage(const HarvesterModel& m, Variant v, double p_available_w, double freq_hz) {
  if (v == Variant::WithPump) return pump_input(m, p_available_w, freq_hz).v_rect;
  return rectifier::open_circuit_voltage(delivered_power(m, p_available_w, freq_hz), m.rectifier);
}

bool activates(const HarvesterModel& m, Variant v, double p_available_w, double freq_hz) {
  if (v == Variant::WithPump) return activation_voltage(m, v, p_available_w, freq_hz) >= m.chain.pump.v_start;
  return activation_voltage(m, v, p_available_w, freq_hz) > m.chain.supervisor.v_release;
}

double activation_threshold(const HarvesterModel& m, Variant v, double freq_hz) {
  const double g = gamma_at(m, freq_hz);
  const double transfer = 1.0 - g * g;
  if (!(transfer > 0.0)) return std::numeric_limits<double>::infinity();
  if (v == Variant::NoPump) {
    // V_oc = 2N·lf·sqrt(2·P·R_eff) reaches v_release.
    const auto& r = m.rectifier;
    const double vp = m.chain.supervisor.v_release / (2.0 * r.stages * r.loss_factor);
    return vp * vp / (2.0 * r.effective_input_resistance) / transfer;
  }
  const double target = m.chain.pump.v_start;
  const double r_in = m.chain.pump.input_resistance;
  auto f = [&](double log_p) {
    return rectifier::output_voltage(std::exp(log_p) * transfer, m.rectifier, r_in) - target;
  };
  double lo = std::log(1e-15);
  double hi = std::log(1e3);
  if (f(hi) < 0.0) return std::numeric_limits<double>::infinity();
  std::uintmax_t iters = 200;
  const auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return std::exp(0.5 * (a + b));
}

double system_efficiency(const HarvesterModel& m, Variant v, double p_available_w, double freq_hz) {
  if (!(p_available_w > 0.0)) throw DomainError("system_efficiency: available power must be > 0");
  const double load = m.rectifier.load_ohms;
  const double p_del = delivered_power(m, p_available_w, freq_hz);
  double v_out = 0.0;
  if (v == Variant::NoPump) {
    v_out = rectifier::output_voltage(p_del, m.rectifier, load);
  } else {
    const auto in = pump_input(m, p_available_w, freq_hz);
    if (in.v_rect < m.chain.pump.v_start) return 0.0;
    v_out = std::sqrt(m.chain.pump.eta_pump * in.p_dc * load);
  }
  const double v_max = v == Variant::NoPump ? m.chain.supervisor.v_release : m.chain.pump.v_release;
  v_out = std::min(v_out, v_max);
  return v_out * v_out / (load * p_available_w);
}

EfficiencyPeak peak_system_efficiency(const HarvesterModel& m, Variant v, double freq_hz) {
  const auto& sweep = m.efficiency_sweep;
  auto eff = [&](double dbm) { return system_efficiency(m, v, link::dbm_to_watts(dbm), freq_hz); };
  constexpr double kGridDb = 0.25;
  const int n = static_cast<int>(std::ceil((sweep.stop_dbm - sweep.start_dbm) / kGridDb));
  double best_dbm = sweep.start_dbm;
  double best = eff(best_dbm);
  for (int i = 1; i <= n; ++i) {
    const double dbm = std::min(sweep.start_dbm + i * kGridDb, sweep.stop_dbm);
    const double e = eff(dbm);
    if (e > best) {
      best = e;
      best_dbm = dbm;
    }
  }
  // Golden-section refinement around the best grid point.
  double a = std::max(sweep.start_dbm, best_dbm - kGridDb);
  double b = std::min(sweep.stop_dbm, best_dbm + kGridDb);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = eff(x1);
  double f2 = eff(x2);
  for (int it = 0; it < 200 && b - a > 1e-11; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eff(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eff(x1);
    }
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > best) {
      best = f;
      best_dbm = x;
    }
  }
  return {link::dbm_to_watts(best_dbm), best};
}

}  // namespace harvestsim::harvester
