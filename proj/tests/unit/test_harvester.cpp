#include <cmath>

#include "config.hpp"
#include "doctest.h"
#include "harvester.hpp"
#include "link_budget.hpp"
#include "oracles.hpp"

using namespace harvestsim;
using namespace harvestsim::harvester;
using chain::Variant;

namespace {

constexpr double kF0 = 866.5e6;

HarvesterModel calibrated() { return config::preset("paper-2013").scenario.harvester; }

double oracle_pump_voltage(const HarvesterModel& m, double p_av) {
  const auto& r = m.rectifier;
  const double p = p_av * (1.0 - std::pow(gamma_at(m, kF0), 2));
  return oracle::multiplier_voltage(p, r.stages, r.loss_factor, r.effective_input_resistance, r.diode.i_s,
                                    r.diode.ideality, r.diode.r_s, r.diode.v_t, m.chain.pump.input_resistance);
}

}  // namespace

TEST_CASE("activation thresholds of the calibrated model") {
  const auto m = calibrated();
  const double pump = activation_threshold(m, Variant::WithPump, kF0);
  const double ref = activation_threshold(m, Variant::NoPump, kF0);
  CHECK(link::watts_to_dbm(pump) == doctest::Approx(-14.0).epsilon(0.01 / 14.0));
  CHECK(link::watts_to_dbm(ref) == doctest::Approx(-9.0).epsilon(0.01 / 9.0));
  // At the threshold the pump input sits exactly at its start voltage.
  CHECK(oracle_pump_voltage(m, pump) == doctest::Approx(m.chain.pump.v_start).epsilon(1e-9));
  CHECK(activation_voltage(m, Variant::NoPump, ref, kF0) == doctest::Approx(2.4).epsilon(1e-12));

  const double step = link::from_db(0.01);
  for (auto v : {Variant::WithPump, Variant::NoPump}) {
    const double t = activation_threshold(m, v, kF0);
    CHECK(activates(m, v, t * step, kF0));
    CHECK_FALSE(activates(m, v, t / step, kF0));
  }
}

TEST_CASE("calibrated peak system efficiencies") {
  const auto m = calibrated();
  const auto pump = peak_system_efficiency(m, Variant::WithPump, kF0);
  const auto ref = peak_system_efficiency(m, Variant::NoPump, kF0);
  CHECK(pump.efficiency == doctest::Approx(0.16).epsilon(0.001 / 0.16));
  CHECK(ref.efficiency == doctest::Approx(0.27).epsilon(0.001 / 0.27));

  // Dense scan finds nothing higher.
  for (auto v : {Variant::WithPump, Variant::NoPump}) {
    const double peak = peak_system_efficiency(m, v, kF0).efficiency;
    double best = 0.0;
    for (double dbm = -30.0; dbm <= 10.0; dbm += 0.01) {
      best = std::max(best, system_efficiency(m, v, link::dbm_to_watts(dbm), kF0));
    }
    CHECK(peak >= best - 1e-12);
    CHECK(peak <= best + 1e-4);
  }
}

TEST_CASE("system efficiency") {
  const auto m = calibrated();
  CHECK_THROWS_AS(system_efficiency(m, Variant::WithPump, 0.0, kF0), DomainError);
  const double below = activation_threshold(m, Variant::WithPump, kF0) * 0.9;
  CHECK(system_efficiency(m, Variant::WithPump, below, kF0) == 0.0);
  for (double dbm = -30.0; dbm <= 20.0; dbm += 0.5) {
    for (auto v : {Variant::WithPump, Variant::NoPump}) {
      const double e = system_efficiency(m, v, link::dbm_to_watts(dbm), kF0);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
}

TEST_CASE("matching is tuned at the design frequency") {
  const auto m = calibrated();
  CHECK(gamma_at(m, kF0) < 1e-6);
  CHECK(gamma_at(m, 830e6) > 0.05);
  CHECK(gamma_at(m, 900e6) > 0.05);
  // Activation power is lowest near the design frequency.
  double best_f = 0.0;
  double best = HUGE_VAL;
  for (double f = 830e6; f <= 900e6; f += 0.5e6) {
    const double t = activation_threshold(m, Variant::WithPump, f);
    if (t < best) {
      best = t;
      best_f = f;
    }
  }
  CHECK(std::abs(best_f - kF0) <= 5e6);
}
