#include <algorithm>
#include <cmath>

#include "config.hpp"
#include "doctest.h"
#include "sim_harness.hpp"

using namespace harvestsim;
using namespace harvestsim::harness;
using chain::Variant;

namespace {

Scenario prototype() { return config::preset("paper-2013").scenario; }

Scenario at(Scenario s, double d, Variant v) {
  s.distance_m = d;
  s.variant = v;
  return s;
}

}  // namespace

TEST_CASE("no transmitter, no events") {
  auto s = prototype();
  s.link.eirp_w = 0.0;
  for (auto v : {Variant::WithPump, Variant::NoPump}) {
    s.variant = v;
    const auto r = run_scenario(s);
    CHECK(r.summary.rate_hz == 0.0);
    CHECK(r.final.events.empty());
    CHECK_FALSE(r.summary.activated);
  }
}

TEST_CASE("activation edge of the pump variant") {
  const auto near = run_scenario(at(prototype(), 4.7, Variant::WithPump));
  CHECK(near.summary.activated);
  CHECK(near.summary.rate_hz > 0.0);
  const auto far = run_scenario(at(prototype(), 6.0, Variant::WithPump));
  CHECK_FALSE(far.summary.activated);
  CHECK(far.summary.rate_hz == 0.0);
  const auto ref_far = run_scenario(at(prototype(), 2.0, Variant::NoPump));
  CHECK(ref_far.summary.rate_hz == 0.0);
}

TEST_CASE("close in, the pump-less chain logs faster") {
  const auto pump = run_scenario(at(prototype(), 0.5, Variant::WithPump));
  const auto ref = run_scenario(at(prototype(), 0.5, Variant::NoPump));
  CHECK(ref.summary.rate_hz >= pump.summary.rate_hz);
  CHECK(pump.summary.rate_hz > 0.0);
}

TEST_CASE("rate matches the closed-form cycle") {
  const auto s = at(prototype(), 3.0, Variant::WithPump);
  const auto r = run_scenario(s);
  const auto in = harvester::pump_input(s.harvester, s.available_power_w(), s.link.freq_hz);
  const auto cf = chain::cycle_period(in, s.harvester.chain);
  CHECK(r.summary.rate_hz == doctest::Approx(cf.rate_hz).epsilon(0.01));
}

TEST_CASE("sweep agrees with single runs and is independent of job count") {
  const auto s = prototype();
  const SweepSpec spec{Axis::Distance, 0.5, 5.5, 0.5};
  const auto serial = sweep(s, spec, 1);
  const auto parallel = sweep(s, spec, 4);
  CHECK(serial == parallel);
  CHECK(to_csv(serial) == to_csv(parallel));
  REQUIRE(serial.rows.size() == 11);
  const auto one = sweep(s, SweepSpec{Axis::Distance, 2.0, 2.0, 0.1}, 1);
  REQUIRE(one.rows.size() == 1);
  auto expected = evaluate_point(at(s, 2.0, s.variant));
  expected.axis = 2.0;
  CHECK(one.rows[0] == expected);
  CHECK(one.rows[0].rate_hz == doctest::Approx(run_scenario(at(s, 2.0, s.variant)).summary.rate_hz));
}

TEST_CASE("sweep specification errors") {
  CHECK_THROWS_AS((SweepSpec{Axis::Distance, 1.0, 0.5, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((SweepSpec{Axis::Distance, 0.5, 1.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS(axis_from_string("angle"), ConfigError);
  CHECK(axis_from_string("tx_power") == Axis::TxPower);
  const auto pts = SweepSpec{Axis::Distance, 0.2, 6.0, 0.1}.points();
  CHECK(pts.size() == 59);
  CHECK(pts.back() == doctest::Approx(6.0));
}

TEST_CASE("per-point failures stay in their row") {
  auto s = prototype();
  const auto t = sweep(s, SweepSpec{Axis::Distance, 0.0, 0.2, 0.1}, 2);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].status != "ok");
  CHECK(t.rows[1].status == "ok");
}

TEST_CASE("crossover detection") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK_FALSE(find_crossover(x, {1, 1, 1, 1}, {1, 1, 1, 1}).has_value());
  const auto c = find_crossover(x, {4, 3, 2, 1}, {2, 2, 2, 2});
  REQUIRE(c.has_value());
  CHECK(*c == doctest::Approx(3.0));
  CHECK_FALSE(find_crossover(x, {1, 1, 1, 1}, {2, 2, 2, 2}).has_value());
}

TEST_CASE("variant comparison on the distance axis") {
  const auto s = prototype();
  const auto cmp = compare_variants(s, SweepSpec{Axis::Distance, 0.2, 6.0, 0.1}, 0);
  REQUIRE(cmp.table.rows.size() == 2 * 59);
  CHECK(cmp.sensitivity_gap_db == doctest::Approx(cmp.reference.threshold_dbm - cmp.pump.threshold_dbm));
  CHECK(cmp.sensitivity_gap_db == doctest::Approx(5.0).epsilon(0.1 / 5.0));
  CHECK(cmp.range_ratio == doctest::Approx(cmp.pump.max_range_m / cmp.reference.max_range_m));
  CHECK(cmp.range_ratio == doctest::Approx(3.0).epsilon(0.1 / 3.0));
  REQUIRE(cmp.crossover.has_value());
  CHECK(*cmp.crossover < 1.5);
  REQUIRE(cmp.reference.last_active.has_value());
  CHECK(*cmp.crossover < *cmp.reference.last_active);

  // Beyond the crossover the pump rate keeps falling with distance.
  double prev = HUGE_VAL;
  for (const auto& r : cmp.table.rows) {
    if (r.variant != Variant::WithPump || r.axis < *cmp.crossover) continue;
    CHECK(r.rate_hz <= prev + 1e-12);
    prev = r.rate_hz;
  }
  CHECK_THROWS_AS(compare_variants(s, SweepSpec{Axis::TxPower, 1.0, 2.0, 0.5}, 1), ConfigError);
}

TEST_CASE("activation is cheapest near the tuned frequency") {
  auto s = prototype();
  s.distance_m = 2.0;
  const double f = activation_minimum_frequency(s, 830e6, 900e6, 1e6);
  CHECK(std::abs(f - 866.5e6) <= 5e6);
}

TEST_CASE("csv layout") {
  const auto t = sweep(prototype(), SweepSpec{Axis::Distance, 1.0, 1.0, 1.0}, 1);
  const auto csv = to_csv(t);
  CHECK(csv.rfind("axis,received_dbm,v_rect_v,eta,rate_hz,events,sensitivity_dbm,activation_eirp_dbm,variant,status\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(format_number(0.1) == "0.1");
  const auto r = run_scenario(at(prototype(), 1.0, Variant::WithPump));
  const auto ev = events_csv(r.final);
  CHECK(ev.rfind("t_s,event,v_cap_v\n", 0) == 0);
  CHECK(ev.find("LogComplete") != std::string::npos);
}
