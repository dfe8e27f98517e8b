// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <string>

#include "doctest.h"
#include "harvestsim/harvestsim.h"

namespace {

struct Scenario {
  hs_scenario* p = nullptr;
  ~Scenario() { hs_scenario_free(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  hs_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(hs_version()) > 0);
  CHECK(std::string(hs_status_name(HS_OK)) == "ok");
  CHECK(std::strlen(hs_status_name(HS_ERR_CALIBRATION)) > 0);
}

TEST_CASE("preset, clone, json round-trip") {
  Scenario a;
  REQUIRE(hs_scenario_preset("paper-2013", &a.p) == HS_OK);
  Scenario b;
  REQUIRE(hs_scenario_clone(a.p, &b.p) == HS_OK);
  CHECK(hs_scenario_equal(a.p, b.p) == 1);
  char* json = nullptr;
  REQUIRE(hs_scenario_to_json(a.p, &json) == HS_OK);
  Scenario c;
  REQUIRE(hs_scenario_parse(json, &c.p) == HS_OK);
  hs_string_free(json);
  CHECK(hs_scenario_equal(a.p, c.p) == 1);
  REQUIRE(hs_scenario_set_distance(c.p, 2.5) == HS_OK);
  CHECK(hs_scenario_equal(a.p, c.p) == 0);

  char* names = nullptr;
  REQUIRE(hs_preset_names(&names) == HS_OK);
  CHECK(take(names).find("paper-2013-free-space") != std::string::npos);
}

TEST_CASE("errors carry a status and a message") {
  Scenario s;
  CHECK(hs_scenario_preset("missing", &s.p) == HS_ERR_CONFIG);
  CHECK(s.p == nullptr);
  CHECK(std::strlen(hs_last_error()) > 0);
  CHECK(hs_scenario_load("/nonexistent.json", &s.p) == HS_ERR_CONFIG);
  CHECK(std::string(hs_last_error()).find("cannot open") != std::string::npos);
  CHECK(hs_scenario_parse(nullptr, &s.p) == HS_ERR_ARGUMENT);

  REQUIRE(hs_scenario_preset("paper-2013", &s.p) == HS_OK);
  CHECK(hs_scenario_set_distance(s.p, -1.0) != HS_OK);
  CHECK(hs_scenario_set_sweep(s.p, "angle", 0, 1, 0.1) == HS_ERR_CONFIG);

  hs_tune_result t{};
  CHECK(hs_tune(-5.0, 0.0, 866.5e6, 50.0, &t) != HS_OK);
}

TEST_CASE("simulation summary") {
  Scenario s;
  REQUIRE(hs_scenario_preset("paper-2013", &s.p) == HS_OK);
  REQUIRE(hs_scenario_set_distance(s.p, 1.0) == HS_OK);
  hs_sim_result* r = nullptr;
  REQUIRE(hs_simulate(s.p, &r) == HS_OK);
  hs_summary sum{};
  REQUIRE(hs_result_summary(r, &sum) == HS_OK);
  CHECK(sum.activated == 1);
  CHECK(sum.logs >= 1);
  CHECK(sum.rate_hz > 0.0);
  char* ev = nullptr;
  REQUIRE(hs_result_events_csv(r, &ev) == HS_OK);
  CHECK(take(ev).find("LogComplete") != std::string::npos);
  hs_sim_result_free(r);
}

TEST_CASE("sweep and compare") {
  Scenario s;
  REQUIRE(hs_scenario_preset("paper-2013", &s.p) == HS_OK);
  REQUIRE(hs_scenario_set_sweep(s.p, "distance", 0.5, 2.0, 0.5) == HS_OK);
  char* csv = nullptr;
  REQUIRE(hs_sweep_csv(s.p, 2, &csv) == HS_OK);
  const std::string one = take(csv);
  CHECK(std::count(one.begin(), one.end(), '\n') == 5);

  REQUIRE(hs_scenario_set_sweep(s.p, "distance", 0.2, 6.0, 0.1) == HS_OK);
  hs_comparison cmp{};
  REQUIRE(hs_compare_csv(s.p, 0, &csv, &cmp) == HS_OK);
  const std::string two = take(csv);
  CHECK(std::count(two.begin(), two.end(), '\n') == 1 + 2 * 59);
  CHECK(cmp.sensitivity_gap_db == doctest::Approx(5.0).epsilon(0.02));
  CHECK(cmp.range_ratio == doctest::Approx(3.0).epsilon(0.03));
  CHECK(cmp.has_crossover == 1);
}

TEST_CASE("tune") {
  hs_tune_result t{};
  REQUIRE(hs_tune(9.96, 21.5, 866.5e6, 50.0, &t) == HS_OK);
  CHECK(t.return_loss_db >= 20.0);
  CHECK(t.l_henries == doctest::Approx(3.3e-9).epsilon(0.1));
  CHECK(t.c_farads == doctest::Approx(8.2e-12).epsilon(0.1));
  REQUIRE(hs_tune(50.0, 0.0, 866.5e6, 50.0, &t) == HS_OK);
  CHECK(t.l_henries == 0.0);
}

TEST_CASE("calibration through the C API") {
  Scenario s;
  REQUIRE(hs_scenario_preset("paper-2013", &s.p) == HS_OK);
  Scenario before;
  REQUIRE(hs_scenario_clone(s.p, &before.p) == HS_OK);
  char* report = nullptr;
  REQUIRE(hs_calibrate(s.p, nullptr, "points", &report) == HS_OK);
  CHECK_FALSE(take(report).empty());
  CHECK(hs_scenario_equal(s.p, before.p) == 1);
  CHECK(hs_calibrate(s.p, nullptr, "percent", nullptr) == HS_ERR_CONFIG);

  char* anchors = nullptr;
  REQUIRE(hs_reference_anchors_json("relative", &anchors) == HS_OK);
  CHECK(take(anchors).find("\"anchors\"") != std::string::npos);

  char* text = nullptr;
  REQUIRE(hs_report(s.p, &text) == HS_OK);
  CHECK_FALSE(take(text).empty());
}
