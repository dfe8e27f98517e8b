// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "harvester.hpp"
#include "link_budget.hpp"
#include "oracles.hpp"
#include "power_chain.hpp"
#include "process.hpp"
#include "rf_frontend.hpp"
#include "sim_harness.hpp"

using namespace harvestsim;
using chain::EventKind;
using chain::Variant;

namespace {

constexpr double kF0 = 866.5e6;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass &= ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

Verdict link_equation() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  link::LinkParams l;
  l.eirp_w = 3.2;
  l.g_rx_dbi = 1.85;
  l.freq_hz = kF0;
  l.plf = 0.5;
  const double r = link::max_range(l, link::PowerLevel::dbm(-14.0));
  v.require(near(r, 6.83, 0.05), "max_range " + num(r) + " m");

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    link::LinkParams p;
    p.eirp_w = std::pow(10.0, -2.0 + 3.0 * u(rng));
    p.g_rx_dbi = -3.0 + 9.0 * u(rng);
    p.freq_hz = 1e8 + 5.9e9 * u(rng);
    p.plf = 0.05 + 0.95 * u(rng);
    p.path_loss_exponent = 0.5 + 4.0 * u(rng);
    p.excess_loss_db = 20.0 * u(rng);
    const double d = 0.1 + 100.0 * u(rng);
    const double back = link::max_range(p, link::received_power(p, d));
    worst = std::max(worst, std::abs(back / d - 1.0));
  }
  v.require(worst <= 1e-9, "round-trip worst " + num(worst, 2));
  const double t = seconds_since(t0);
  v.require(t < 1.0, "runtime " + num(t, 2) + " s");
  return v;
}

Verdict sizing() {
  Verdict v;
  chain::StorageCap cap;
  chain::McuLoad mcu;
  const double e = chain::stored_energy_delta(cap.capacitance, 2.4, 1.85);
  v.require(near(e, 11.69e-6, 0.01e-6) && near(e, oracle::hysteresis_energy(10e-6, 2.4, 1.85), 1e-15),
            "hysteresis energy " + num(e * 1e6) + " uJ");
  const auto s = chain::sizing_check(cap, mcu, 2.4, 1.8);
  v.require(s.feasible && near(s.available_charge, 6e-6, 6e-9) && near(s.required_charge, 4.5e-6, 4.5e-9),
            "charge " + num(s.available_charge * 1e6) + " uC >= " + num(s.required_charge * 1e6) + " uC");
  v.require(near(s.event_voltage_drop, 0.45, 0.45e-3), "event drop " + num(s.event_voltage_drop) + " V");

  chain::ChainModels m;
  auto st = chain::ChainState::initial(m);
  st.cap.v = 2.4;
  st.mode = chain::Mode::Discharging;
  for (int i = 0; i < 90; ++i) st = chain::step(std::move(st), {0.0, 0.0}, 1e-4, m);
  bool brownout = false;
  bool logged = false;
  for (const auto& ev : st.events) {
    brownout |= ev.kind == EventKind::Brownout;
    logged |= ev.kind == EventKind::LogComplete;
  }
  v.require(logged && !brownout && near(st.cap.v, 1.95, 1.95e-3), "9 ms log ends at " + num(st.cap.v) + " V");
  return v;
}

Verdict fsm_properties() {
  Verdict v;
  const chain::ChainModels m;
  std::mt19937_64 rng(2013);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double kDt = 5e-4;
  int bad_alternation = 0;
  int bad_connection = 0;
  int bad_energy = 0;
  int bad_determinism = 0;
  int cycles = 0;
  for (int trace = 0; trace < 10000; ++trace) {
    std::vector<std::pair<int, chain::PumpInput>> segments;
    const int n_seg = 1 + static_cast<int>(4 * u(rng));
    for (int i = 0; i < n_seg; ++i) {
      const double p = std::pow(10.0, -5.0 + 2.5 * u(rng));
      const double vr = u(rng) < 0.85 ? 0.35 + u(rng) : 0.35 * u(rng);
      segments.push_back({1 + static_cast<int>(600 * u(rng)), {vr, p}});
    }
    chain::ChainModels mm = m;
    mm.storage.v = u(rng) < 0.5 ? 0.0 : 1.85 + 0.5 * u(rng);

    auto run = [&](bool check) {
      auto s = chain::ChainState::initial(mm);
      std::optional<EventKind> last;
      std::optional<std::pair<chain::EnergyLedger, double>> at_release;
      std::size_t seen = 0;
      for (const auto& [n, in] : segments) {
        for (int i = 0; i < n; ++i) {
          s = chain::step(std::move(s), in, kDt, mm);
          if (!check) continue;
          bool released = false;
          for (; seen < s.events.size(); ++seen) {
            const auto k = s.events[seen].kind;
            if (k != EventKind::Release && k != EventKind::Disconnect) continue;
            if (last && *last == k) ++bad_alternation;
            last = k;
            released |= k == EventKind::Release;
          }
          if (s.connected() != (last == EventKind::Release)) ++bad_connection;
          if (!released) continue;
          if (at_release) {
            const auto& [e0, v0] = *at_release;
            const double h = s.energy.harvested - e0.harvested;
            const double out = s.energy.load - e0.load + s.energy.shed - e0.shed;
            const double de = 0.5 * s.cap.capacitance * (s.cap.v * s.cap.v - v0 * v0);
            if (std::abs(h - out - de) > 0.01 * h) ++bad_energy;
            ++cycles;
          }
          at_release = std::pair{s.energy, s.cap.v};
        }
      }
      return s;
    };
    if (!(run(true) == run(false))) ++bad_determinism;
  }
  v.require(bad_alternation == 0, "alternation violations " + std::to_string(bad_alternation));
  v.require(bad_connection == 0, "connection violations " + std::to_string(bad_connection));
  v.require(bad_energy == 0, "energy violations " + std::to_string(bad_energy) + "/" + std::to_string(cycles));
  v.require(bad_determinism == 0, "nondeterministic traces " + std::to_string(bad_determinism));
  return v;
}

Verdict closed_form_period() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const chain::ChainModels m;
  double worst = 0.0;
  for (int k = 0; k <= 12; ++k) {
    const double p = std::pow(10.0, -6.0 + 3.0 * k / 12.0);
    auto s = chain::ChainState::initial(m);
    std::vector<double> rel;
    while (rel.size() < 3 && s.t < 400.0) {
      const std::size_t before = s.events.size();
      s = chain::step(std::move(s), {1.0, p}, 1e-4, m);
      for (std::size_t i = before; i < s.events.size(); ++i) {
        if (s.events[i].kind == EventKind::Release) rel.push_back(s.events[i].t);
      }
    }
    if (rel.size() < 3) {
      worst = HUGE_VAL;
      continue;
    }
    const double cf = chain::cycle_period({1.0, p}, m).period_s;
    worst = std::max(worst, std::abs((rel[2] - rel[1]) / cf - 1.0));
  }
  v.require(worst <= 0.01, "worst deviation " + num(100.0 * worst, 3) + " %");
  const double t = seconds_since(t0);
  v.require(t < 10.0, "runtime " + num(t, 2) + " s");
  return v;
}

Verdict matching() {
  Verdict v;
  const auto& z = rectifier::RectifierModel{}.input_impedance;
  const auto t = rf::tune(z, kF0);
  v.require(near(t.network.l_henries, 3.3e-9, 0.33e-9), "L " + num(t.network.l_henries * 1e9) + " nH");
  v.require(near(t.network.c_farads, 8.2e-12, 0.82e-12), "C " + num(t.network.c_farads * 1e12) + " pF");
  const rf::MatchingNetwork prototype{3.3e-9, 8.2e-12, rf::Topology::SeriesLShuntCLoad};
  const double rl = rf::reflection_and_return_loss(rf::network_input_impedance(prototype, z, kF0), {50.0, 0.0})
                        .return_loss_db;
  v.require(rl >= 20.0, "return loss " + num(rl) + " dB");
  return v;
}

Verdict sensitivity() {
  Verdict v;
  const auto s = config::preset("paper-2013").scenario;
  const double pump = link::watts_to_dbm(harvester::activation_threshold(s.harvester, Variant::WithPump, kF0));
  const double ref = link::watts_to_dbm(harvester::activation_threshold(s.harvester, Variant::NoPump, kF0));
  v.require(near(pump, -14.0, 0.5), "with pump " + num(pump) + " dBm");
  v.require(near(ref, -9.0, 1.0), "no pump " + num(ref) + " dBm");
  const double f = harness::activation_minimum_frequency(s, 830e6, 900e6, 0.5e6);
  v.require(near(f, kF0, 5e6), "activation minimum " + num(f / 1e6, 6) + " MHz");
  return v;
}

Verdict ranges() {
  Verdict v;
  const auto fs = config::preset("paper-2013-free-space").scenario;
  const auto a = harness::compare_variants(fs, {harness::Axis::Distance, 0.2, 8.0, 0.1}, 0);
  v.require(near(a.range_ratio, 1.78, 0.05), "free space ratio " + num(a.range_ratio));
  const auto office = config::preset("paper-2013").scenario;
  const auto b = harness::compare_variants(office, {harness::Axis::Distance, 0.2, 6.0, 0.1}, 0);
  v.require(near(b.range_ratio, 3.0, 0.1), "n=1.048 ratio " + num(b.range_ratio));
  v.require(near(b.pump.max_range_m, 4.8, 0.2), "with pump range " + num(b.pump.max_range_m) + " m");
  // Free-space prediction against the measured office range.
  v.detail += "; free space with pump range " + num(a.pump.max_range_m) + " m vs measured 4.8 m";
  return v;
}

Verdict crossover() {
  Verdict v;
  const auto s = config::preset("paper-2013").scenario;
  const auto c = harness::compare_variants(s, {harness::Axis::Distance, 0.2, 6.0, 0.1}, 0);
  bool ref_ahead = false;
  for (std::size_t i = 0; i + 1 < c.table.rows.size(); i += 2) {
    const auto& p = c.table.rows[i];
    const auto& r = c.table.rows[i + 1];
    if (p.axis < 1.5 && r.rate_hz > p.rate_hz) ref_ahead = true;
  }
  v.require(ref_ahead, "no pump ahead below 1.5 m");
  v.require(c.crossover && c.reference.last_active && *c.crossover < *c.reference.last_active,
            "crossover " + (c.crossover ? num(*c.crossover) + " m" : std::string("none")) + " before cutoff " +
                (c.reference.last_active ? num(*c.reference.last_active) + " m" : std::string("none")));
  return v;
}

Verdict efficiency() {
  Verdict v;
  const auto h = config::preset("paper-2013").scenario.harvester;
  const double pump = harvester::peak_system_efficiency(h, Variant::WithPump, kF0).efficiency;
  const double ref = harvester::peak_system_efficiency(h, Variant::NoPump, kF0).efficiency;
  v.require(near(pump, 0.16, 0.02), "with pump " + num(100.0 * pump) + " %");
  v.require(near(ref, 0.27, 0.03), "no pump " + num(100.0 * ref) + " %");
  return v;
}

Verdict cli_compare() {
  Verdict v;
  std::filesystem::create_directories(HS_TEST_TMP);
  const auto t0 = std::chrono::steady_clock::now();
  std::string outs[2];
  for (int i = 0; i < 2; ++i) {
    const auto path = testproc::tmp("accept_" + std::to_string(i) + ".csv");
    const auto r = testproc::run(testproc::cli("sweep --preset paper-2013 --axis distance --compare --out " + path));
    v.require(r.code == 0, "run " + std::to_string(i + 1) + " exit " + std::to_string(r.code));
    std::ifstream in(path, std::ios::binary);
    outs[i].assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const double t = seconds_since(t0) / 2.0;
  v.require(!outs[0].empty() && outs[0] == outs[1], "byte-identical CSV (" + std::to_string(outs[0].size()) + " B)");
  v.require(t < 60.0, "runtime " + num(t, 2) + " s per run");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"link equation", link_equation},   {"capacitor sizing", sizing},     {"hysteresis properties", fsm_properties},
      {"closed-form period", closed_form_period}, {"matching round-trip", matching}, {"activation thresholds", sensitivity},
      {"range comparison", ranges},       {"rate crossover", crossover},    {"peak efficiencies", efficiency},
      {"cli compare sweep", cli_compare},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
