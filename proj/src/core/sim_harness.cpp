#include "sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <thread>

#include "errors.hpp"

namespace harvestsim::harness {

using chain::Variant;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dbm_or_inf(double w) {
  if (std::isinf(w)) return kInf;
  return w > 0.0 ? link::watts_to_dbm(w) : -kInf;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  }
  return s;
}

}  // namespace

void Scenario::validate() const {
  effective_link().validate();
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) throw DomainError("link.distance: must be > 0");
  if (!std::isfinite(g_tx_dbi)) throw DomainError("link.g_tx: must be finite");
  harvester.validate();
  if (!(dt > 0.0 && dt <= chain::kMaxStep)) throw ConfigError("chain.integrator.dt", "must be in (0, 1 ms]");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("chain.integrator.duration", "must be > 0");
}

link::LinkParams Scenario::effective_link() const {
  link::LinkParams l = link;
  l.g_rx_dbi = harvester.antenna.gain_dbi;
  return l;
}

double Scenario::available_power_w() const { return link::received_power(effective_link(), distance_m).watts(); }

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::Distance: return "distance";
    case Axis::Frequency: return "frequency";
    case Axis::TxPower: return "tx_power";
  }
  return "?";
}

Axis axis_from_string(std::string_view s) {
  for (auto a : {Axis::Distance, Axis::Frequency, Axis::TxPower}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("sweep.axis", "expected distance, frequency or tx_power, got '" + std::string(s) + "'");
}

void SweepSpec::validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("sweep.range", "bounds must be finite");
  if (!(start <= stop)) throw ConfigError("sweep.range", "start must not exceed stop");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("sweep.range", "step must be > 0");
  if ((stop - start) / step > 1e6) throw ConfigError("sweep.range", "more than 1e6 points");
}

std::vector<double> SweepSpec::points() const {
  validate();
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step * (1.0 + 1e-12) + 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

Scenario with_axis_value(const Scenario& s, Axis axis, double value) {
  Scenario out = s;
  switch (axis) {
    case Axis::Distance: out.distance_m = value; break;
    case Axis::Frequency: out.link.freq_hz = value; break;
    case Axis::TxPower: out.link.eirp_w = value * link::from_db(s.g_tx_dbi); break;
  }
  return out;
}

namespace {

RunResult run_unchecked(const Scenario& s) {
  const auto& m = s.harvester;
  const double f = s.link.freq_hz;
  const double p_av = s.available_power_w();
  const bool pump = s.variant == Variant::WithPump;

  RunResult out{chain::ChainState::initial(m.chain), {}};
  Summary& sum = out.summary;
  sum.received_dbm = dbm_or_inf(p_av);

  chain::PumpInput in{};
  std::optional<chain::ReferenceSource> source;
  if (pump) {
    if (p_av > 0.0) in = harvester::pump_input(m, p_av, f);
    sum.v_rect = in.v_rect;
    sum.activated = in.v_rect >= m.chain.pump.v_start;
  } else {
    source.emplace(m.rectifier, p_av > 0.0 ? harvester::delivered_power(m, p_av, f) : 0.0);
    sum.v_rect = source->open_circuit_voltage();
    sum.activated = sum.v_rect > m.chain.supervisor.v_release;
  }
  // Nothing can ever release: the pump never starts, or the rectifier alone
  // cannot lift the capacitor to the supervisor threshold.
  const double v_rel = pump ? m.chain.pump.v_release : m.chain.supervisor.v_release;
  if (!sum.activated && out.final.cap.v < v_rel) return out;

  struct Mark {
    double t;
    chain::EnergyLedger energy;
  };
  std::vector<Mark> releases;
  std::vector<double> logs_since_release;
  std::size_t seen = 0;
  auto& st = out.final;
  while (st.t < s.duration_s) {
    const double h = std::min(s.dt, s.duration_s - st.t);
    if (!(h > 1e-12)) break;
    st = pump ? chain::step(std::move(st), in, h, m.chain)
              : chain::reference_variant_step(std::move(st), *source, h, m.chain);
    for (; seen < st.events.size(); ++seen) {
      const auto& e = st.events[seen];
      switch (e.kind) {
        case chain::EventKind::Release:
          releases.push_back({e.t, st.energy});
          logs_since_release.clear();
          break;
        case chain::EventKind::LogComplete: logs_since_release.push_back(e.t); break;
        case chain::EventKind::Disconnect: logs_since_release.clear(); break;
        default: break;
      }
    }
    if (releases.size() >= 5) break;
    if (st.connected() && logs_since_release.size() >= 6) {
      sum.sustained = true;
      break;
    }
  }
  sum.simulated_s = st.t;

  for (const auto& e : st.events) {
    if (e.kind == chain::EventKind::LogComplete) ++sum.logs;
    if (e.kind == chain::EventKind::Brownout) ++sum.brownouts;
  }
  sum.releases = releases.size();

  if (releases.size() >= 2) {
    const std::size_t k = releases.size() - 1;
    const std::size_t j = k >= 3 ? k - 3 : 0;
    const double t0 = releases[j].t;
    const double t1 = releases[k].t;
    const auto logs = std::count_if(st.events.begin(), st.events.end(), [&](const auto& e) {
      return e.kind == chain::EventKind::LogComplete && e.t >= t0 && e.t < t1;
    });
    const double cycles = static_cast<double>(k - j);
    sum.rate_hz = static_cast<double>(logs) / (t1 - t0);
    sum.cycle_input_j = (releases[k].energy.input - releases[j].energy.input) / cycles;
    sum.cycle_load_j = (releases[k].energy.load - releases[j].energy.load) / cycles;
  } else if (sum.sustained) {
    const auto& lc = logs_since_release;
    const std::size_t first = lc.size() > 5 ? lc.size() - 5 : 0;
    sum.rate_hz = static_cast<double>(lc.size() - 1 - first) / (lc.back() - lc[first]);
  }
  return out;
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
  s.validate();
  try {
    return run_unchecked(s);
  } catch (const NumericError& e) {
    throw NumericError("scenario '" + s.name + "': " + e.what(), e.last_iterate());
  } catch (const DomainError& e) {
    throw DomainError("scenario '" + s.name + "': " + e.what());
  }
}

Row evaluate_point(const Scenario& s) {
  Row r;
  r.variant = s.variant;
  try {
    const auto res = run_scenario(s);
    r.received_dbm = res.summary.received_dbm;
    r.v_rect_v = res.summary.v_rect;
    r.rate_hz = res.summary.rate_hz;
    r.events = res.final.events.size();
    const double f = s.link.freq_hz;
    const double p_av = s.available_power_w();
    r.eta = p_av > 0.0 ? harvester::system_efficiency(s.harvester, s.variant, p_av, f) : 0.0;
    const double thr = harvester::activation_threshold(s.harvester, s.variant, f);
    r.sensitivity_dbm = dbm_or_inf(thr);
    r.activation_eirp_dbm =
        std::isinf(thr) ? kInf
                        : dbm_or_inf(link::required_eirp(s.effective_link(), link::PowerLevel::watts(thr), s.distance_m));
  } catch (const std::exception& e) {
    r.status = csv_safe(e.what());
  }
  return r;
}

ResultTable sweep(const Scenario& s, const SweepSpec& spec, int jobs) {
  s.validate();
  const auto pts = spec.points();
  ResultTable t{spec.axis, std::vector<Row>(pts.size())};
  parallel_for(pts.size(), jobs, [&](std::size_t i) {
    t.rows[i] = evaluate_point(with_axis_value(s, spec.axis, pts[i]));
    t.rows[i].axis = pts[i];
  });
  return t;
}

std::optional<double> find_crossover(const std::vector<double>& axis, const std::vector<double>& a,
                                     const std::vector<double>& b) {
  const std::size_t n = std::min({axis.size(), a.size(), b.size()});
  for (std::size_t i = 1; i < n; ++i) {
    const double d0 = a[i - 1] - b[i - 1];
    const double d1 = a[i] - b[i];
    if (d0 > 0.0 && d1 <= 0.0) return axis[i - 1] + (axis[i] - axis[i - 1]) * d0 / (d0 - d1);
  }
  return std::nullopt;
}

Comparison compare_variants(const Scenario& s, const SweepSpec& spec, int jobs) {
  if (spec.axis != Axis::Distance && spec.axis != Axis::Frequency) {
    throw ConfigError("sweep.axis", "compare needs a distance or frequency axis");
  }
  s.validate();
  const auto pts = spec.points();
  Comparison c;
  c.table.axis = spec.axis;
  c.table.rows.resize(2 * pts.size());
  parallel_for(c.table.rows.size(), jobs, [&](std::size_t i) {
    Scenario si = with_axis_value(s, spec.axis, pts[i / 2]);
    si.variant = i % 2 == 0 ? Variant::WithPump : Variant::NoPump;
    c.table.rows[i] = evaluate_point(si);
    c.table.rows[i].axis = pts[i / 2];
  });

  const auto link = s.effective_link();
  std::vector<double> rates[2];
  for (int v = 0; v < 2; ++v) {
    const Variant variant = v == 0 ? Variant::WithPump : Variant::NoPump;
    VariantMetrics& vm = v == 0 ? c.pump : c.reference;
    const double thr = harvester::activation_threshold(s.harvester, variant, link.freq_hz);
    vm.threshold_dbm = dbm_or_inf(thr);
    vm.max_range_m = std::isinf(thr) ? 0.0 : link::max_range(link, link::PowerLevel::watts(thr));
    double best_eirp = kInf;
    for (std::size_t i = v; i < c.table.rows.size(); i += 2) {
      const Row& r = c.table.rows[i];
      rates[v].push_back(r.status == "ok" ? r.rate_hz : 0.0);
      if (r.status == "ok" && r.rate_hz > 0.0) vm.last_active = r.axis;
      if (r.status == "ok" && r.activation_eirp_dbm < best_eirp) {
        best_eirp = r.activation_eirp_dbm;
        vm.best_axis = r.axis;
      }
    }
  }
  c.sensitivity_gap_db = c.reference.threshold_dbm - c.pump.threshold_dbm;
  c.range_ratio = c.reference.max_range_m > 0.0 ? c.pump.max_range_m / c.reference.max_range_m : kInf;
  c.crossover = find_crossover(pts, rates[1], rates[0]);
  return c;
}

double activation_minimum_frequency(const Scenario& s, double lo_hz, double hi_hz, double step_hz) {
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && step_hz > 0.0)) {
    throw DomainError("activation_minimum_frequency: need 0 < lo < hi and step > 0");
  }
  auto eirp = [&](double f) {
    const Scenario sf = with_axis_value(s, Axis::Frequency, f);
    const double thr = harvester::activation_threshold(sf.harvester, sf.variant, f);
    if (std::isinf(thr)) return kInf;
    return link::required_eirp(sf.effective_link(), link::PowerLevel::watts(thr), sf.distance_m);
  };
  double best_f = lo_hz;
  double best = eirp(lo_hz);
  for (double f : SweepSpec{Axis::Frequency, lo_hz, hi_hz, step_hz}.points()) {
    const double e = eirp(f);
    if (e < best) {
      best = e;
      best_f = f;
    }
  }
  double a = std::max(lo_hz, best_f - step_hz);
  double b = std::min(hi_hz, best_f + step_hz);
  constexpr double kInvPhi = 0.6180339887498949;
  while (b - a > 1.0) {
    const double x1 = b - kInvPhi * (b - a);
    const double x2 = a + kInvPhi * (b - a);
    if (eirp(x1) < eirp(x2)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  const double mid = 0.5 * (a + b);
  return eirp(mid) < best ? mid : best_f;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string to_csv(const ResultTable& t) {
  std::string out = "axis,received_dbm,v_rect_v,eta,rate_hz,events,sensitivity_dbm,activation_eirp_dbm,variant,status\n";
  for (const auto& r : t.rows) {
    out += format_number(r.axis) + ',' + format_number(r.received_dbm) + ',' + format_number(r.v_rect_v) + ',' +
           format_number(r.eta) + ',' + format_number(r.rate_hz) + ',' + std::to_string(r.events) + ',' +
           format_number(r.sensitivity_dbm) + ',' + format_number(r.activation_eirp_dbm) + ',' +
           std::string(chain::to_string(r.variant)) + ',' + r.status + '\n';
  }
  return out;
}

std::string events_csv(const chain::ChainState& s) {
  std::string out = "t_s,event,v_cap_v\n";
  for (const auto& e : s.events) {
    out += format_number(e.t) + ',' + std::string(chain::to_string(e.kind)) + ',' + format_number(e.v) + '\n';
  }
  return out;
}

}  // namespace harvestsim::harness
