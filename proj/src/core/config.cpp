#include "config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "errors.hpp"

namespace harvestsim::config {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

enum class Dim { Frequency, Power, PowerDbm, Gain, Length, Inductance, Capacitance, Voltage, Current, Time, Resistance };

struct Unit {
  std::string_view name;
  Dim dim;
  double scale;  // SI per unit; values below 1 are applied as a division by 1/scale
};

constexpr Unit kUnits[] = {
    {"Hz", Dim::Frequency, 1.0},  {"MHz", Dim::Frequency, 1e6},  {"W", Dim::Power, 1.0},
    {"dBi", Dim::Gain, 1.0},      {"m", Dim::Length, 1.0},       {"nH", Dim::Inductance, 1e-9},
    {"pF", Dim::Capacitance, 1e-12}, {"uF", Dim::Capacitance, 1e-6}, {"V", Dim::Voltage, 1.0},
    {"mA", Dim::Current, 1e-3},   {"ms", Dim::Time, 1e-3},       {"ohm", Dim::Resistance, 1.0},
    {"H", Dim::Inductance, 1.0},  {"F", Dim::Capacitance, 1.0},  {"A", Dim::Current, 1.0},
    {"s", Dim::Time, 1.0},
};

double apply(const Unit& u, double v) { return u.scale >= 1.0 ? v * u.scale : v / std::round(1.0 / u.scale); }

double unapply(const Unit& u, double si) { return u.scale >= 1.0 ? si / u.scale : si * std::round(1.0 / u.scale); }

const Unit& unit_named(std::string_view name) {
  for (const auto& u : kUnits) {
    if (u.name == name) return u;
  }
  static const Unit dbm{"dBm", Dim::PowerDbm, 1.0};
  if (name == "dBm") return dbm;
  throw ConfigError("unknown unit '" + std::string(name) + "'");
}

/// Walks a JSON object, tracking the dotted path and which keys were read.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(at(k), "unknown key");
    }
  }

  std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw ConfigError(key.empty() ? path_ : at(key), what);
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  const json& raw(std::string_view key) {
    const std::string k(key);
    if (!j_.contains(k)) fail(key, "missing");
    used_.insert(k);
    return j_.at(k);
  }

  Reader child(std::string_view key) { return Reader(raw(key), at(key)); }

  double number(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a plain number");
    return v.get<double>();
  }

  int integer(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  bool boolean(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string text(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  /// A {value, unit} pair converted to the internal representation of `dim`.
  double quantity(std::string_view key, Dim dim) {
    Reader q = child(key);
    const double value = q.number("value");
    const std::string name = q.text("unit");
    const Unit* u = nullptr;
    try {
      u = &unit_named(name);
    } catch (const ConfigError& e) {
      q.fail("unit", e.what());
    }
    if (!std::isfinite(value)) q.fail("value", "must be finite");
    if (dim == Dim::Power && u->dim == Dim::PowerDbm) return link::dbm_to_watts(value);
    if (dim == Dim::PowerDbm && u->dim == Dim::Power) {
      if (!(value > 0.0)) q.fail("value", "power must be > 0 to express in dBm");
      return link::watts_to_dbm(value);
    }
    if (u->dim != dim) q.fail("unit", "unit '" + name + "' does not fit this quantity");
    return apply(*u, value);
  }

  template <class F>
  auto optional(std::string_view key, F&& read) -> std::optional<decltype(read(key))> {
    if (!has(key)) return std::nullopt;
    return read(key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

/// Smallest nudge of unapply(u, si) that reads back as exactly `si`, if any.
std::optional<double> exact_value(const Unit& u, double si) {
  const double v0 = unapply(u, si);
  if (apply(u, v0) == si) return v0;
  double up = v0;
  double down = v0;
  for (int i = 0; i < 4096; ++i) {
    up = std::nextafter(up, HUGE_VAL);
    if (apply(u, up) == si) return up;
    down = std::nextafter(down, -HUGE_VAL);
    if (apply(u, down) == si) return down;
  }
  return std::nullopt;
}

const Unit& base_unit(Dim dim) {
  for (const auto& u : kUnits) {
    if (u.dim == dim && u.scale == 1.0) return u;
  }
  throw std::logic_error("no base unit");
}

ordered_json quantity(double si, std::string_view unit) {
  const Unit& u = unit_named(unit);
  if (u.dim == Dim::PowerDbm) return ordered_json{{"value", si}, {"unit", "dBm"}};
  if (auto v = exact_value(u, si)) return ordered_json{{"value", *v}, {"unit", unit}};
  // Not reachable through the scaled unit; fall back to SI.
  return ordered_json{{"value", si}, {"unit", base_unit(u.dim).name}};
}

harvestsim::rf::Impedance read_impedance(Reader r) {
  return {r.quantity("resistance", Dim::Resistance), r.quantity("reactance", Dim::Resistance)};
}

ordered_json write_impedance(rf::Impedance z) {
  return {{"resistance", quantity(z.resistance, "ohm")}, {"reactance", quantity(z.reactance, "ohm")}};
}

template <class F>
auto translate_enum(Reader& r, std::string_view key, F&& from_string) {
  const std::string s = r.text(key);
  try {
    return from_string(s);
  } catch (const ConfigError& e) {
    r.fail(key, "invalid value '" + s + "'");
  }
}

Dim axis_dim(harness::Axis a) {
  switch (a) {
    case harness::Axis::Distance: return Dim::Length;
    case harness::Axis::Frequency: return Dim::Frequency;
    case harness::Axis::TxPower: return Dim::Power;
  }
  return Dim::Length;
}

std::string_view axis_unit(harness::Axis a) {
  switch (a) {
    case harness::Axis::Distance: return "m";
    case harness::Axis::Frequency: return "Hz";
    case harness::Axis::TxPower: return "W";
  }
  return "m";
}

Config read_config(const json& doc) {
  Config c;
  auto& s = c.scenario;
  auto& h = s.harvester;
  Reader root(doc, "");
  if (root.integer("version") != kVersion) root.fail("version", "unsupported version, expected 1");
  if (root.has("name")) s.name = root.text("name");
  {
    Reader l = root.child("link");
    s.link.eirp_w = l.quantity("eirp", Dim::Power);
    s.g_tx_dbi = l.quantity("g_tx", Dim::Gain);
    s.link.freq_hz = l.quantity("frequency", Dim::Frequency);
    s.link.plf = l.number("plf");
    s.link.path_loss_exponent = l.number("path_loss_exponent");
    if (l.has("reference_distance")) s.link.reference_distance_m = l.quantity("reference_distance", Dim::Length);
    if (l.has("excess_loss_db")) s.link.excess_loss_db = l.number("excess_loss_db");
    s.distance_m = l.quantity("distance", Dim::Length);
  }
  {
    Reader f = root.child("frontend");
    Reader a = f.child("antenna");
    h.antenna.gain_dbi = a.quantity("gain", Dim::Gain);
    if (a.has("impedance")) h.antenna.z0 = read_impedance(a.child("impedance"));
    Reader m = f.child("matching");
    h.matching.l_henries = m.quantity("l", Dim::Inductance);
    h.matching.c_farads = m.quantity("c", Dim::Capacitance);
    if (m.has("topology")) h.matching.topology = translate_enum(m, "topology", rf::topology_from_string);
  }
  {
    Reader r = root.child("rectifier");
    auto& rm = h.rectifier;
    rm.stages = r.integer("stages");
    if (r.has("diode")) {
      Reader d = r.child("diode");
      rm.diode.i_s = d.quantity("saturation_current", Dim::Current);
      rm.diode.ideality = d.number("ideality");
      rm.diode.r_s = d.quantity("series_resistance", Dim::Resistance);
      rm.diode.v_t = d.quantity("thermal_voltage", Dim::Voltage);
    }
    rm.load_ohms = r.quantity("load", Dim::Resistance);
    rm.input_impedance = read_impedance(r.child("input_impedance"));
    if (r.has("design_frequency")) rm.design_freq_hz = r.quantity("design_frequency", Dim::Frequency);
    if (r.has("junction_capacitance")) {
      rm.junction_capacitance_f = r.quantity("junction_capacitance", Dim::Capacitance);
    }
    rm.effective_input_resistance = r.quantity("effective_input_resistance", Dim::Resistance);
    rm.loss_factor = r.number("loss_factor");
    if (r.has("efficiency_sweep")) {
      Reader e = r.child("efficiency_sweep");
      h.efficiency_sweep.start_dbm = e.quantity("start", Dim::PowerDbm);
      h.efficiency_sweep.stop_dbm = e.quantity("stop", Dim::PowerDbm);
    }
  }
  {
    Reader ch = root.child("chain");
    s.variant = translate_enum(ch, "variant", chain::variant_from_string);
    auto& cm = h.chain;
    Reader p = ch.child("pump");
    cm.pump.v_start = p.quantity("start_voltage", Dim::Voltage);
    cm.pump.v_release = p.quantity("release_voltage", Dim::Voltage);
    cm.pump.v_reconnect = p.quantity("reconnect_voltage", Dim::Voltage);
    cm.pump.eta_pump = p.number("efficiency");
    cm.pump.t_startup = p.quantity("startup_time", Dim::Time);
    cm.pump.input_resistance = p.quantity("input_resistance", Dim::Resistance);
    if (p.has("feeds_during_discharge")) cm.pump.feeds_during_discharge = p.boolean("feeds_during_discharge");
    Reader sup = ch.child("reference_supervisor");
    cm.supervisor.v_release = sup.quantity("release_voltage", Dim::Voltage);
    cm.supervisor.v_floor = sup.quantity("floor_voltage", Dim::Voltage);
    Reader mcu = ch.child("mcu");
    cm.mcu.i_active = mcu.quantity("active_current", Dim::Current);
    cm.mcu.t_exec = mcu.quantity("exec_time", Dim::Time);
    cm.mcu.v_reg = mcu.quantity("regulated_voltage", Dim::Voltage);
    Reader st = ch.child("storage");
    cm.storage.capacitance = st.quantity("capacitance", Dim::Capacitance);
    if (st.has("initial_voltage")) cm.storage.v = st.quantity("initial_voltage", Dim::Voltage);
    if (ch.has("integrator")) {
      Reader in = ch.child("integrator");
      if (in.has("dt")) s.dt = in.quantity("dt", Dim::Time);
      if (in.has("duration")) s.duration_s = in.quantity("duration", Dim::Time);
    }
  }
  if (root.has("sweep")) {
    Reader sw = root.child("sweep");
    harness::SweepSpec spec;
    spec.axis = translate_enum(sw, "axis", harness::axis_from_string);
    const Dim d = axis_dim(spec.axis);
    spec.start = sw.quantity("start", d);
    spec.stop = sw.quantity("stop", d);
    spec.step = sw.quantity("step", d);
    c.sweep = spec;
  }
  return c;
}

void validate(const Config& c) {
  try {
    c.scenario.validate();
    if (c.sweep) c.sweep->validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON: " + std::string(e.what()));
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("cannot write '" + path + "'");
}

Config parse_config(std::string_view text) {
  Config c = read_config(parse_json(text));
  validate(c);
  return c;
}

Config load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string dump_config(const Config& c) {
  const auto& s = c.scenario;
  const auto& h = s.harvester;
  const auto& rm = h.rectifier;
  const auto& cm = h.chain;
  ordered_json doc;
  doc["version"] = kVersion;
  doc["name"] = s.name;
  doc["link"] = {
      {"eirp", quantity(s.link.eirp_w, "W")},
      {"g_tx", quantity(s.g_tx_dbi, "dBi")},
      {"frequency", quantity(s.link.freq_hz, "MHz")},
      {"plf", s.link.plf},
      {"path_loss_exponent", s.link.path_loss_exponent},
      {"reference_distance", quantity(s.link.reference_distance_m, "m")},
      {"excess_loss_db", s.link.excess_loss_db},
      {"distance", quantity(s.distance_m, "m")},
  };
  doc["frontend"] = {
      {"antenna", {{"gain", quantity(h.antenna.gain_dbi, "dBi")}, {"impedance", write_impedance(h.antenna.z0)}}},
      {"matching",
       {{"l", quantity(h.matching.l_henries, "nH")},
        {"c", quantity(h.matching.c_farads, "pF")},
        {"topology", std::string(rf::to_string(h.matching.topology))}}},
  };
  doc["rectifier"] = {
      {"stages", rm.stages},
      {"diode",
       {{"saturation_current", quantity(rm.diode.i_s, "mA")},
        {"ideality", rm.diode.ideality},
        {"series_resistance", quantity(rm.diode.r_s, "ohm")},
        {"thermal_voltage", quantity(rm.diode.v_t, "V")}}},
      {"load", quantity(rm.load_ohms, "ohm")},
      {"input_impedance", write_impedance(rm.input_impedance)},
      {"design_frequency", quantity(rm.design_freq_hz, "MHz")},
      {"junction_capacitance", quantity(rm.junction_capacitance_f, "pF")},
      {"effective_input_resistance", quantity(rm.effective_input_resistance, "ohm")},
      {"loss_factor", rm.loss_factor},
      {"efficiency_sweep",
       {{"start", quantity(h.efficiency_sweep.start_dbm, "dBm")}, {"stop", quantity(h.efficiency_sweep.stop_dbm, "dBm")}}},
  };
  doc["chain"] = {
      {"variant", std::string(chain::to_string(s.variant))},
      {"pump",
       {{"start_voltage", quantity(cm.pump.v_start, "V")},
        {"release_voltage", quantity(cm.pump.v_release, "V")},
        {"reconnect_voltage", quantity(cm.pump.v_reconnect, "V")},
        {"efficiency", cm.pump.eta_pump},
        {"startup_time", quantity(cm.pump.t_startup, "ms")},
        {"input_resistance", quantity(cm.pump.input_resistance, "ohm")},
        {"feeds_during_discharge", cm.pump.feeds_during_discharge}}},
      {"reference_supervisor",
       {{"release_voltage", quantity(cm.supervisor.v_release, "V")},
        {"floor_voltage", quantity(cm.supervisor.v_floor, "V")}}},
      {"mcu",
       {{"active_current", quantity(cm.mcu.i_active, "mA")},
        {"exec_time", quantity(cm.mcu.t_exec, "ms")},
        {"regulated_voltage", quantity(cm.mcu.v_reg, "V")}}},
      {"storage",
       {{"capacitance", quantity(cm.storage.capacitance, "uF")}, {"initial_voltage", quantity(cm.storage.v, "V")}}},
      {"integrator", {{"dt", quantity(s.dt, "ms")}, {"duration", quantity(s.duration_s, "ms")}}},
  };
  if (c.sweep) {
    const auto unit = axis_unit(c.sweep->axis);
    doc["sweep"] = {
        {"axis", std::string(harness::to_string(c.sweep->axis))},
        {"start", quantity(c.sweep->start, unit)},
        {"stop", quantity(c.sweep->stop, unit)},
        {"step", quantity(c.sweep->step, unit)},
    };
  }
  return doc.dump(2) + "\n";
}

void save_config(const Config& c, const std::string& path) { write_file(path, dump_config(c)); }

AnchorSet parse_anchors(std::string_view text) {
  using calibration::AnchorKind;
  const json doc = parse_json(text);
  AnchorSet out;
  {
    Reader root(doc, "");
    if (root.integer("version") != kVersion) root.fail("version", "unsupported version, expected 1");
    if (root.has("frequency")) out.freq_hz = root.quantity("frequency", Dim::Frequency);
    if (root.has("free")) {
      const json& free = root.raw("free");
      if (!free.is_array() || free.empty()) root.fail("free", "expected a non-empty list of parameter names");
      out.free.clear();
      for (std::size_t i = 0; i < free.size(); ++i) {
        const std::string path = "free[" + std::to_string(i) + "]";
        if (!free[i].is_string()) throw ConfigError(path, "expected a string");
        try {
          out.free.push_back(calibration::free_param_from_string(free[i].get<std::string>()));
        } catch (const ConfigError& e) {
          throw ConfigError(path, "unknown free parameter '" + free[i].get<std::string>() + "'");
        }
      }
    }
    const json& list = root.raw("anchors");
    if (!list.is_array() || list.empty()) root.fail("anchors", "expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Reader a(list[i], "anchors[" + std::to_string(i) + "]");
      calibration::Anchor an;
      an.kind = translate_enum(a, "kind", calibration::anchor_kind_from_string);
      if (a.has("variant")) an.variant = translate_enum(a, "variant", chain::variant_from_string);
      if (a.has("label")) an.label = a.text("label");
      switch (an.kind) {
        case AnchorKind::RectifiedVoltage:
        case AnchorKind::PumpInputVoltage:
        case AnchorKind::OpenCircuitVoltage:
          an.p_available_w = a.quantity("power", Dim::Power);
          an.target = a.quantity("target", Dim::Voltage);
          an.tolerance = a.quantity("tolerance", Dim::Voltage);
          break;
        case AnchorKind::ActivationThreshold:
          an.target = a.quantity("target", Dim::PowerDbm);
          an.tolerance = a.number("tolerance_db");
          break;
        case AnchorKind::PeakEfficiency:
          an.target = a.number("target");
          an.tolerance = a.number("tolerance");
          break;
      }
      if (!(an.tolerance > 0.0)) a.fail("tolerance", "must be > 0");
      out.anchors.push_back(std::move(an));
    }
  }
  return out;
}

AnchorSet load_anchors(const std::string& path) { return parse_anchors(read_file(path)); }

std::string dump_anchors(const AnchorSet& set) {
  using calibration::AnchorKind;
  ordered_json doc;
  doc["version"] = kVersion;
  if (set.freq_hz) doc["frequency"] = quantity(*set.freq_hz, "MHz");
  ordered_json free = ordered_json::array();
  for (auto p : set.free) free.push_back(std::string(calibration::to_string(p)));
  doc["free"] = free;
  ordered_json list = ordered_json::array();
  for (const auto& a : set.anchors) {
    ordered_json j;
    j["kind"] = std::string(calibration::to_string(a.kind));
    j["variant"] = std::string(chain::to_string(a.variant));
    if (!a.label.empty()) j["label"] = a.label;
    switch (a.kind) {
      case AnchorKind::RectifiedVoltage:
      case AnchorKind::PumpInputVoltage:
      case AnchorKind::OpenCircuitVoltage:
        j["power"] = quantity(a.p_available_w, "W");
        j["target"] = quantity(a.target, "V");
        j["tolerance"] = quantity(a.tolerance, "V");
        break;
      case AnchorKind::ActivationThreshold:
        j["target"] = quantity(a.target, "dBm");
        j["tolerance_db"] = a.tolerance;
        break;
      case AnchorKind::PeakEfficiency:
        j["target"] = a.target;
        j["tolerance"] = a.tolerance;
        break;
    }
    list.push_back(std::move(j));
  }
  doc["anchors"] = list;
  return doc.dump(2) + "\n";
}

}  // namespace harvestsim::config
