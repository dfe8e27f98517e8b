#include "calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <limits>
#include <sstream>

#include "link_budget.hpp"
#include "rectifier.hpp"

namespace harvestsim::calibration {

using harvester::HarvesterModel;

std::string_view to_string(AnchorKind k) {
  switch (k) {
    case AnchorKind::RectifiedVoltage: return "rectified_voltage";
    case AnchorKind::PumpInputVoltage: return "pump_input_voltage";
    case AnchorKind::OpenCircuitVoltage: return "open_circuit_voltage";
    case AnchorKind::ActivationThreshold: return "activation_threshold";
    case AnchorKind::PeakEfficiency: return "peak_efficiency";
  }
  return "?";
}

AnchorKind anchor_kind_from_string(std::string_view s) {
  for (auto k : {AnchorKind::RectifiedVoltage, AnchorKind::PumpInputVoltage, AnchorKind::OpenCircuitVoltage,
                 AnchorKind::ActivationThreshold, AnchorKind::PeakEfficiency}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("kind", "unknown anchor kind '" + std::string(s) + "'");
}

std::string_view to_string(FreeParam p) {
  switch (p) {
    case FreeParam::LossFactor: return "loss_factor";
    case FreeParam::EffectiveInputResistance: return "effective_input_resistance";
    case FreeParam::PumpInputResistance: return "pump_input_resistance";
    case FreeParam::LoadOhms: return "load_ohms";
  }
  return "?";
}

FreeParam free_param_from_string(std::string_view s) {
  for (auto p : {FreeParam::LossFactor, FreeParam::EffectiveInputResistance, FreeParam::PumpInputResistance,
                 FreeParam::LoadOhms}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("free", "unknown free parameter '" + std::string(s) + "'");
}

std::string_view to_string(EfficiencyReading r) { return r == EfficiencyReading::Points ? "points" : "relative"; }

EfficiencyReading efficiency_reading_from_string(std::string_view s) {
  if (s == "points") return EfficiencyReading::Points;
  if (s == "relative") return EfficiencyReading::Relative;
  throw ConfigError("reading", "expected 'points' or 'relative', got '" + std::string(s) + "'");
}

double anchor_value(const Anchor& a, const HarvesterModel& m, double freq_hz) {
  switch (a.kind) {
    case AnchorKind::RectifiedVoltage:
      return rectifier::output_voltage(harvester::delivered_power(m, a.p_available_w, freq_hz), m.rectifier,
                                       m.rectifier.load_ohms);
    case AnchorKind::PumpInputVoltage:
      return harvester::pump_input(m, a.p_available_w, freq_hz).v_rect;
    case AnchorKind::OpenCircuitVoltage:
      return rectifier::open_circuit_voltage(harvester::delivered_power(m, a.p_available_w, freq_hz),
                                             m.rectifier);
    case AnchorKind::ActivationThreshold:
      return link::watts_to_dbm(harvester::activation_threshold(m, a.variant, freq_hz));
    case AnchorKind::PeakEfficiency:
      return harvester::peak_system_efficiency(m, a.variant, freq_hz).efficiency;
  }
  return 0.0;
}

std::vector<Residual> evaluate(const std::vector<Anchor>& anchors, const HarvesterModel& m, double freq_hz) {
  std::vector<Residual> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) {
    Residual r{a.label.empty() ? std::string(to_string(a.kind)) : a.label, 0.0, a.target, a.tolerance, false};
    r.value = anchor_value(a, m, freq_hz);
    r.ok = std::abs(r.residual()) <= a.tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

struct ParamSpace {
  FreeParam param;
  double lo;  // bounds in log space
  double hi;
};

ParamSpace space_for(FreeParam p) {
  switch (p) {
    case FreeParam::LossFactor: return {p, std::log(0.02), 0.0};
    case FreeParam::EffectiveInputResistance: return {p, std::log(1.0), std::log(1e5)};
    case FreeParam::PumpInputResistance: return {p, std::log(100.0), std::log(1e8)};
    case FreeParam::LoadOhms: return {p, std::log(100.0), std::log(1e8)};
  }
  return {p, 0.0, 0.0};
}

double& field(HarvesterModel& m, FreeParam p) {
  switch (p) {
    case FreeParam::LossFactor: return m.rectifier.loss_factor;
    case FreeParam::EffectiveInputResistance: return m.rectifier.effective_input_resistance;
    case FreeParam::PumpInputResistance: return m.chain.pump.input_resistance;
    case FreeParam::LoadOhms: return m.rectifier.load_ohms;
  }
  return m.rectifier.loss_factor;
}

class Problem {
 public:
  Problem(const std::vector<Anchor>& anchors, const HarvesterModel& base, std::vector<ParamSpace> space,
          double freq_hz)
      : anchors_(anchors), base_(base), space_(std::move(space)), freq_(freq_hz) {}

  HarvesterModel model_at(const Eigen::VectorXd& u) const {
    HarvesterModel m = base_;
    for (std::size_t i = 0; i < space_.size(); ++i) field(m, space_[i].param) = std::exp(u[i]);
    return m;
  }

  /// Residuals scaled by their tolerances; empty on a numeric failure.
  std::optional<Eigen::VectorXd> residuals(const Eigen::VectorXd& u) {
    ++evaluations;
    const HarvesterModel m = model_at(u);
    Eigen::VectorXd r(anchors_.size());
    try {
      for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const double v = anchor_value(anchors_[i], m, freq_);
        if (!std::isfinite(v)) return std::nullopt;
        r[i] = (v - anchors_[i].target) / anchors_[i].tolerance;
      }
    } catch (const NumericError&) {
      return std::nullopt;
    }
    return r;
  }

  double cost(const Eigen::VectorXd& u) {
    const auto r = residuals(u);
    return r ? r->squaredNorm() : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd clamp(Eigen::VectorXd u) const {
    for (std::size_t i = 0; i < space_.size(); ++i) u[i] = std::clamp(u[i], space_[i].lo, space_[i].hi);
    return u;
  }

  std::size_t dims() const { return space_.size(); }
  const ParamSpace& space(std::size_t i) const { return space_[i]; }

  int evaluations = 0;

 private:
  const std::vector<Anchor>& anchors_;
  HarvesterModel base_;
  std::vector<ParamSpace> space_;
  double freq_;
};

struct Candidate {
  Eigen::VectorXd u;
  double cost;
};

std::vector<Candidate> grid_search(Problem& prob, std::size_t keep) {
  const std::size_t k = prob.dims();
  const int per_dim = k == 1 ? 64 : k == 2 ? 24 : k == 3 ? 10 : 7;
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= static_cast<std::size_t>(per_dim);
  std::vector<Candidate> found;
  Eigen::VectorXd u(k);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& s = prob.space(i);
      const int j = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      u[i] = s.lo + (s.hi - s.lo) * (j + 0.5) / per_dim;
    }
    const double c = prob.cost(u);
    if (std::isfinite(c)) found.push_back({u, c});
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
  if (found.size() > keep) found.resize(keep);
  return found;
}

Candidate levenberg_marquardt(Problem& prob, Candidate start) {
  const std::size_t k = prob.dims();
  Eigen::VectorXd u = start.u;
  auto r0 = prob.residuals(u);
  if (!r0) return start;
  Eigen::VectorXd r = *r0;
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  constexpr double kH = 1e-6;
  for (int it = 0; it < 200 && cost > 1e-20; ++it) {
    Eigen::MatrixXd jac(r.size(), static_cast<Eigen::Index>(k));
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      Eigen::VectorXd up = u, dn = u;
      up[i] += kH;
      dn[i] -= kH;
      const auto rp = prob.residuals(up);
      const auto rm = prob.residuals(dn);
      if (!rp || !rm) {
        ok = false;
        break;
      }
      jac.col(static_cast<Eigen::Index>(i)) = (*rp - *rm) / (2.0 * kH);
    }
    if (!ok) break;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * (jtj.diagonal().array() + 1e-9).matrix();
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      const Eigen::VectorXd trial = prob.clamp(u + step);
      const auto rt = prob.residuals(trial);
      const double ct = rt ? rt->squaredNorm() : std::numeric_limits<double>::infinity();
      if (ct < cost) {
        const double moved = (trial - u).norm();
        u = trial;
        r = *rt;
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (moved < 1e-13) it = 200;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return {u, cost};
}

std::string describe(const Residual& r) {
  std::ostringstream os;
  os << "'" << r.label << "' = " << r.value << " (target " << r.target << " +/- " << r.tolerance << ")";
  return os.str();
}

}  // namespace

CalibrationResult calibrate(const std::vector<Anchor>& anchors, const HarvesterModel& model,
                            const std::vector<FreeParam>& free, double freq_hz) {
  if (anchors.empty()) throw ConfigError("anchors", "at least one anchor is required");
  if (free.empty()) throw ConfigError("free", "at least one free parameter is required");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    const std::string path = "anchors[" + std::to_string(i) + "]";
    if (!(a.tolerance > 0.0)) throw ConfigError(path + ".tolerance", "must be > 0");
    const bool needs_power = a.kind == AnchorKind::RectifiedVoltage || a.kind == AnchorKind::PumpInputVoltage ||
                             a.kind == AnchorKind::OpenCircuitVoltage;
    if (needs_power && !(a.p_available_w > 0.0)) throw ConfigError(path + ".power", "must be > 0");
  }
  model.validate();

  CalibrationResult result{model, evaluate(anchors, model, freq_hz), false, static_cast<int>(anchors.size())};
  if (std::all_of(result.residuals.begin(), result.residuals.end(), [](const auto& r) { return r.ok; })) {
    return result;
  }

  std::vector<ParamSpace> space;
  for (auto p : free) {
    if (std::any_of(space.begin(), space.end(), [&](const auto& s) { return s.param == p; })) {
      throw ConfigError("free", "duplicate free parameter '" + std::string(to_string(p)) + "'");
    }
    space.push_back(space_for(p));
  }
  Problem prob(anchors, model, space, freq_hz);

  // Current model first, then the best grid cells.
  Eigen::VectorXd u0(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i) {
    HarvesterModel m = model;
    u0[static_cast<Eigen::Index>(i)] = std::log(field(m, space[i].param));
  }
  std::vector<Candidate> starts{{prob.clamp(u0), prob.cost(prob.clamp(u0))}};
  for (auto& c : grid_search(prob, 6)) starts.push_back(std::move(c));

  // Several roots can satisfy the anchors; keep the one that moves the model least.
  const Eigen::VectorXd u_start = prob.clamp(u0);
  Candidate best{u0, std::numeric_limits<double>::infinity()};
  double best_shift = std::numeric_limits<double>::infinity();
  const double n_anchors = static_cast<double>(anchors.size());
  for (const auto& s : starts) {
    if (!std::isfinite(s.cost)) continue;
    const Candidate c = levenberg_marquardt(prob, s);
    const bool fits = c.cost <= 1e-6 * n_anchors;
    const bool best_fits = best.cost <= 1e-6 * n_anchors;
    const double shift = (c.u - u_start).norm();
    if ((fits && (!best_fits || shift < best_shift)) || (!fits && !best_fits && c.cost < best.cost)) {
      best = c;
      best_shift = shift;
    }
  }

  result.evaluations += prob.evaluations;
  if (std::isfinite(best.cost)) {
    result.model = prob.model_at(best.u);
    result.residuals = evaluate(anchors, result.model, freq_hz);
    result.changed = !(result.model == model);
  }

  const auto worst = std::max_element(result.residuals.begin(), result.residuals.end(), [](const auto& a, const auto& b) {
    return std::abs(a.residual()) / a.tolerance < std::abs(b.residual()) / b.tolerance;
  });
  if (!worst->ok) {
    std::string msg = "calibration infeasible: worst residual " + describe(*worst);
    std::string tension;
    for (const auto& r : result.residuals) {
      if (!tension.empty()) tension += ", ";
      tension += "'" + r.label + "'";
    }
    msg += "; anchors in tension: " + tension;
    throw CalibrationError(msg, std::move(result));
  }
  return result;
}

std::vector<Anchor> reference_anchors(EfficiencyReading reading) {
  using chain::Variant;
  const double no_pump_peak = reading == EfficiencyReading::Points ? 0.16 + 0.11 : 0.16 / (1.0 - 0.11);
  return {
      {AnchorKind::ActivationThreshold, Variant::WithPump, 0.0, -14.0, 0.01, "pump activation threshold (dBm)"},
      {AnchorKind::ActivationThreshold, Variant::NoPump, 0.0, -9.0, 0.01, "no-pump activation threshold (dBm)"},
      {AnchorKind::PeakEfficiency, Variant::WithPump, 0.0, 0.16, 0.001, "pump peak efficiency"},
      {AnchorKind::PeakEfficiency, Variant::NoPump, 0.0, no_pump_peak, 0.001, "no-pump peak efficiency"},
  };
}

std::vector<FreeParam> default_free_params() {
  return {FreeParam::LossFactor, FreeParam::EffectiveInputResistance, FreeParam::PumpInputResistance,
          FreeParam::LoadOhms};
}

}  // namespace harvestsim::calibration
