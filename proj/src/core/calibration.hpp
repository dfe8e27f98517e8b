#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "harvester.hpp"

namespace harvestsim::calibration {

enum class AnchorKind {
  RectifiedVoltage,     ///< V_dc into the rectifier's own load at a given available power
  PumpInputVoltage,     ///< V_dc into the pump input resistance
  OpenCircuitVoltage,   ///< unloaded rectifier output
  ActivationThreshold,  ///< target in dBm, tolerance in dB
  PeakEfficiency,       ///< target as a fraction
};

std::string_view to_string(AnchorKind k);
AnchorKind anchor_kind_from_string(std::string_view s);

struct Anchor {
  AnchorKind kind = AnchorKind::RectifiedVoltage;
  chain::Variant variant = chain::Variant::WithPump;
  double p_available_w = 0.0;  ///< unused by threshold and peak anchors
  double target = 0.0;
  double tolerance = 0.0;
  std::string label;
};

enum class FreeParam { LossFactor, EffectiveInputResistance, PumpInputResistance, LoadOhms };

std::string_view to_string(FreeParam p);
FreeParam free_param_from_string(std::string_view s);

struct Residual {
  std::string label;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool ok = false;

  double residual() const { return value - target; }
};

struct CalibrationResult {
  harvester::HarvesterModel model;
  std::vector<Residual> residuals;
  bool changed = false;
  int evaluations = 0;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, CalibrationResult best) : Error(what), best_(std::move(best)) {}
  const CalibrationResult& best() const noexcept { return best_; }

 private:
  CalibrationResult best_;
};

/// Current value of the quantity an anchor pins.
double anchor_value(const Anchor& a, const harvester::HarvesterModel& m, double freq_hz);

std::vector<Residual> evaluate(const std::vector<Anchor>& anchors, const harvester::HarvesterModel& m,
                               double freq_hz);

/// Fits the free parameters so every anchor lands within its tolerance.
/// A model that already satisfies the anchors comes back unchanged. Throws
/// CalibrationError naming the worst residual when no fit is found.
CalibrationResult calibrate(const std::vector<Anchor>& anchors, const harvester::HarvesterModel& model,
                            const std::vector<FreeParam>& free, double freq_hz);

/// How the "11 %" gap between the two efficiency curves is read.
enum class EfficiencyReading { Points, Relative };

std::string_view to_string(EfficiencyReading r);
EfficiencyReading efficiency_reading_from_string(std::string_view s);

/// Measured anchors of the prototype: pump activation at −14 dBm, no-pump
/// activation at −9 dBm, 16 % peak with the pump and the no-pump peak per
/// `reading`.
std::vector<Anchor> reference_anchors(EfficiencyReading reading);
std::vector<FreeParam> default_free_params();

}  // namespace harvestsim::calibration
