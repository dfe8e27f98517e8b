#pragma once

#include <complex>
#include <string_view>

#include "errors.hpp"

namespace harvestsim::rf {

/// Complex impedance R + jX in ohms.
struct Impedance {
  double resistance = 0.0;
  double reactance = 0.0;

  std::complex<double> complex() const { return {resistance, reactance}; }
  static Impedance from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }

  friend bool operator==(const Impedance&, const Impedance&) = default;
};

enum class Topology {
  /// Shunt C across the load, series L toward the source.
  SeriesLShuntCLoad,
  /// Series L at the load, shunt C across the source port.
  ShuntCSourceSeriesL,
};

std::string_view to_string(Topology t);
Topology topology_from_string(std::string_view s);

struct MatchingNetwork {
  double l_henries = 0.0;
  double c_farads = 0.0;
  Topology topology = Topology::SeriesLShuntCLoad;

  friend bool operator==(const MatchingNetwork&, const MatchingNetwork&) = default;
};

struct AntennaModel {
  double gain_dbi = 0.0;
  Impedance z0{50.0, 0.0};

  friend bool operator==(const AntennaModel&, const AntennaModel&) = default;
};

/// Impedance seen looking into the network from the antenna side.
/// C = 0 is an open shunt.
Impedance network_input_impedance(const MatchingNetwork& net, Impedance z_load, double freq_hz);

struct Reflection {
  double gamma_mag = 0.0;
  double return_loss_db = 0.0;
};

inline constexpr double kReturnLossCapDb = 100.0;

/// |Γ| and return loss of `z_in` against `z0`. An infinite resistance is an
/// open circuit (|Γ| = 1). Return loss is capped at 100 dB when |Γ| < 1e-5.
Reflection reflection_and_return_loss(Impedance z_in, Impedance z0);

/// Power reaching the load through a lossless network: p·(1 − |Γ|²).
double delivered_power(double p_available_w, double gamma_mag);

struct TuneResult {
  MatchingNetwork network;
  double gamma_mag = 1.0;
};

/// Search bounds for the tuner.
inline constexpr double kTuneMaxL = 100e-9;
inline constexpr double kTuneMaxC = 100e-12;
/// Best |Γ| above this is reported as an untunable load.
inline constexpr double kUntunableGamma = 0.1;

/// Thrown by tune(); carries the best network found.
class UntunableLoad : public Error {
 public:
  UntunableLoad(const std::string& what, TuneResult best) : Error(what), best_(best) {}
  const TuneResult& best() const noexcept { return best_; }

 private:
  TuneResult best_;
};

/// Finds L ∈ [0, 100 nH], C ∈ [0, 100 pF] and a topology minimising |Γ| at
/// `freq_hz`. Deterministic: on equal |Γ| the lower L, then the lower C wins.
TuneResult tune(Impedance z_load, double freq_hz, Impedance z0 = {50.0, 0.0});

}  // namespace harvestsim::rf
