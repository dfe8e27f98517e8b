#pragma once

// Power and propagation arithmetic. Everything internal is linear watts;
// dB/dBm only appear at the edges.

namespace harvestsim::link {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact
inline constexpr double kPi = 3.14159265358979323846;

enum class DbDirection { ToDb, FromDb };

/// 10·log10(x) or 10^(x/10). ToDb requires x > 0.
double db_convert(double x, DbDirection direction);

inline double to_db(double ratio) { return db_convert(ratio, DbDirection::ToDb); }
inline double from_db(double db) { return db_convert(db, DbDirection::FromDb); }
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// A non-negative power in watts.
class PowerLevel {
 public:
  PowerLevel() = default;
  static PowerLevel watts(double w);
  static PowerLevel dbm(double dbm) { return PowerLevel(dbm_to_watts(dbm)); }

  double watts() const noexcept { return watts_; }
  /// Throws DomainError for a zero power.
  double dbm() const;

  friend bool operator==(const PowerLevel&, const PowerLevel&) = default;

 private:
  explicit PowerLevel(double w) : watts_(w) {}
  double watts_ = 0.0;
};

/// One radio link toward the harvester antenna.
///
/// Received power follows a log-distance law anchored at the free-space value
/// at `reference_distance_m`:
///
///   P(d) = eirp · G_rx · plf · (λ / 4π d0)² · (d0 / d)^n / L_excess
///
/// With n = 2 and no excess loss this is the plain Friis equation and d0
/// drops out.
struct LinkParams {
  double eirp_w = 0.0;
  double g_rx_dbi = 0.0;
  double freq_hz = 866.5e6;
  double plf = 1.0;
  double path_loss_exponent = 2.0;
  double reference_distance_m = 1.0;
  double excess_loss_db = 0.0;

  /// Throws DomainError naming the offending field.
  void validate() const;

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

double wavelength(double freq_hz);

PowerLevel received_power(const LinkParams& link, double distance_m);

/// Available power at the harvester when a transmitter of `p_tx_on_w` watts
/// behind a `g_tx_dbi` antenna sits at `distance_m`: the EIRP of `link` is
/// replaced by p_tx_on·G_tx.
PowerLevel sensitivity_from_activation(double p_tx_on_w, double g_tx_dbi, const LinkParams& link,
                                       double distance_m);

/// EIRP needed for `target` to arrive at `distance_m` (eirp of `link` ignored).
double required_eirp(const LinkParams& link, PowerLevel target, double distance_m);

/// Distance at which received power falls to `sensitivity`.
double max_range(const LinkParams& link, PowerLevel sensitivity);

/// Ratio of ranges for two sensitivities `delta_db` apart: 10^(Δ/(10 n)).
double range_ratio(double delta_db, double path_loss_exponent);

/// The exponent n for which a `delta_db` sensitivity gap yields `ratio`.
double exponent_for_range_ratio(double delta_db, double ratio);

/// Excess loss (dB) that puts max_range(link, sensitivity) at `target_range_m`.
double fit_excess_loss_db(LinkParams link, PowerLevel sensitivity, double target_range_m);

}  // namespace harvestsim::link
