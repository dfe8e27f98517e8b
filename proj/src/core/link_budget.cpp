#include "link_budget.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace harvestsim::link {

double db_convert(double x, DbDirection direction) {
  if (direction == DbDirection::ToDb) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("to_db: input must be positive and finite, got " + std::to_string(x));
    }
    return 10.0 * std::log10(x);
  }
  if (!std::isfinite(x)) throw DomainError("from_db: input must be finite");
  return std::pow(10.0, x / 10.0);
}

double dbm_to_watts(double dbm) { return 1e-3 * from_db(dbm); }

double watts_to_dbm(double watts) { return to_db(watts / 1e-3); }

PowerLevel PowerLevel::watts(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw DomainError("power must be non-negative and finite");
  }
  return PowerLevel(w);
}

double PowerLevel::dbm() const {
  if (!(watts_ > 0.0)) throw DomainError("dBm undefined for zero power");
  return watts_to_dbm(watts_);
}

void LinkParams::validate() const {
  if (!(eirp_w >= 0.0) || !std::isfinite(eirp_w)) throw DomainError("link.eirp: must be >= 0");
  if (!std::isfinite(g_rx_dbi)) throw DomainError("link.g_rx: must be finite");
  if (!(freq_hz > 0.0) || !std::isfinite(freq_hz)) throw DomainError("link.frequency: must be > 0");
  if (!(plf > 0.0 && plf <= 1.0)) throw DomainError("link.plf: must be in (0, 1]");
  if (!(path_loss_exponent >= 0.5) || !std::isfinite(path_loss_exponent)) {
    throw DomainError("link.path_loss_exponent: must be >= 0.5");
  }
  if (!(reference_distance_m > 0.0) || !std::isfinite(reference_distance_m)) {
    throw DomainError("link.reference_distance: must be > 0");
  }
  if (!std::isfinite(excess_loss_db)) throw DomainError("link.excess_loss_db: must be finite");
}

double wavelength(double freq_hz) {
  if (!(freq_hz > 0.0)) throw DomainError("wavelength: frequency must be > 0");
  return kSpeedOfLight / freq_hz;
}

namespace {

// Received power at the reference distance.
double reference_power(const LinkParams& link) {
  const double fs = wavelength(link.freq_hz) / (4.0 * kPi * link.reference_distance_m);
  return link.eirp_w * from_db(link.g_rx_dbi) * link.plf * fs * fs / from_db(link.excess_loss_db);
}

bool is_free_space(const LinkParams& link) {
  return link.path_loss_exponent == 2.0 && link.excess_loss_db == 0.0;
}

}  // namespace

PowerLevel received_power(const LinkParams& link, double distance_m) {
  link.validate();
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
    throw DomainError("received_power: distance must be > 0");
  }
  if (is_free_space(link)) {
    const double fs = wavelength(link.freq_hz) / (4.0 * kPi * distance_m);
    return PowerLevel::watts(link.eirp_w * from_db(link.g_rx_dbi) * link.plf * fs * fs);
  }
  const double scale = std::pow(link.reference_distance_m / distance_m, link.path_loss_exponent);
  return PowerLevel::watts(reference_power(link) * scale);
}

PowerLevel sensitivity_from_activation(double p_tx_on_w, double g_tx_dbi, const LinkParams& link,
                                       double distance_m) {
  if (!(p_tx_on_w > 0.0)) throw DomainError("sensitivity_from_activation: p_tx_on must be > 0");
  LinkParams l = link;
  l.eirp_w = p_tx_on_w * from_db(g_tx_dbi);
  return received_power(l, distance_m);
}

double required_eirp(const LinkParams& link, PowerLevel target, double distance_m) {
  LinkParams unit = link;
  unit.eirp_w = 1.0;
  return target.watts() / received_power(unit, distance_m).watts();
}

double max_range(const LinkParams& link, PowerLevel sensitivity) {
  link.validate();
  if (!(sensitivity.watts() > 0.0)) throw DomainError("max_range: zero sensitivity means infinite range");
  const double p0 = reference_power(link);
  if (!(p0 > 0.0)) throw DomainError("max_range: eirp·G_rx·plf must be > 0");
  if (is_free_space(link)) {
    const double amp = std::sqrt(link.eirp_w * from_db(link.g_rx_dbi) * link.plf / sensitivity.watts());
    return wavelength(link.freq_hz) / (4.0 * kPi) * amp;
  }
  return link.reference_distance_m * std::pow(p0 / sensitivity.watts(), 1.0 / link.path_loss_exponent);
}

double range_ratio(double delta_db, double path_loss_exponent) {
  if (!(path_loss_exponent > 0.0)) throw DomainError("range_ratio: exponent must be > 0");
  return std::pow(10.0, delta_db / (10.0 * path_loss_exponent));
}

double exponent_for_range_ratio(double delta_db, double ratio) {
  if (!(ratio > 0.0) || ratio == 1.0) throw DomainError("exponent_for_range_ratio: ratio must be > 0 and != 1");
  return delta_db / (10.0 * std::log10(ratio));
}

double fit_excess_loss_db(LinkParams link, PowerLevel sensitivity, double target_range_m) {
  if (!(target_range_m > 0.0)) throw DomainError("fit_excess_loss_db: target range must be > 0");
  link.excess_loss_db = 0.0;
  const double p_target = received_power(link, target_range_m).watts();
  if (!(sensitivity.watts() > 0.0)) throw DomainError("fit_excess_loss_db: sensitivity must be > 0");
  return to_db(p_target / sensitivity.watts());
}

}  // namespace harvestsim::link
