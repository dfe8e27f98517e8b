#include "rf_frontend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace harvestsim::rf {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 6.28318530717958647692;

// Z_a ∥ Z_b with an infinite operand treated as open.
cd parallel(cd a, cd b) { return a * b / (a + b); }

struct Candidate {
  double l = 0.0;
  double c = 0.0;
  double gamma = 1.0;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  if (a.l != b.l) return a.l < b.l;
  return a.c < b.c;
}

}  // namespace

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::SeriesLShuntCLoad:
      return "series_l_shunt_c_load";
    case Topology::ShuntCSourceSeriesL:
      return "shunt_c_source_series_l";
  }
  return "?";
}

Topology topology_from_string(std::string_view s) {
  if (s == "series_l_shunt_c_load") return Topology::SeriesLShuntCLoad;
  if (s == "shunt_c_source_series_l") return Topology::ShuntCSourceSeriesL;
  throw DomainError("unknown matching topology '" + std::string(s) + "'");
}

Impedance network_input_impedance(const MatchingNetwork& net, Impedance z_load, double freq_hz) {
  if (!(freq_hz > 0.0)) throw DomainError("network_input_impedance: frequency must be > 0");
  const double w = kTwoPi * freq_hz;
  const cd zl = z_load.complex();
  const cd z_series(0.0, w * net.l_henries);
  const bool has_shunt = net.c_farads > 0.0;
  const cd z_shunt = has_shunt ? cd(0.0, -1.0 / (w * net.c_farads)) : cd(0.0, 0.0);

  cd zin;
  if (net.topology == Topology::SeriesLShuntCLoad) {
    zin = z_series + (has_shunt ? parallel(z_shunt, zl) : zl);
  } else {
    const cd inner = z_series + zl;
    zin = has_shunt ? parallel(z_shunt, inner) : inner;
  }
  return Impedance::from_complex(zin);
}

Reflection reflection_and_return_loss(Impedance z_in, Impedance z0) {
  if (!(z0.resistance > 0.0)) throw DomainError("reflection: reference resistance must be > 0");
  if (std::isinf(z_in.resistance) || std::isinf(z_in.reactance)) return {1.0, 0.0};
  const cd num = z_in.complex() - z0.complex();
  const cd den = z_in.complex() + z0.complex();
  if (std::abs(den) == 0.0) throw DomainError("reflection: z_in = -z0 is degenerate");
  const double g = std::abs(num / den);
  const double rl = g < 1e-5 ? kReturnLossCapDb : -20.0 * std::log10(g);
  return {g, rl};
}

double delivered_power(double p_available_w, double gamma_mag) {
  if (!(gamma_mag >= 0.0 && gamma_mag <= 1.0)) {
    throw DomainError("delivered_power: |Γ| must be in [0, 1]");
  }
  return p_available_w * (1.0 - gamma_mag * gamma_mag);
}

namespace {

class TopologySearch {
 public:
  TopologySearch(Topology topology, Impedance z_load, double freq_hz, Impedance z0)
      : topology_(topology), z_load_(z_load), freq_hz_(freq_hz), z0_(z0) {}

  double gamma(double l, double c) const {
    const auto zin = network_input_impedance({l, c, topology_}, z_load_, freq_hz_);
    return reflection_and_return_loss(zin, z0_).gamma_mag;
  }

  Candidate grid() const {
    // Zero plus a 63-point log grid per axis.
    constexpr int kPoints = 64;
    std::array<double, kPoints> ls{};
    std::array<double, kPoints> cs{};
    for (int i = 1; i < kPoints; ++i) {
      const double frac = static_cast<double>(i - 1) / (kPoints - 2);
      ls[i] = kTuneMaxL * std::pow(1e-3, 1.0 - frac);
      cs[i] = kTuneMaxC * std::pow(1e-3, 1.0 - frac);
    }
    Candidate best{0.0, 0.0, gamma(0.0, 0.0)};
    for (double l : ls) {
      for (double c : cs) {
        const Candidate cand{l, c, gamma(l, c)};
        if (better(cand, best)) best = cand;
      }
    }
    return best;
  }

  // Coordinate descent with a relative step that shrinks to 1e-6.
  Candidate descend(Candidate best) const {
    double step = 0.5;
    while (step > 1e-6) {
      bool moved = false;
      for (int axis = 0; axis < 2; ++axis) {
        for (double dir : {-1.0, 1.0}) {
          Candidate cand = best;
          double& v = axis == 0 ? cand.l : cand.c;
          const double hi = axis == 0 ? kTuneMaxL : kTuneMaxC;
          const double base = v > 0.0 ? v : hi * 1e-3;
          v = std::clamp(v + dir * step * base, 0.0, hi);
          cand.gamma = gamma(cand.l, cand.c);
          if (better(cand, best) && cand.gamma < best.gamma) {
            best = cand;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    return best;
  }

  // Newton on Z_in(L, C) − z0 = 0; only accepted while it stays in bounds and
  // improves |Γ|.
  Candidate polish(Candidate best) const {
    for (int iter = 0; iter < 50 && best.gamma > 1e-14; ++iter) {
      const auto residual = [&](double l, double c) {
        return network_input_impedance({l, c, topology_}, z_load_, freq_hz_).complex() - z0_.complex();
      };
      const double hl = std::max(best.l, 1e-12) * 1e-7;
      const double hc = std::max(best.c, 1e-15) * 1e-7;
      const cd r = residual(best.l, best.c);
      const cd dl = (residual(best.l + hl, best.c) - residual(best.l - hl, best.c)) / (2.0 * hl);
      const cd dc = (residual(best.l, best.c + hc) - residual(best.l, best.c - hc)) / (2.0 * hc);
      const double det = dl.real() * dc.imag() - dc.real() * dl.imag();
      if (det == 0.0 || !std::isfinite(det)) break;
      const double step_l = (r.real() * dc.imag() - dc.real() * r.imag()) / det;
      const double step_c = (dl.real() * r.imag() - r.real() * dl.imag()) / det;
      Candidate cand{best.l - step_l, best.c - step_c, 1.0};
      if (cand.l < 0.0 || cand.c < 0.0 || cand.l > kTuneMaxL || cand.c > kTuneMaxC) break;
      cand.gamma = gamma(cand.l, cand.c);
      if (!(cand.gamma < best.gamma)) break;
      best = cand;
    }
    return best;
  }

 private:
  Topology topology_;
  Impedance z_load_;
  double freq_hz_;
  Impedance z0_;
};

}  // namespace

TuneResult tune(Impedance z_load, double freq_hz, Impedance z0) {
  if (!(z_load.resistance > 0.0) || !std::isfinite(z_load.resistance) || !std::isfinite(z_load.reactance)) {
    throw DomainError("tune: load resistance must be > 0 (non-physical load)");
  }
  if (!(freq_hz > 0.0)) throw DomainError("tune: frequency must be > 0");
  if (!(z0.resistance > 0.0)) throw DomainError("tune: reference resistance must be > 0");

  TuneResult result;
  bool have = false;
  Candidate best_overall;
  for (Topology t : {Topology::SeriesLShuntCLoad, Topology::ShuntCSourceSeriesL}) {
    const TopologySearch search(t, z_load, freq_hz, z0);
    Candidate c = search.grid();
    if (c.gamma > 0.0) c = search.polish(search.descend(c));
    if (!have || better(c, best_overall)) {
      best_overall = c;
      result = {{c.l, c.c, t}, c.gamma};
      have = true;
    }
  }
  if (result.gamma_mag > kUntunableGamma) {
    throw UntunableLoad("tune: untunable load, best |Γ| = " + std::to_string(result.gamma_mag), result);
  }
  return result;
}

}  // namespace harvestsim::rf
