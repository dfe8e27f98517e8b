#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvester.hpp"
#include "link_budget.hpp"
#include "power_chain.hpp"

namespace harvestsim::harness {

/// One end-to-end configuration. The receive gain of `link` is ignored in
/// favour of `harvester.antenna.gain_dbi`.
struct Scenario {
  std::string name = "scenario";
  link::LinkParams link;
  double g_tx_dbi = 0.0;
  double distance_m = 1.0;
  harvester::HarvesterModel harvester;
  chain::Variant variant = chain::Variant::WithPump;
  double dt = 1e-4;
  double duration_s = 300.0;

  void validate() const;
  link::LinkParams effective_link() const;
  double available_power_w() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

enum class Axis { Distance, Frequency, TxPower };

std::string_view to_string(Axis a);
Axis axis_from_string(std::string_view s);

/// Axis units: metres, hertz, transmitter power in watts (EIRP = P·G_tx).
struct SweepSpec {
  Axis axis = Axis::Distance;
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  void validate() const;
  std::vector<double> points() const;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

Scenario with_axis_value(const Scenario& s, Axis axis, double value);

struct Summary {
  double rate_hz = 0.0;
  std::size_t releases = 0;
  std::size_t logs = 0;
  std::size_t brownouts = 0;
  double cycle_input_j = 0.0;  ///< per steady-state cycle
  double cycle_load_j = 0.0;
  double received_dbm = 0.0;
  double v_rect = 0.0;
  bool activated = false;
  bool sustained = false;  ///< load never disconnected once released
  double simulated_s = 0.0;
};

struct RunResult {
  chain::ChainState final;
  Summary summary;
};

/// Integrates the scenario until a steady-state rate is measurable (five
/// releases, or a sustained log loop) or the duration runs out. The rate is
/// taken over the trailing three release-to-release cycles, skipping the
/// cold start.
RunResult run_scenario(const Scenario& s);

struct Row {
  double axis = 0.0;
  chain::Variant variant = chain::Variant::WithPump;
  double received_dbm = 0.0;
  double v_rect_v = 0.0;
  double eta = 0.0;
  double rate_hz = 0.0;
  std::size_t events = 0;
  double sensitivity_dbm = 0.0;
  double activation_eirp_dbm = 0.0;
  std::string status = "ok";  ///< "ok" or the per-point error

  friend bool operator==(const Row&, const Row&) = default;
};

struct ResultTable {
  Axis axis = Axis::Distance;
  std::vector<Row> rows;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

Row evaluate_point(const Scenario& s);

/// One row per axis point in axis order. `jobs` <= 0 uses every core.
ResultTable sweep(const Scenario& s, const SweepSpec& spec, int jobs = 1);

struct VariantMetrics {
  double threshold_dbm = 0.0;
  double max_range_m = 0.0;           ///< where received power meets the threshold
  std::optional<double> last_active;  ///< last swept axis value with rate > 0
  std::optional<double> best_axis;    ///< axis value with the lowest activation EIRP
};

struct Comparison {
  ResultTable table;  ///< rows interleaved per axis value: WithPump, NoPump
  VariantMetrics pump;
  VariantMetrics reference;
  double sensitivity_gap_db = 0.0;
  double range_ratio = 1.0;
  std::optional<double> crossover;  ///< axis value where the pump overtakes the reference
};

/// Interpolated axis value where curve `b` first catches up with `a` after
/// `a` led. Both curves are sampled on the same axis.
std::optional<double> find_crossover(const std::vector<double>& axis, const std::vector<double>& a,
                                     const std::vector<double>& b);

Comparison compare_variants(const Scenario& s, const SweepSpec& spec, int jobs = 1);

/// Frequency in [lo, hi] minimising the EIRP needed to activate at s.distance_m.
double activation_minimum_frequency(const Scenario& s, double lo_hz, double hi_hz, double step_hz);

std::string to_csv(const ResultTable& t);
std::string events_csv(const chain::ChainState& s);
std::string format_number(double v);

}  // namespace harvestsim::harness
