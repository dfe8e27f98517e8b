#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calibration.hpp"
#include "sim_harness.hpp"

namespace harvestsim::config {

inline constexpr int kVersion = 1;

struct Config {
  harness::Scenario scenario;
  std::optional<harness::SweepSpec> sweep;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Parses and validates a config document. Every failure is a ConfigError
/// whose message starts with the offending key path.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

/// Writes quantities in readable units, chosen so that parse_config gives
/// back bit-identical values.
std::string dump_config(const Config& c);
void save_config(const Config& c, const std::string& path);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
Config preset(std::string_view name);

struct AnchorSet {
  std::vector<calibration::Anchor> anchors;
  std::vector<calibration::FreeParam> free = calibration::default_free_params();
  std::optional<double> freq_hz;
};

AnchorSet parse_anchors(std::string_view text);
AnchorSet load_anchors(const std::string& path);
std::string dump_anchors(const AnchorSet& a);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// The preset with its fitted constants (loss factor, effective input
/// resistance, pump input resistance, efficiency load, excess path loss)
/// left at their uncalibrated defaults.
Config preset_before_calibration(std::string_view name);

}  // namespace harvestsim::config
