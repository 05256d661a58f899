#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nfloc/channel.hpp"
#include "nfloc/geometry.hpp"

namespace nfloc {

/// Simulation scenario as read from JSON:
///   {"M": 9, "N": 11, "freq_ghz": 30, "d_mm": 2.5,
///    "targets": [{"theta_deg": -35, "range_m": 10}],
///    "T": 100, "snr_db": 10, "seed": 1, "model": "exact",
///    "dense_spacing_mm": 2.5}
/// d_mm defaults to a quarter wavelength; dense_spacing_mm defaults to d_mm.
struct Scenario {
  int m = 0;
  int n = 0;
  double freq_hz = 30e9;
  double spacing = 0.0;        ///< d [m]
  double dense_spacing = 0.0;  ///< dense baseline spacing [m]
  std::vector<Target> targets;
  std::size_t snapshots = 100;
  double snr_db = 10.0;
  std::uint64_t seed = 1;
  WavefrontModel model = WavefrontModel::exact;

  double wavelength() const { return wavelength_from_frequency(freq_hz); }
  CoprimeParams coprime_params() const { return {m, n, spacing, wavelength()}; }
  SensorLayout coprime_layout() const;
  /// Dense array with the same sensor count as the coprime one.
  SensorLayout dense_layout() const;
  void validate() const;
};

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

/// Four targets at 30 GHz with M=9, N=11, two of them sharing 30 degrees.
Scenario reference_scenario();

}  // namespace nfloc
