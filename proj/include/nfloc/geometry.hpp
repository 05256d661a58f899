#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfloc/types.hpp"

namespace nfloc {

/// How an inter-sensor spacing above a quarter wavelength is treated.
enum class SpacingCheck { warn, strict };

struct CoprimeParams {
  int m = 0;
  int n = 0;
  double spacing = 0.0;     ///< minimum inter-sensor spacing d [m]
  double wavelength = 0.0;  ///< carrier wavelength [m]
};

enum class LayoutKind { coprime, dense, sparse_subarray };

const char* to_string(LayoutKind kind);

/// Linear array whose sensors sit on an integer grid of step `spacing`.
///
/// Positions are kept as signed grid indices so that coarray arithmetic is
/// exact; physical positions are index * spacing.
class SensorLayout {
 public:
  SensorLayout(std::vector<int> indices, double spacing, double wavelength, LayoutKind kind,
               int basic_count = 0);

  /// Builds a layout from physical positions [m]; each must lie on the
  /// `spacing` grid within 1e-9 * spacing, otherwise ValidationError.
  static SensorLayout from_positions(std::span<const double> positions, double spacing,
                                     double wavelength, LayoutKind kind);

  std::size_t size() const { return indices_.size(); }
  std::span<const int> indices() const { return indices_; }
  int index(std::size_t i) const { return indices_[i]; }
  double position(std::size_t i) const { return indices_[i] * spacing_; }
  std::vector<double> positions() const;

  double spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }
  LayoutKind kind() const { return kind_; }
  /// Sensor count V of the one-sided basic coprime array (0 for other kinds).
  int basic_count() const { return basic_count_; }

  double aperture() const;
  double fresnel_distance() const { return 1.2 * aperture(); }
  double rayleigh_distance() const;

  /// positions[i] == -positions[U-1-i] for every sensor (0-based).
  bool is_symmetric() const;
  /// 0-based index of the sensor mirrored through the array centre.
  std::size_t mirror(std::size_t i) const { return indices_.size() - 1 - i; }

  /// Coprime pair the layout was built from, {0, 0} otherwise.
  std::pair<int, int> coprime_pair() const { return coprime_; }
  void set_coprime_pair(int m, int n) { coprime_ = {m, n}; }

  /// Non-fatal findings gathered at construction (e.g. spacing above lambda/4).
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  void add_diagnostic(std::string message) { diagnostics_.push_back(std::move(message)); }

 private:
  std::vector<int> indices_;
  double spacing_;
  double wavelength_;
  LayoutKind kind_;
  int basic_count_;
  std::pair<int, int> coprime_{0, 0};
  std::vector<std::string> diagnostics_;
};

/// Validates and normalises (M < N) coprime parameters. Throws ValidationError
/// on non-coprime or non-positive inputs; spacing above lambda/4 is reported
/// through `diagnostic` unless `check` is strict.
CoprimeParams normalize(CoprimeParams params, SpacingCheck check = SpacingCheck::warn,
                        std::string* diagnostic = nullptr);

SensorLayout build_coprime_layout(const CoprimeParams& params,
                                  SpacingCheck check = SpacingCheck::warn);

/// Uniform symmetric array of `count` sensors (odd) at `spacing`.
SensorLayout build_dense_layout(int count, double spacing, double wavelength);

/// The two uniform sparse subarrays of a symmetric coprime array: (2M-1)
/// sensors at N*d and (2N-1) sensors at M*d. Indices stay in units of d.
std::pair<SensorLayout, SensorLayout> build_subarrays(const CoprimeParams& params,
                                                      SpacingCheck check = SpacingCheck::warn);

enum class SegmentPolicy {
  central,   ///< central 2MN+1 lags for coprime layouts, full run otherwise
  full_run,  ///< the whole zero-centred consecutive run
};

struct CoarrayLayout {
  std::vector<int> lags;          ///< sorted unique differences, units of d
  std::vector<int> multiplicity;  ///< generating (m, n) pairs per lag
  int step = 1;                   ///< lag grid step in units of d (gcd of positions)
  int run_half_width = 0;         ///< consecutive run covers [-w, w] * step
  int segment_half_width = 0;     ///< smoothing segment covers [-h, h] * step

  std::size_t segment_length() const { return 2 * static_cast<std::size_t>(segment_half_width) + 1; }
  std::size_t run_length() const { return 2 * static_cast<std::size_t>(run_half_width) + 1; }
  int multiplicity_of(int lag) const;
};

CoarrayLayout difference_coarray(const SensorLayout& layout,
                                 SegmentPolicy policy = SegmentPolicy::central);

struct TargetCapacity {
  int virtual_array = 0;  ///< K_v of the decoupled coarray method
  int subarray = 0;       ///< K_p of the subarray method
};

/// Largest K with K + K(K-1)/2 <= MN+1, alongside min(M, N).
TargetCapacity max_targets(int m, int n);

}  // namespace nfloc
