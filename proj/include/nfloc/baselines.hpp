#pragma once

#include <string>
#include <vector>

#include "nfloc/channel.hpp"
#include "nfloc/geometry.hpp"
#include "nfloc/music.hpp"

namespace nfloc {

enum class BaselineKind { dense_nearfield, farfield_virtual, subarray_nearfield };

const char* to_string(BaselineKind kind);

/// The decoupled two-phase pipeline run unchanged on a dense symmetric array.
/// Decoupling only needs symmetry, so this is `localize` on a dense layout;
/// set config.range_bounds to compare on a common search region.
LocalizationResult localize_dense(const SnapshotSet& snapshots, const SensorLayout& dense,
                                  const LocalizerConfig& config = {});

struct FarFieldResult {
  PseudoSpectrum angle_spectrum;
  std::vector<double> angles_deg;  ///< K (or fewer) strongest peaks, by height
  int signal_dim = 0;
};

/// Classic virtual-array processing: sample covariance, coarray vectorisation
/// without decoupling, spatial smoothing and angle MUSIC. No range output.
FarFieldResult localize_farfield_virtual(const SnapshotSet& snapshots, const SensorLayout& layout,
                                         const LocalizerConfig& config = {});

struct SubarrayDetail {
  PseudoSpectrum angle_first;   ///< 2M-1 sensors at stride N
  PseudoSpectrum angle_second;  ///< 2N-1 sensors at stride M
};

/// Decoupled pipeline on each uniform subarray separately. Angle spectra are
/// fused by element-wise minimum and range spectra by product.
LocalizationResult localize_subarray(const SnapshotSet& snapshots, const SensorLayout& layout,
                                     const LocalizerConfig& config = {},
                                     SubarrayDetail* detail = nullptr);

}  // namespace nfloc
