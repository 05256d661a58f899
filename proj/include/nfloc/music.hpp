#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nfloc/channel.hpp"
#include "nfloc/covariance.hpp"
#include "nfloc/geometry.hpp"
#include "nfloc/types.hpp"

namespace nfloc {

// ---------------------------------------------------------------------------
// Eigen-subspaces

/// Eigenvalues in descending order with matching eigenvector columns.
struct EigenPairs {
  RVector values;
  CMatrix vectors;
};

/// Decomposes (A + A^H)/2. Throws ValidationError for non-square input, non-finite
/// entries, or an anti-Hermitian part above 1e-9 * |trace|.
EigenPairs eig_hermitian(const CMatrix& a);

struct SubspaceRule {
  enum class Kind { fixed, eig_gap };
  Kind kind = Kind::eig_gap;
  int signal_dim = 1;          ///< used by `fixed`
  double min_gap_ratio = 10.0; ///< `eig_gap` needs lambda_k / lambda_{k+1} above this
  int fallback_signal_dim = 1; ///< `eig_gap` result when no gap qualifies

  static SubspaceRule fixed(int k) { return {Kind::fixed, k, 0.0, k}; }
  static SubspaceRule eig_gap(double ratio, int fallback) {
    return {Kind::eig_gap, fallback, ratio, fallback};
  }
};

struct Subspace {
  CMatrix signal;
  CMatrix noise;
  int signal_dim = 0;
};

/// Splits eigenvectors into signal (largest) and noise (smallest) parts.
Subspace split_subspace(const EigenPairs& pairs, const SubspaceRule& rule);

/// Noise-subspace basis only.
CMatrix noise_subspace(const EigenPairs& pairs, const SubspaceRule& rule);

// ---------------------------------------------------------------------------
// Spectra and peaks

struct SpectrumGrid {
  std::vector<double> angles_deg;
  std::vector<double> ranges_m;

  /// Open interval (lo, hi) sampled at `step` from lo + step.
  static std::vector<double> angle_axis(double step_deg, double lo = -90.0, double hi = 90.0);
  /// Closed interval [lo, hi]; the last point is hi even if the step does not divide.
  static std::vector<double> range_axis(double lo, double hi, double step);
  void validate() const;
};

struct Peak {
  std::size_t index = 0;     ///< grid index of the sampled maximum
  double location = 0.0;     ///< refined axis value
  double value_db = 0.0;     ///< refined height
  double prominence_db = 0.0;
};

/// MUSIC pseudospectrum. Values are normalised so a probe orthogonal to the
/// signal subspace maps to 1 (0 dB): value = |v|^2 / |P_noise v|^2.
struct PseudoSpectrum {
  std::vector<double> axis;
  std::vector<double> values;

  std::vector<double> db() const;
};

struct PeakOptions {
  std::size_t max_count = 0;      ///< 0 = unlimited
  double min_prominence_db = 0.0;
  bool include_edges = false;     ///< endpoint maxima count as peaks
  bool refine = true;             ///< 3-point parabolic refinement in dB
};

/// Local maxima sorted by height (ties by ascending location), truncated to max_count.
std::vector<Peak> detect_peaks(const PseudoSpectrum& spectrum, const PeakOptions& options);

/// Uniform virtual (coarray) subarray used by the angle scan:
/// element m = exp(-j * 2*pi/lambda * phase_factor * m * element_spacing * sin(theta)).
struct VirtualSteering {
  std::size_t length = 0;
  double element_spacing = 0.0;
  double wavelength = 0.0;
  double phase_factor = 2.0;

  CVector at(double theta) const;
};

struct AngleSpectrum {
  PseudoSpectrum spectrum;
  EigenPairs eigen;
  int signal_dim = 0;
};

/// 1 / (a^H U_n U_n^H a / |a|^2) over `angles_deg`.
AngleSpectrum angle_spectrum(const CMatrix& r_virtual, const VirtualSteering& steering,
                             std::span<const double> angles_deg, const SubspaceRule& rule);

/// Same, with the subspace already split.
PseudoSpectrum angle_spectrum(const Subspace& subspace, const VirtualSteering& steering,
                              std::span<const double> angles_deg);

/// 1 / (b^H U_n U_n^H b / |b|^2) over `ranges_m` at a fixed angle.
PseudoSpectrum range_spectrum(const Subspace& subspace, const SensorLayout& layout,
                              double theta_deg, std::span<const double> ranges_m,
                              WavefrontModel model = WavefrontModel::fresnel);

/// Projection energies through the dispatching SIMD kernel. Returns, per probe
/// column, |P_noise v|^2 / |v|^2 using whichever basis is smaller.
std::vector<double> normalized_noise_projection(const Subspace& subspace, const CMatrix& probes);

// ---------------------------------------------------------------------------
// Two-phase localisation

struct LocalizerConfig {
  std::optional<int> num_targets;  ///< declared K; unset = unknown
  double angle_step_deg = 0.05;
  double range_step_m = 0.1;
  std::size_t min_range_points = 200;
  /// Search region for ranges; defaults to [Z_F, Z_R] of the layout.
  std::optional<std::pair<double, double>> range_bounds;

  std::optional<SubspaceRule> phase1_rule;  ///< default: K(K+1)/2 if K known, else eig gap
  std::optional<SubspaceRule> phase2_rule;  ///< default: K if K known, else eig gap
  double eig_gap_ratio = 10.0;

  std::size_t max_candidates = 0;           ///< 0 = K(K+1) if K known, else window - 1
  double angle_prominence_db = 3.0;
  double range_prominence_db = 1.0;  ///< secondary range peaks only
  double significance_db = 10.0;
  double merge_angle_deg = 0.25;
  double merge_range_m = 0.5;

  WavefrontModel range_model = WavefrontModel::fresnel;
  CovarianceOptions covariance;
};

enum class Label { true_target, cross };
const char* to_string(Label label);

struct ClassifiedTarget {
  double theta_deg = 0.0;
  double range_m = 0.0;
  Label label = Label::cross;
  double significance_db = 0.0;
  std::size_t candidate = 0;  ///< index into LocalizationResult::candidates
};

struct CandidateReport {
  double theta_deg = 0.0;
  double angle_value_db = 0.0;
  PseudoSpectrum range_spectrum;
  std::vector<Peak> range_peaks;
};

struct LocalizationResult {
  SpectrumGrid grid;
  PseudoSpectrum angle_spectrum;
  std::vector<CandidateReport> candidates;
  std::vector<ClassifiedTarget> classified;
  RVector phase1_eigenvalues;
  int phase1_signal_dim = 0;
  RVector phase2_eigenvalues;
  int phase2_signal_dim = 0;

  std::vector<double> candidate_angles() const;
  /// True-labelled targets in classification order.
  std::vector<ClassifiedTarget> true_targets() const;
};

SpectrumGrid make_grid(const SensorLayout& layout, const LocalizerConfig& config);

SubspaceRule phase1_rule(const LocalizerConfig& config, std::size_t window);
SubspaceRule phase2_rule(const LocalizerConfig& config, std::size_t sensors);

/// Maps an angle [deg] to a range pseudospectrum.
using RangeSpectrumFn = std::function<PseudoSpectrum(double theta_deg)>;

/// Phase 2 decision for every candidate: significant range peaks inside the
/// search region become true targets, candidates without one are cross angles.
/// With K declared the K most significant hypotheses are kept.
void classify_candidates(LocalizationResult& result, std::span<const Peak> angle_peaks,
                         const RangeSpectrumFn& range_fn, const LocalizerConfig& config);

/// Phase 2 on an initial covariance estimate.
LocalizationResult classify_and_estimate(std::span<const Peak> candidates, const CMatrix& r_hat,
                                         const SensorLayout& layout, const SpectrumGrid& grid,
                                         const LocalizerConfig& config);

/// Coarray -> decouple -> smooth -> angle MUSIC -> range MUSIC.
LocalizationResult localize(const SnapshotSet& snapshots, const SensorLayout& layout,
                            const LocalizerConfig& config = {});

/// Same pipeline from a covariance estimate.
LocalizationResult localize_covariance(const CMatrix& r_hat, const SensorLayout& layout,
                                       const LocalizerConfig& config = {});

}  // namespace nfloc
