#include "nfloc/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace nfloc {

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::dense_nearfield: return "dense";
    case BaselineKind::farfield_virtual: return "farfield";
    case BaselineKind::subarray_nearfield: return "subarray";
  }
  return "unknown";
}

LocalizationResult localize_dense(const SnapshotSet& snapshots, const SensorLayout& dense,
                                  const LocalizerConfig& config) {
  if (dense.kind() != LayoutKind::dense) throw ValidationError("dense baseline needs a dense layout");
  return localize(snapshots, dense, config);
}

namespace {

void require_coprime(const SnapshotSet& snapshots, const SensorLayout& layout) {
  if (layout.kind() != LayoutKind::coprime) throw ValidationError("baseline needs a coprime layout");
  if (snapshots.sensors() != layout.size()) {
    throw ValidationError(fmt::format("snapshots have {} sensors but the layout has {}",
                                      snapshots.sensors(), layout.size()));
  }
}

VirtualSteering virtual_steering(const SensorLayout& layout, const CoarrayLayout& coarray,
                                 std::size_t length, double factor) {
  VirtualSteering s;
  s.length = length;
  s.element_spacing = coarray.step * layout.spacing();
  s.wavelength = layout.wavelength();
  s.phase_factor = factor;
  return s;
}

std::size_t default_candidates(const LocalizerConfig& config, std::size_t window) {
  if (config.max_candidates > 0) return config.max_candidates;
  if (config.num_targets) return static_cast<std::size_t>(*config.num_targets * (*config.num_targets + 1));
  return window - 1;
}

// Rows of `full` that hold the sensors of `sub`.
std::vector<Eigen::Index> sensor_rows(const SensorLayout& full, const SensorLayout& sub) {
  std::vector<Eigen::Index> rows;
  rows.reserve(sub.size());
  for (int idx : sub.indices()) {
    const auto all = full.indices();
    const auto it = std::find(all.begin(), all.end(), idx);
    if (it == all.end()) throw InternalError(fmt::format("subarray sensor {} not in layout", idx));
    rows.push_back(static_cast<Eigen::Index>(it - all.begin()));
  }
  return rows;
}

struct SubarrayState {
  SensorLayout layout;
  CMatrix r_hat;
  Subspace phase2;
  PseudoSpectrum angle;
};

}  // namespace

FarFieldResult localize_farfield_virtual(const SnapshotSet& snapshots, const SensorLayout& layout,
                                         const LocalizerConfig& config) {
  require_coprime(snapshots, layout);
  const CMatrix r = covariance_sample(snapshots);
  const CoarrayLayout coarray = difference_coarray(layout, config.covariance.segment);
  const CVector r_tilde = vectorize_to_coarray(r, layout, coarray, config.covariance.reduction);
  const CMatrix r_virtual = spatial_smooth(r_tilde);
  const std::size_t window = static_cast<std::size_t>(r_virtual.rows());

  SubspaceRule rule = config.phase1_rule.value_or(SubspaceRule::eig_gap(config.eig_gap_ratio, 1));
  if (!config.phase1_rule && config.num_targets) {
    rule = SubspaceRule::fixed(std::clamp(*config.num_targets, 1, static_cast<int>(window) - 1));
  }
  const SpectrumGrid grid = make_grid(layout, config);
  const AngleSpectrum spec =
      angle_spectrum(r_virtual, virtual_steering(layout, coarray, window, 1.0), grid.angles_deg, rule);

  // Classic readout: the K highest local maxima, no prominence filter.
  PeakOptions opts;
  opts.max_count = config.num_targets ? static_cast<std::size_t>(*config.num_targets)
                                      : static_cast<std::size_t>(spec.signal_dim);
  FarFieldResult out;
  out.angle_spectrum = spec.spectrum;
  out.signal_dim = spec.signal_dim;
  for (const Peak& p : detect_peaks(spec.spectrum, opts)) out.angles_deg.push_back(p.location);
  return out;
}

LocalizationResult localize_subarray(const SnapshotSet& snapshots, const SensorLayout& layout,
                                     const LocalizerConfig& config, SubarrayDetail* detail) {
  require_coprime(snapshots, layout);
  const auto [m, n] = layout.coprime_pair();
  const CoprimeParams params{m, n, layout.spacing(), layout.wavelength()};
  auto [first, second] = build_subarrays(params);

  const SpectrumGrid grid = make_grid(layout, config);
  const CMatrix r_full = estimate_covariance(snapshots, config.covariance.estimator);

  std::vector<SubarrayState> parts;
  for (SensorLayout* sub : {&first, &second}) {
    const std::vector<Eigen::Index> rows = sensor_rows(layout, *sub);
    CMatrix r_sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        r_sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r_full(rows[i], rows[j]);
      }
    }
    const CovarianceBundle bundle = build_covariance_bundle(r_sub, *sub, config.covariance);
    const CoarrayLayout coarray = difference_coarray(*sub, config.covariance.segment);
    const std::size_t window = static_cast<std::size_t>(bundle.r_virtual.rows());
    const AngleSpectrum spec =
        angle_spectrum(bundle.r_virtual, virtual_steering(*sub, coarray, window, 2.0),
                       grid.angles_deg, phase1_rule(config, window));
    const EigenPairs eigen = eig_hermitian(r_sub);
    parts.push_back({*sub, r_sub, split_subspace(eigen, phase2_rule(config, sub->size())),
                     spec.spectrum});
  }

  PseudoSpectrum fused = parts[0].angle;
  for (std::size_t g = 0; g < fused.values.size(); ++g) {
    fused.values[g] = std::min(parts[0].angle.values[g], parts[1].angle.values[g]);
  }
  if (detail) *detail = {parts[0].angle, parts[1].angle};

  PeakOptions opts;
  opts.min_prominence_db = config.angle_prominence_db;
  opts.max_count = default_candidates(config, fused.values.size());
  const std::vector<Peak> candidates = detect_peaks(fused, opts);

  LocalizationResult result;
  result.grid = grid;
  result.angle_spectrum = fused;
  result.phase2_signal_dim = parts[0].phase2.signal_dim;
  classify_candidates(
      result, candidates,
      [&](double theta_deg) {
        PseudoSpectrum prod;
        for (const SubarrayState& p : parts) {
          PseudoSpectrum s =
              range_spectrum(p.phase2, p.layout, theta_deg, grid.ranges_m, config.range_model);
          if (prod.values.empty()) {
            prod = std::move(s);
          } else {
            for (std::size_t i = 0; i < prod.values.size(); ++i) prod.values[i] *= s.values[i];
          }
        }
        return prod;
      },
      config);
  return result;
}

}  // namespace nfloc
