#include "nfloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "nfloc/types.hpp"

namespace nfloc {

const char* to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::coprime: return "coprime";
    case LayoutKind::dense: return "dense";
    case LayoutKind::sparse_subarray: return "sparse-subarray";
  }
  return "unknown";
}

SensorLayout::SensorLayout(std::vector<int> indices, double spacing, double wavelength,
                           LayoutKind kind, int basic_count)
    : indices_(std::move(indices)),
      spacing_(spacing),
      wavelength_(wavelength),
      kind_(kind),
      basic_count_(basic_count) {
  if (indices_.empty()) throw ValidationError("layout needs at least one sensor");
  if (!(spacing_ > 0.0) || !(wavelength_ > 0.0)) {
    throw ValidationError("spacing and wavelength must be positive");
  }
  if (!std::is_sorted(indices_.begin(), indices_.end()) ||
      std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw ValidationError("sensor positions must be strictly ascending");
  }
}

SensorLayout SensorLayout::from_positions(std::span<const double> positions, double spacing,
                                          double wavelength, LayoutKind kind) {
  if (!(spacing > 0.0)) throw ValidationError("spacing must be positive");
  std::vector<int> indices;
  indices.reserve(positions.size());
  for (double p : positions) {
    const double k = std::round(p / spacing);
    if (std::abs(p - k * spacing) > 1e-9 * spacing) {
      throw ValidationError(fmt::format("position {} m is not on the {} m grid", p, spacing));
    }
    indices.push_back(static_cast<int>(k));
  }
  return SensorLayout(std::move(indices), spacing, wavelength, kind);
}

std::vector<double> SensorLayout::positions() const {
  std::vector<double> out(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) out[i] = position(i);
  return out;
}

double SensorLayout::aperture() const {
  return (indices_.back() - indices_.front()) * spacing_;
}

double SensorLayout::rayleigh_distance() const {
  const double d = aperture();
  return 2.0 * d * d / wavelength_;
}

bool SensorLayout::is_symmetric() const {
  const std::size_t u = indices_.size();
  for (std::size_t i = 0; i < u; ++i) {
    if (indices_[i] != -indices_[u - 1 - i]) return false;
  }
  return true;
}

CoprimeParams normalize(CoprimeParams params, SpacingCheck check, std::string* diagnostic) {
  if (params.m <= 0 || params.n <= 0) throw ValidationError("M and N must be positive");
  if (!(params.spacing > 0.0) || !(params.wavelength > 0.0)) {
    throw ValidationError("spacing and wavelength must be positive");
  }
  if (std::gcd(params.m, params.n) != 1) {
    throw ValidationError(fmt::format("M={} and N={} are not coprime", params.m, params.n));
  }
  if (params.m == params.n) throw ValidationError("M and N must differ");
  if (params.m > params.n) std::swap(params.m, params.n);

  // Small relative slack so that d computed as lambda/4 passes.
  if (params.spacing > params.wavelength / 4.0 * (1.0 + 1e-12)) {
    const std::string msg =
        fmt::format("spacing {} m exceeds lambda/4 = {} m; angle estimates may alias",
                    params.spacing, params.wavelength / 4.0);
    if (check == SpacingCheck::strict) throw ValidationError(msg);
    if (diagnostic) *diagnostic = msg;
  }
  return params;
}

SensorLayout build_coprime_layout(const CoprimeParams& raw, SpacingCheck check) {
  std::string diagnostic;
  const CoprimeParams p = normalize(raw, check, &diagnostic);
  std::set<int> grid;
  for (int n = -p.n + 1; n <= p.n - 1; ++n) grid.insert(p.m * n);
  for (int m = -p.m + 1; m <= p.m - 1; ++m) grid.insert(p.n * m);

  SensorLayout layout(std::vector<int>(grid.begin(), grid.end()), p.spacing, p.wavelength,
                      LayoutKind::coprime, p.m + p.n - 1);
  layout.set_coprime_pair(p.m, p.n);
  if (!diagnostic.empty()) layout.add_diagnostic(diagnostic);
  if (layout.size() != static_cast<std::size_t>(2 * layout.basic_count() - 1)) {
    throw InternalError("coprime layout does not have 2V-1 sensors");
  }
  return layout;
}

SensorLayout build_dense_layout(int count, double spacing, double wavelength) {
  if (count <= 0 || count % 2 == 0) {
    throw ValidationError(fmt::format("dense layout needs an odd sensor count, got {}", count));
  }
  const int half = (count - 1) / 2;
  std::vector<int> indices(count);
  std::iota(indices.begin(), indices.end(), -half);
  return SensorLayout(std::move(indices), spacing, wavelength, LayoutKind::dense);
}

namespace {

SensorLayout uniform_sparse(int count_one_side, int stride, const CoprimeParams& p) {
  std::vector<int> indices;
  for (int k = -count_one_side + 1; k <= count_one_side - 1; ++k) indices.push_back(k * stride);
  SensorLayout layout(std::move(indices), p.spacing, p.wavelength, LayoutKind::sparse_subarray);
  layout.set_coprime_pair(p.m, p.n);
  return layout;
}

}  // namespace

std::pair<SensorLayout, SensorLayout> build_subarrays(const CoprimeParams& raw,
                                                      SpacingCheck check) {
  const CoprimeParams p = normalize(raw, check);
  return {uniform_sparse(p.m, p.n, p), uniform_sparse(p.n, p.m, p)};
}

int CoarrayLayout::multiplicity_of(int lag) const {
  const auto it = std::lower_bound(lags.begin(), lags.end(), lag);
  if (it == lags.end() || *it != lag) return 0;
  return multiplicity[static_cast<std::size_t>(it - lags.begin())];
}

CoarrayLayout difference_coarray(const SensorLayout& layout, SegmentPolicy policy) {
  std::map<int, int> counts;
  int step = 0;
  for (int a : layout.indices()) {
    step = std::gcd(step, a);
    for (int b : layout.indices()) ++counts[a - b];
  }
  if (step == 0) step = 1;  // single sensor at the origin

  CoarrayLayout out;
  out.step = step;
  out.lags.reserve(counts.size());
  out.multiplicity.reserve(counts.size());
  for (const auto& [lag, count] : counts) {
    out.lags.push_back(lag);
    out.multiplicity.push_back(count);
  }

  int w = 0;
  while (counts.contains((w + 1) * step) && counts.contains(-(w + 1) * step)) ++w;
  out.run_half_width = w;
  out.segment_half_width = w;

  const auto [m, n] = layout.coprime_pair();
  if (policy == SegmentPolicy::central && layout.kind() == LayoutKind::coprime && m > 0) {
    if (w < m * n) {
      throw InternalError(fmt::format(
          "coprime coarray run half-width {} is shorter than MN = {}", w, m * n));
    }
    out.segment_half_width = m * n;
  }
  return out;
}

TargetCapacity max_targets(int m, int n) {
  if (m <= 0 || n <= 0) throw ValidationError("M and N must be positive");
  const long budget = static_cast<long>(m) * n + 1;
  long k = static_cast<long>(std::floor(std::sqrt(2.0 * m * n + 2.25) - 0.5));
  // Guard the floating-point floor against off-by-one at exact squares.
  while (k > 0 && k * (k + 1) / 2 > budget) --k;
  while ((k + 1) * (k + 2) / 2 <= budget) ++k;
  return {static_cast<int>(k), std::min(m, n)};
}

}  // namespace nfloc
