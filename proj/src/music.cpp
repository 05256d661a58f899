#include "nfloc/music.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "nfloc/kernels.hpp"

namespace nfloc {

// ---------------------------------------------------------------------------
// Eigen-subspaces

EigenPairs eig_hermitian(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("eigendecomposition needs a square matrix");
  if (!a.allFinite()) throw ValidationError("matrix has non-finite entries");
  const double scale = std::abs(a.trace());
  const double skew = (a - a.adjoint()).norm() / 2.0;
  if (skew > 1e-9 * scale && skew > 0.0) {
    throw ValidationError(fmt::format("matrix is not Hermitian (skew part {:.3e})", skew));
  }
  const CMatrix h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw InternalError("Hermitian eigensolver did not converge");

  // Eigen returns ascending order.
  const Eigen::Index n = a.rows();
  EigenPairs out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  (void)n;
  return out;
}

namespace {

int choose_signal_dim(const EigenPairs& pairs, const SubspaceRule& rule) {
  const int n = static_cast<int>(pairs.values.size());
  if (rule.kind == SubspaceRule::Kind::fixed) {
    if (rule.signal_dim < 0 || rule.signal_dim >= n) {
      throw ValidationError(
          fmt::format("fixed signal dimension {} must lie in [0, {})", rule.signal_dim, n));
    }
    return rule.signal_dim;
  }
  const int fallback = std::clamp(rule.fallback_signal_dim, 0, std::max(n - 1, 0));
  if (n < 2) return fallback;
  const double top = std::max(pairs.values[0], 0.0);
  const double floor = std::max(top * 1e-14, std::numeric_limits<double>::min());
  int best = -1;
  double best_ratio = 0.0;
  for (int k = 1; k < n; ++k) {
    const double hi = std::max(pairs.values[k - 1], floor);
    const double lo = std::max(pairs.values[k], floor);
    const double ratio = hi / lo;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  return (best > 0 && best_ratio >= rule.min_gap_ratio) ? best : fallback;
}

}  // namespace

Subspace split_subspace(const EigenPairs& pairs, const SubspaceRule& rule) {
  const int k = choose_signal_dim(pairs, rule);
  const Eigen::Index n = pairs.vectors.cols();
  Subspace out;
  out.signal_dim = k;
  out.signal = pairs.vectors.leftCols(k);
  out.noise = pairs.vectors.rightCols(n - k);
  return out;
}

CMatrix noise_subspace(const EigenPairs& pairs, const SubspaceRule& rule) {
  return split_subspace(pairs, rule).noise;
}

// ---------------------------------------------------------------------------
// Spectra and peaks

std::vector<double> SpectrumGrid::angle_axis(double step_deg, double lo, double hi) {
  if (!(step_deg > 0.0) || !(hi > lo)) throw ValidationError("invalid angle axis");
  std::vector<double> out;
  for (long i = 1;; ++i) {
    const double v = lo + static_cast<double>(i) * step_deg;
    if (v >= hi - 1e-9 * step_deg) break;
    out.push_back(v);
  }
  return out;
}

std::vector<double> SpectrumGrid::range_axis(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo) || !(lo > 0.0)) throw ValidationError("invalid range axis");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi - 1e-9 * step) break;
    out.push_back(v);
  }
  out.push_back(hi);
  return out;
}

void SpectrumGrid::validate() const {
  auto check = [](const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw ValidationError(fmt::format("{} grid is empty", name));
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (!(axis[i] > axis[i - 1])) {
        throw ValidationError(fmt::format("{} grid must be strictly increasing", name));
      }
    }
  };
  check(angles_deg, "angle");
  check(ranges_m, "range");
  if (!(angles_deg.front() > -90.0) || !(angles_deg.back() < 90.0)) {
    throw ValidationError("angle grid must lie inside (-90, 90) degrees");
  }
}

std::vector<double> PseudoSpectrum::db() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = 10.0 * std::log10(values[i]);
  return out;
}

namespace {

double prominence(const std::vector<double>& y, std::size_t i) {
  const double h = y[i];
  double left_min = h;
  for (std::size_t k = i; k-- > 0;) {
    if (y[k] > h) break;
    left_min = std::min(left_min, y[k]);
  }
  double right_min = h;
  for (std::size_t k = i + 1; k < y.size(); ++k) {
    if (y[k] > h) break;
    right_min = std::min(right_min, y[k]);
  }
  // An edge peak has only one side to descend on.
  if (i == 0) return h - right_min;
  if (i + 1 == y.size()) return h - left_min;
  return h - std::max(left_min, right_min);
}

}  // namespace

std::vector<Peak> detect_peaks(const PseudoSpectrum& spectrum, const PeakOptions& options) {
  const std::vector<double> y = spectrum.db();
  const std::vector<double>& x = spectrum.axis;
  const std::size_t n = y.size();
  std::vector<Peak> peaks;
  if (n == 0) return peaks;

  auto push = [&](std::size_t i) {
    Peak p;
    p.index = i;
    p.location = x[i];
    p.value_db = y[i];
    p.prominence_db = prominence(y, i);
    if (p.prominence_db < options.min_prominence_db) return;
    if (options.refine && i > 0 && i + 1 < n) {
      const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) {
        const double delta = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
        const double h = delta >= 0.0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
        p.location = x[i] + delta * h;
        p.value_db = y0 - 0.25 * (ym - yp) * delta;
      }
    }
    peaks.push_back(p);
  };

  if (n == 1) {
    if (options.include_edges) push(0);
  } else {
    if (options.include_edges && y[0] > y[1]) push(0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (y[i] > y[i - 1] && y[i] >= y[i + 1]) push(i);
    }
    if (options.include_edges && y[n - 1] > y[n - 2]) push(n - 1);
  }

  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.value_db != b.value_db) return a.value_db > b.value_db;
    return a.location < b.location;
  });
  if (options.max_count > 0 && peaks.size() > options.max_count) peaks.resize(options.max_count);
  return peaks;
}

CVector VirtualSteering::at(double theta) const {
  const double phase = -2.0 * kPi / wavelength * phase_factor * element_spacing * std::sin(theta);
  CVector a(static_cast<Eigen::Index>(length));
  for (std::size_t m = 0; m < length; ++m) {
    a[static_cast<Eigen::Index>(m)] = std::polar(1.0, phase * static_cast<double>(m));
  }
  return a;
}

std::vector<double> normalized_noise_projection(const Subspace& subspace, const CMatrix& probes) {
  const std::size_t n = static_cast<std::size_t>(probes.rows());
  const std::size_t g_count = static_cast<std::size_t>(probes.cols());
  if (static_cast<std::size_t>(subspace.noise.rows()) != n) {
    throw ValidationError("probe length does not match the subspace dimension");
  }
  kernels::SplitMatrix probes_t(g_count, n);
  std::vector<double> norms(g_count, 0.0);
  for (std::size_t g = 0; g < g_count; ++g) {
    for (std::size_t u = 0; u < n; ++u) {
      const Complex v = probes(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(g));
      probes_t.col_re(u)[g] = v.real();
      probes_t.col_im(u)[g] = v.imag();
      norms[g] += std::norm(v);
    }
  }

  const bool use_noise = subspace.noise.cols() <= subspace.signal.cols();
  const CMatrix& basis = use_noise ? subspace.noise : subspace.signal;
  std::vector<double> energy(g_count, 0.0);
  if (basis.cols() > 0) {
    kernels::projection_energy(kernels::SplitMatrix::from(basis), probes_t, energy);
  }
  std::vector<double> out(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    const double frac = energy[g] / norms[g];
    out[g] = use_noise ? frac : std::max(1.0 - frac, 0.0);
  }
  return out;
}

namespace {

constexpr double kDenominatorFloor = 1e-16;

PseudoSpectrum spectrum_from(std::span<const double> axis, const std::vector<double>& den) {
  PseudoSpectrum s;
  s.axis.assign(axis.begin(), axis.end());
  s.values.resize(den.size());
  for (std::size_t i = 0; i < den.size(); ++i) s.values[i] = 1.0 / std::max(den[i], kDenominatorFloor);
  return s;
}

}  // namespace

PseudoSpectrum angle_spectrum(const Subspace& subspace, const VirtualSteering& steering,
                              std::span<const double> angles_deg) {
  CMatrix probes(static_cast<Eigen::Index>(steering.length),
                 static_cast<Eigen::Index>(angles_deg.size()));
  for (std::size_t g = 0; g < angles_deg.size(); ++g) {
    probes.col(static_cast<Eigen::Index>(g)) = steering.at(deg_to_rad(angles_deg[g]));
  }
  return spectrum_from(angles_deg, normalized_noise_projection(subspace, probes));
}

AngleSpectrum angle_spectrum(const CMatrix& r_virtual, const VirtualSteering& steering,
                             std::span<const double> angles_deg, const SubspaceRule& rule) {
  if (static_cast<std::size_t>(r_virtual.rows()) != steering.length) {
    throw ValidationError("virtual covariance size does not match the steering length");
  }
  AngleSpectrum out;
  out.eigen = eig_hermitian(r_virtual);
  const Subspace sub = split_subspace(out.eigen, rule);
  out.signal_dim = sub.signal_dim;
  out.spectrum = angle_spectrum(sub, steering, angles_deg);
  return out;
}

PseudoSpectrum range_spectrum(const Subspace& subspace, const SensorLayout& layout,
                              double theta_deg, std::span<const double> ranges_m,
                              WavefrontModel model) {
  CMatrix probes(static_cast<Eigen::Index>(layout.size()),
                 static_cast<Eigen::Index>(ranges_m.size()));
  const double theta = deg_to_rad(theta_deg);
  for (std::size_t g = 0; g < ranges_m.size(); ++g) {
    probes.col(static_cast<Eigen::Index>(g)) = steering(layout, {theta, ranges_m[g]}, model);
  }
  return spectrum_from(ranges_m, normalized_noise_projection(subspace, probes));
}

// ---------------------------------------------------------------------------
// Two-phase localisation

const char* to_string(Label label) {
  return label == Label::true_target ? "true" : "cross";
}

std::vector<double> LocalizationResult::candidate_angles() const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.theta_deg);
  return out;
}

std::vector<ClassifiedTarget> LocalizationResult::true_targets() const {
  std::vector<ClassifiedTarget> out;
  for (const auto& c : classified) {
    if (c.label == Label::true_target) out.push_back(c);
  }
  return out;
}

SpectrumGrid make_grid(const SensorLayout& layout, const LocalizerConfig& config) {
  SpectrumGrid grid;
  grid.angles_deg = SpectrumGrid::angle_axis(config.angle_step_deg);
  const auto [lo, hi] = config.range_bounds.value_or(
      std::pair{layout.fresnel_distance(), layout.rayleigh_distance()});
  double step = config.range_step_m;
  if (config.min_range_points > 1) {
    step = std::min(step, (hi - lo) / static_cast<double>(config.min_range_points));
  }
  grid.ranges_m = SpectrumGrid::range_axis(lo, hi, step);
  grid.validate();
  return grid;
}

SubspaceRule phase1_rule(const LocalizerConfig& config, std::size_t window) {
  if (config.phase1_rule) return *config.phase1_rule;
  const int limit = static_cast<int>(window) - 1;
  if (config.num_targets) {
    const int k = *config.num_targets;
    return SubspaceRule::fixed(std::clamp(k * (k + 1) / 2, 1, limit));
  }
  return SubspaceRule::eig_gap(config.eig_gap_ratio, 1);
}

SubspaceRule phase2_rule(const LocalizerConfig& config, std::size_t sensors) {
  if (config.phase2_rule) return *config.phase2_rule;
  const int limit = static_cast<int>(sensors) - 1;
  if (config.num_targets) return SubspaceRule::fixed(std::clamp(*config.num_targets, 1, limit));
  return SubspaceRule::eig_gap(config.eig_gap_ratio, 1);
}

namespace {

struct Hypothesis {
  std::size_t candidate;
  double theta_deg;
  double range_m;
  double significance_db;
};

}  // namespace

void classify_candidates(LocalizationResult& result, std::span<const Peak> angle_peaks,
                         const RangeSpectrumFn& range_fn, const LocalizerConfig& config) {
  const double lo = result.grid.ranges_m.front();
  const double hi = result.grid.ranges_m.back();
  // The global maximum always stands; further peaks need prominence.
  PeakOptions range_peaks;
  range_peaks.include_edges = true;

  std::vector<Hypothesis> hypotheses;
  for (const Peak& ap : angle_peaks) {
    CandidateReport report;
    report.theta_deg = ap.location;
    report.angle_value_db = ap.value_db;
    report.range_spectrum = range_fn(ap.location);
    std::vector<Peak> all = detect_peaks(report.range_spectrum, range_peaks);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (i == 0 || all[i].prominence_db >= config.range_prominence_db) {
        report.range_peaks.push_back(all[i]);
      }
    }
    const std::size_t idx = result.candidates.size();
    for (const Peak& rp : report.range_peaks) {
      if (rp.value_db >= config.significance_db && rp.location >= lo && rp.location <= hi) {
        hypotheses.push_back({idx, ap.location, rp.location, rp.value_db});
      }
    }
    result.candidates.push_back(std::move(report));
  }

  std::stable_sort(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.significance_db != b.significance_db) return a.significance_db > b.significance_db;
    if (a.theta_deg != b.theta_deg) return a.theta_deg < b.theta_deg;
    return a.range_m < b.range_m;
  });

  std::vector<Hypothesis> accepted;
  const std::size_t cap = config.num_targets ? static_cast<std::size_t>(*config.num_targets)
                                             : hypotheses.size();
  for (const Hypothesis& h : hypotheses) {
    if (accepted.size() >= cap) break;
    const bool duplicate = std::any_of(accepted.begin(), accepted.end(), [&](const Hypothesis& a) {
      return std::abs(a.theta_deg - h.theta_deg) <= config.merge_angle_deg &&
             std::abs(a.range_m - h.range_m) <= config.merge_range_m;
    });
    if (!duplicate) accepted.push_back(h);
  }

  std::vector<bool> has_true(result.candidates.size(), false);
  for (const Hypothesis& h : accepted) {
    has_true[h.candidate] = true;
    result.classified.push_back(
        {h.theta_deg, h.range_m, Label::true_target, h.significance_db, h.candidate});
  }
  for (std::size_t c = 0; c < result.candidates.size(); ++c) {
    if (has_true[c]) continue;
    const CandidateReport& report = result.candidates[c];
    ClassifiedTarget cross{report.theta_deg, 0.0, Label::cross, 0.0, c};
    if (!report.range_peaks.empty()) {
      cross.range_m = report.range_peaks.front().location;
      cross.significance_db = report.range_peaks.front().value_db;
    } else {
      const auto& v = report.range_spectrum.values;
      const auto it = std::max_element(v.begin(), v.end());
      const std::size_t i = static_cast<std::size_t>(it - v.begin());
      cross.range_m = report.range_spectrum.axis[i];
      cross.significance_db = 10.0 * std::log10(*it);
    }
    result.classified.push_back(cross);
  }
}

LocalizationResult classify_and_estimate(std::span<const Peak> candidates, const CMatrix& r_hat,
                                         const SensorLayout& layout, const SpectrumGrid& grid,
                                         const LocalizerConfig& config) {
  LocalizationResult result;
  result.grid = grid;
  const EigenPairs eigen = eig_hermitian(r_hat);
  const Subspace sub = split_subspace(eigen, phase2_rule(config, layout.size()));
  result.phase2_eigenvalues = eigen.values;
  result.phase2_signal_dim = sub.signal_dim;
  classify_candidates(
      result, candidates,
      [&](double theta_deg) {
        return range_spectrum(sub, layout, theta_deg, grid.ranges_m, config.range_model);
      },
      config);
  return result;
}

LocalizationResult localize_covariance(const CMatrix& r_hat, const SensorLayout& layout,
                                       const LocalizerConfig& config) {
  const SpectrumGrid grid = make_grid(layout, config);
  const CovarianceBundle bundle = build_covariance_bundle(r_hat, layout, config.covariance);
  const CoarrayLayout coarray = difference_coarray(layout, config.covariance.segment);

  VirtualSteering steering;
  steering.length = static_cast<std::size_t>(bundle.r_virtual.rows());
  steering.element_spacing = coarray.step * layout.spacing();
  steering.wavelength = layout.wavelength();
  steering.phase_factor = 2.0;

  const AngleSpectrum phase1 = angle_spectrum(bundle.r_virtual, steering, grid.angles_deg,
                                              phase1_rule(config, steering.length));

  PeakOptions angle_peaks;
  angle_peaks.min_prominence_db = config.angle_prominence_db;
  angle_peaks.max_count = config.max_candidates;
  if (angle_peaks.max_count == 0) {
    angle_peaks.max_count = config.num_targets
                                ? static_cast<std::size_t>(*config.num_targets * (*config.num_targets + 1))
                                : steering.length - 1;
  }
  const std::vector<Peak> candidates = detect_peaks(phase1.spectrum, angle_peaks);

  LocalizationResult result = classify_and_estimate(candidates, r_hat, layout, grid, config);
  result.angle_spectrum = phase1.spectrum;
  result.phase1_eigenvalues = phase1.eigen.values;
  result.phase1_signal_dim = phase1.signal_dim;
  return result;
}

LocalizationResult localize(const SnapshotSet& snapshots, const SensorLayout& layout,
                            const LocalizerConfig& config) {
  if (snapshots.sensors() != layout.size()) {
    throw ValidationError(fmt::format("snapshots have {} sensors but the layout has {}",
                                      snapshots.sensors(), layout.size()));
  }
  return localize_covariance(estimate_covariance(snapshots, config.covariance.estimator), layout,
                             config);
}

}  // namespace nfloc
