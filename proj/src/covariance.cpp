#include "nfloc/covariance.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "nfloc/kernels.hpp"

namespace nfloc {

const char* to_string(CovarianceEstimator estimator) {
  switch (estimator) {
    case CovarianceEstimator::ls_known_waveform: return "ls";
    case CovarianceEstimator::sample: return "sample";
  }
  return "unknown";
}

const char* to_string(LagReduction reduction) {
  switch (reduction) {
    case LagReduction::average: return "average";
    case LagReduction::first_occurrence: return "first";
  }
  return "unknown";
}

namespace {

// Copies the upper triangle onto the lower one so the result is Hermitian
// bit for bit; the kernel computes both halves with different rounding.
CMatrix hermitian_from_upper(CMatrix m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m(j, j) = Complex(m(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(i, j) = std::conj(m(j, i));
  }
  return m;
}

// Sums weight_t * y(t) y(t)^H through the SIMD outer-product kernel.
template <typename WeightFn>
CMatrix weighted_outer_sum(const CMatrix& y, WeightFn weight) {
  const std::size_t u = static_cast<std::size_t>(y.rows());
  kernels::SplitMatrix acc(u, u);
  std::vector<double> re(u), im(u);
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    for (std::size_t i = 0; i < u; ++i) {
      re[i] = y(static_cast<Eigen::Index>(i), t).real();
      im[i] = y(static_cast<Eigen::Index>(i), t).imag();
    }
    kernels::accumulate_outer(acc, re, im, weight(t));
  }
  return hermitian_from_upper(acc.to_matrix());
}

}  // namespace

CMatrix covariance_ls(const SnapshotSet& snapshots) {
  const Eigen::Index t_count = snapshots.y.cols();
  if (t_count == 0) throw ValidationError("no snapshots");
  if (snapshots.x.cols() != t_count) throw ValidationError("x and y snapshot counts differ");
  std::vector<double> inv_power(static_cast<std::size_t>(t_count));
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const double p = snapshots.x.col(t).squaredNorm();
    if (!(p > 0.0)) {
      throw ValidationError(fmt::format("snapshot {} has an all-zero source vector", t));
    }
    inv_power[static_cast<std::size_t>(t)] = 1.0 / p;
  }
  // B_t B_t^H = y y^H * (x^H x) / (x^H x)^2 = y y^H / (x^H x).
  const double norm = 1.0 / static_cast<double>(t_count);
  return weighted_outer_sum(snapshots.y, [&](Eigen::Index t) {
    return norm * inv_power[static_cast<std::size_t>(t)];
  });
}

CMatrix covariance_sample(const SnapshotSet& snapshots) {
  const Eigen::Index t_count = snapshots.y.cols();
  if (t_count == 0) throw ValidationError("no snapshots");
  const double norm = 1.0 / static_cast<double>(t_count);
  return weighted_outer_sum(snapshots.y, [&](Eigen::Index) { return norm; });
}

CMatrix estimate_covariance(const SnapshotSet& snapshots, CovarianceEstimator estimator) {
  switch (estimator) {
    case CovarianceEstimator::ls_known_waveform: return covariance_ls(snapshots);
    case CovarianceEstimator::sample: return covariance_sample(snapshots);
  }
  throw InternalError("unhandled covariance estimator");
}

CMatrix anti_diagonal_mirror(const CMatrix& r) {
  if (r.rows() != r.cols()) throw ValidationError("matrix must be square");
  const Eigen::Index n = r.rows();
  CMatrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = r(n - 1 - j, n - 1 - i);
  }
  return out;
}

Decoupled decouple(const CMatrix& r, const SensorLayout& layout) {
  if (r.rows() != r.cols() || static_cast<std::size_t>(r.rows()) != layout.size()) {
    throw ValidationError(fmt::format("covariance is {}x{} but the layout has {} sensors",
                                      r.rows(), r.cols(), layout.size()));
  }
  if (!layout.is_symmetric()) {
    throw ValidationError("decoupling requires a layout symmetric about the origin");
  }
  Decoupled out;
  out.mirrored = anti_diagonal_mirror(r);
  out.decoupled = r.cwiseProduct(out.mirrored);
  return out;
}

CVector vectorize_to_coarray(const CMatrix& r, const SensorLayout& layout,
                             const CoarrayLayout& coarray, LagReduction reduction) {
  const std::size_t u = layout.size();
  if (static_cast<std::size_t>(r.rows()) != u || static_cast<std::size_t>(r.cols()) != u) {
    throw ValidationError("matrix size does not match the layout");
  }
  const int h = coarray.segment_half_width;
  const int step = coarray.step;
  const std::size_t len = coarray.segment_length();
  CVector sums = CVector::Zero(static_cast<Eigen::Index>(len));
  std::vector<int> counts(len, 0);

  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < u; ++j) {
      const int diff = layout.index(i) - layout.index(j);
      if (diff % step != 0) continue;
      const int lag = diff / step;
      if (lag < -h || lag > h) continue;
      const std::size_t slot = static_cast<std::size_t>(lag + h);
      if (reduction == LagReduction::first_occurrence && counts[slot] > 0) continue;
      sums[static_cast<Eigen::Index>(slot)] +=
          r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      ++counts[slot];
    }
  }
  for (std::size_t k = 0; k < len; ++k) {
    if (counts[k] == 0) {
      throw InternalError(fmt::format("coarray lag {} missing from the smoothing segment",
                                      (static_cast<int>(k) - h) * step));
    }
    sums[static_cast<Eigen::Index>(k)] /= static_cast<double>(counts[k]);
  }
  return sums;
}

CMatrix spatial_smooth(const CVector& r_tilde) {
  const Eigen::Index total = r_tilde.size();
  if (total < 1 || total % 2 == 0) {
    throw ValidationError(fmt::format("coarray vector length must be odd, got {}", total));
  }
  const std::size_t window = static_cast<std::size_t>((total + 1) / 2);
  kernels::SplitMatrix acc(window, window);
  std::vector<double> re(static_cast<std::size_t>(total)), im(re.size());
  for (Eigen::Index k = 0; k < total; ++k) {
    re[static_cast<std::size_t>(k)] = r_tilde[k].real();
    im[static_cast<std::size_t>(k)] = r_tilde[k].imag();
  }
  const double w = 1.0 / static_cast<double>(window);
  for (std::size_t i = 0; i < window; ++i) {
    kernels::accumulate_outer(acc, std::span<const double>(re).subspan(i, window),
                              std::span<const double>(im).subspan(i, window), w);
  }
  return hermitian_from_upper(acc.to_matrix());
}

CovarianceBundle build_covariance_bundle(const CMatrix& r_hat, const SensorLayout& layout,
                                         const CovarianceOptions& options) {
  CovarianceBundle out;
  out.estimator = options.estimator;
  out.r_hat = r_hat;
  Decoupled d = decouple(r_hat, layout);
  out.r_mirrored = std::move(d.mirrored);
  out.r_decoupled = std::move(d.decoupled);
  const CoarrayLayout coarray = difference_coarray(layout, options.segment);
  out.r_tilde = vectorize_to_coarray(out.r_decoupled, layout, coarray, options.reduction);
  out.r_virtual = spatial_smooth(out.r_tilde);
  return out;
}

CovarianceBundle build_covariance_bundle(const SnapshotSet& snapshots, const SensorLayout& layout,
                                         const CovarianceOptions& options) {
  return build_covariance_bundle(estimate_covariance(snapshots, options.estimator), layout,
                                 options);
}

}  // namespace nfloc
