#pragma once

#include "nfloc/channel.hpp"
#include "nfloc/geometry.hpp"
#include "nfloc/types.hpp"

namespace nfloc {

enum class CovarianceEstimator {
  ls_known_waveform,  ///< per-snapshot least-squares steering estimate, known x(t)
  sample,             ///< plain sample covariance of y(t)
};

/// How several covariance entries sharing one coarray lag are reduced.
enum class LagReduction {
  average,           ///< mean over every (i, j) with s_i - s_j = lag
  first_occurrence,  ///< the first (i, j) in row-major order
};

const char* to_string(CovarianceEstimator estimator);
const char* to_string(LagReduction reduction);

/// R = (1/T) sum_t B_t B_t^H with B_t = y(t) x(t)^H / (x(t)^H x(t)), the
/// minimum-norm least-squares steering estimate of a single snapshot.
CMatrix covariance_ls(const SnapshotSet& snapshots);

/// R = (1/T) sum_t y(t) y(t)^H.
CMatrix covariance_sample(const SnapshotSet& snapshots);

CMatrix estimate_covariance(const SnapshotSet& snapshots, CovarianceEstimator estimator);

/// Entry (i, j) of the result is r(mirror(j), mirror(i)): the reflection of
/// `r` about its anti-diagonal.
CMatrix anti_diagonal_mirror(const CMatrix& r);

struct Decoupled {
  CMatrix mirrored;   ///< R_a
  CMatrix decoupled;  ///< R_d = R (Hadamard) R_a
};

/// Requires a symmetric layout with r of matching size.
Decoupled decouple(const CMatrix& r, const SensorLayout& layout);

/// Coarray sample vector over the smoothing segment, ascending lag order.
CVector vectorize_to_coarray(const CMatrix& r, const SensorLayout& layout,
                             const CoarrayLayout& coarray,
                             LagReduction reduction = LagReduction::average);

/// Forward spatial smoothing of an odd-length coarray vector of length 2L-1
/// into an L x L matrix averaged over L sliding windows.
CMatrix spatial_smooth(const CVector& r_tilde);

struct CovarianceBundle {
  CMatrix r_hat;
  CMatrix r_mirrored;
  CMatrix r_decoupled;
  CVector r_tilde;
  CMatrix r_virtual;
  CovarianceEstimator estimator = CovarianceEstimator::ls_known_waveform;
};

struct CovarianceOptions {
  CovarianceEstimator estimator = CovarianceEstimator::ls_known_waveform;
  LagReduction reduction = LagReduction::average;
  SegmentPolicy segment = SegmentPolicy::central;
};

CovarianceBundle build_covariance_bundle(const SnapshotSet& snapshots, const SensorLayout& layout,
                                         const CovarianceOptions& options = {});

/// Same chain starting from an already estimated R.
CovarianceBundle build_covariance_bundle(const CMatrix& r_hat, const SensorLayout& layout,
                                         const CovarianceOptions& options = {});

}  // namespace nfloc
