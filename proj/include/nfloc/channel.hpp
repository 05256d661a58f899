#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfloc/geometry.hpp"
#include "nfloc/types.hpp"

namespace nfloc {

/// Point target; theta from broadside [rad], range from the array centre [m].
struct Target {
  double theta = 0.0;
  double range = 0.0;

  static Target from_degrees(double theta_deg, double range_m) {
    return {deg_to_rad(theta_deg), range_m};
  }
};

enum class WavefrontModel {
  exact,    ///< spherical wavefront, exact sensor-target distance
  fresnel,  ///< second-order (Fresnel) phase expansion
  planar,   ///< far-field plane wave, no range dependence
};

const char* to_string(WavefrontModel model);
WavefrontModel wavefront_model_from_string(const std::string& name);

// Phase convention: every steering vector is the conjugate-free form
// exp(j * (p_u + q_u)) with p_u = -2*pi*s_u*sin(theta)/lambda and
// q_u = pi*s_u^2*cos(theta)^2/(lambda*r). The exact model uses the same sign,
// exp(+j*2*pi/lambda*(d_u - r)), so that its second-order expansion is the
// Fresnel vector.

/// First-order (angle) phase of sensor position s.
double linear_phase(double s, double theta, double wavelength);
/// Second-order (angle and range) phase of sensor position s.
double quadratic_phase(double s, double theta, double range, double wavelength);

CVector steering_exact(const SensorLayout& layout, const Target& target);
CVector steering_fresnel(const SensorLayout& layout, const Target& target);
CVector steering_planar(const SensorLayout& layout, double theta);
CVector steering(const SensorLayout& layout, const Target& target, WavefrontModel model);

/// Self-spectrum steering a(theta): doubled-position plane wave,
/// element u = exp(-j*2*pi/lambda * 2*s_u*sin(theta)).
CVector steering_selfspectrum(const SensorLayout& layout, double theta);

/// U x K steering matrix B(theta, r).
CMatrix steering_matrix(const SensorLayout& layout, std::span<const Target> targets,
                        WavefrontModel model);

struct SnapshotSet {
  CMatrix y;  ///< U x T received snapshots
  CMatrix x;  ///< K x T source waveforms
  double noise_variance = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;

  std::size_t sensors() const { return static_cast<std::size_t>(y.rows()); }
  std::size_t snapshots() const { return static_cast<std::size_t>(y.cols()); }
  std::size_t sources() const { return static_cast<std::size_t>(x.rows()); }
};

/// y(t) = B x(t) + z(t) with unit-variance CSCG sources and CSCG noise of
/// variance 10^(-snr_db/10); snr_db = +inf disables noise. Deterministic in seed.
SnapshotSet synthesize(const SensorLayout& layout, std::span<const Target> targets,
                       std::size_t snapshot_count, double snr_db, std::uint64_t seed,
                       WavefrontModel model = WavefrontModel::exact);

/// Messages for targets outside [Z_F, Z_R] of `layout`; empty when all fit.
std::vector<std::string> check_fresnel_region(const SensorLayout& layout,
                                              std::span<const Target> targets);

}  // namespace nfloc
