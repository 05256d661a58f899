#include "nfloc/channel.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace nfloc {

const char* to_string(WavefrontModel model) {
  switch (model) {
    case WavefrontModel::exact: return "exact";
    case WavefrontModel::fresnel: return "fresnel";
    case WavefrontModel::planar: return "planar";
  }
  return "unknown";
}

WavefrontModel wavefront_model_from_string(const std::string& name) {
  if (name == "exact") return WavefrontModel::exact;
  if (name == "fresnel") return WavefrontModel::fresnel;
  if (name == "planar") return WavefrontModel::planar;
  throw ValidationError(fmt::format("unknown wavefront model '{}'", name));
}

double linear_phase(double s, double theta, double wavelength) {
  return -2.0 * kPi * s * std::sin(theta) / wavelength;
}

double quadratic_phase(double s, double theta, double range, double wavelength) {
  const double c = std::cos(theta);
  return kPi * s * s * c * c / (wavelength * range);
}

namespace {

void require_range(const Target& t) {
  if (!(t.range > 0.0)) throw ValidationError("target range must be positive");
}

}  // namespace

CVector steering_exact(const SensorLayout& layout, const Target& target) {
  require_range(target);
  const double k = 2.0 * kPi / layout.wavelength();
  const double r = target.range;
  const double sin_t = std::sin(target.theta);
  CVector b(layout.size());
  for (std::size_t u = 0; u < layout.size(); ++u) {
    const double s = layout.position(u);
    const double dist = std::sqrt(r * r + s * s - 2.0 * r * s * sin_t);
    b[u] = std::polar(1.0, k * (dist - r));
  }
  return b;
}

CVector steering_fresnel(const SensorLayout& layout, const Target& target) {
  require_range(target);
  const double lambda = layout.wavelength();
  CVector b(layout.size());
  for (std::size_t u = 0; u < layout.size(); ++u) {
    const double s = layout.position(u);
    b[u] = std::polar(1.0, linear_phase(s, target.theta, lambda) +
                               quadratic_phase(s, target.theta, target.range, lambda));
  }
  return b;
}

CVector steering_planar(const SensorLayout& layout, double theta) {
  CVector b(layout.size());
  for (std::size_t u = 0; u < layout.size(); ++u) {
    b[u] = std::polar(1.0, linear_phase(layout.position(u), theta, layout.wavelength()));
  }
  return b;
}

CVector steering(const SensorLayout& layout, const Target& target, WavefrontModel model) {
  switch (model) {
    case WavefrontModel::exact: return steering_exact(layout, target);
    case WavefrontModel::fresnel: return steering_fresnel(layout, target);
    case WavefrontModel::planar: return steering_planar(layout, target.theta);
  }
  throw InternalError("unhandled wavefront model");
}

CVector steering_selfspectrum(const SensorLayout& layout, double theta) {
  CVector a(layout.size());
  for (std::size_t u = 0; u < layout.size(); ++u) {
    a[u] = std::polar(1.0, 2.0 * linear_phase(layout.position(u), theta, layout.wavelength()));
  }
  return a;
}

CMatrix steering_matrix(const SensorLayout& layout, std::span<const Target> targets,
                        WavefrontModel model) {
  CMatrix b(layout.size(), targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) b.col(k) = steering(layout, targets[k], model);
  return b;
}

SnapshotSet synthesize(const SensorLayout& layout, std::span<const Target> targets,
                       std::size_t snapshot_count, double snr_db, std::uint64_t seed,
                       WavefrontModel model) {
  if (targets.empty()) throw ValidationError("synthesis needs at least one target");
  if (snapshot_count == 0) throw ValidationError("synthesis needs at least one snapshot");

  const CMatrix b = steering_matrix(layout, targets, model);
  const std::size_t k = targets.size();
  const std::size_t u = layout.size();
  const bool noiseless = std::isinf(snr_db) && snr_db > 0.0;
  const double sigma2 = noiseless ? 0.0 : std::pow(10.0, -snr_db / 10.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double src_scale = std::sqrt(0.5);
  const double noise_scale = std::sqrt(sigma2 / 2.0);

  SnapshotSet out;
  out.x.resize(k, snapshot_count);
  out.y.resize(u, snapshot_count);
  out.noise_variance = sigma2;
  out.snr_db = snr_db;
  out.seed = seed;

  // Draw order is fixed (sources, then noise, per snapshot) so output depends only on seed.
  for (std::size_t t = 0; t < snapshot_count; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out.x(i, t) = Complex(src_scale * re, src_scale * im);
    }
    out.y.col(t) = b * out.x.col(t);
    if (!noiseless) {
      for (std::size_t i = 0; i < u; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        out.y(i, t) += Complex(noise_scale * re, noise_scale * im);
      }
    }
  }
  return out;
}

std::vector<std::string> check_fresnel_region(const SensorLayout& layout,
                                              std::span<const Target> targets) {
  std::vector<std::string> out;
  const double zf = layout.fresnel_distance();
  const double zr = layout.rayleigh_distance();
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double r = targets[k].range;
    if (r < zf || r > zr) {
      out.push_back(fmt::format("target {} at {:.3f} m lies outside the Fresnel region [{:.3f}, {:.3f}] m",
                                k, r, zf, zr));
    }
  }
  return out;
}

}  // namespace nfloc
