#include <cstdlib>
#include <cstring>

#include <fmt/format.h>

#include "nfloc/kernels.hpp"

namespace nfloc::kernels {

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool avx2_available() {
#if defined(NFLOC_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* force = std::getenv("NFLOC_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0) return Isa::scalar;
    return avx2_available() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

SplitMatrix SplitMatrix::from(const CMatrix& m) {
  SplitMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  const Complex* data = m.data();
  for (std::size_t i = 0; i < out.re.size(); ++i) {
    out.re[i] = data[i].real();
    out.im[i] = data[i].imag();
  }
  return out;
}

CMatrix SplitMatrix::to_matrix() const {
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Complex* data = m.data();
  for (std::size_t i = 0; i < re.size(); ++i) data[i] = Complex(re[i], im[i]);
  return m;
}

namespace {

void require_avx2() {
  if (!avx2_available()) throw ValidationError("AVX2 kernels are not available on this host");
}

}  // namespace

void projection_energy(const SplitMatrix& basis, const SplitMatrix& probes_t,
                       std::span<double> out, Isa isa) {
  if (probes_t.cols != basis.rows) {
    throw ValidationError(fmt::format("probe length {} does not match basis rows {}",
                                      probes_t.cols, basis.rows));
  }
  if (out.size() != probes_t.rows) throw ValidationError("output size must equal probe count");
  switch (isa) {
    case Isa::scalar:
      detail::projection_energy_scalar(basis, probes_t, out);
      return;
    case Isa::avx2:
      require_avx2();
#if defined(NFLOC_HAVE_AVX2_TU)
      detail::projection_energy_avx2(basis, probes_t, out);
#endif
      return;
  }
}

void projection_energy(const SplitMatrix& basis, const SplitMatrix& probes_t,
                       std::span<double> out) {
  projection_energy(basis, probes_t, out, active_isa());
}

void accumulate_outer(SplitMatrix& acc, std::span<const double> v_re,
                      std::span<const double> v_im, double weight, Isa isa) {
  if (acc.rows != acc.cols || v_re.size() != acc.rows || v_im.size() != acc.rows) {
    throw ValidationError("accumulate_outer needs a square accumulator matching the vector");
  }
  switch (isa) {
    case Isa::scalar:
      detail::accumulate_outer_scalar(acc, v_re.data(), v_im.data(), weight);
      return;
    case Isa::avx2:
      require_avx2();
#if defined(NFLOC_HAVE_AVX2_TU)
      detail::accumulate_outer_avx2(acc, v_re.data(), v_im.data(), weight);
#endif
      return;
  }
}

void accumulate_outer(SplitMatrix& acc, std::span<const double> v_re,
                      std::span<const double> v_im, double weight) {
  accumulate_outer(acc, v_re, v_im, weight, active_isa());
}

}  // namespace nfloc::kernels
