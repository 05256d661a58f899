#pragma once

// Data-parallel inner loops behind the covariance and MUSIC stages.
//
// Each kernel has a portable scalar reference and, on x86-64, an AVX2+FMA
// variant compiled in its own translation unit. The variant is picked once at
// runtime from CPUID; NFLOC_FORCE_SCALAR=1 in the environment pins the scalar
// path. Both variants are exposed for equivalence testing.

#include <cstddef>
#include <span>
#include <vector>

#include "nfloc/types.hpp"

namespace nfloc::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

/// True when the AVX2 variant was compiled in and the CPU supports AVX2+FMA.
bool avx2_available();

/// ISA used by the dispatching entry points.
Isa active_isa();

/// Column-major complex matrix with separate real and imaginary planes.
struct SplitMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> re;
  std::vector<double> im;

  SplitMatrix() = default;
  SplitMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), re(r * c, 0.0), im(r * c, 0.0) {}

  static SplitMatrix from(const CMatrix& m);
  CMatrix to_matrix() const;

  double* col_re(std::size_t c) { return re.data() + c * rows; }
  double* col_im(std::size_t c) { return im.data() + c * rows; }
  const double* col_re(std::size_t c) const { return re.data() + c * rows; }
  const double* col_im(std::size_t c) const { return im.data() + c * rows; }
};

/// For every probe vector g (column g of `probes`, which is stored
/// transposed: element u of probe g lives at row g, column u), writes
///   out[g] = sum_c |basis(:, c)^H probe_g|^2
/// i.e. the squared norm of the probe projected onto span(basis) when the
/// basis columns are orthonormal. probes.cols must equal basis.rows.
void projection_energy(const SplitMatrix& basis, const SplitMatrix& probes_t,
                       std::span<double> out);
void projection_energy(const SplitMatrix& basis, const SplitMatrix& probes_t,
                       std::span<double> out, Isa isa);

/// acc += weight * v v^H on a square SplitMatrix of size v.size().
void accumulate_outer(SplitMatrix& acc, std::span<const double> v_re,
                      std::span<const double> v_im, double weight);
void accumulate_outer(SplitMatrix& acc, std::span<const double> v_re,
                      std::span<const double> v_im, double weight, Isa isa);

namespace detail {

void projection_energy_scalar(const SplitMatrix& basis, const SplitMatrix& probes_t,
                              std::span<double> out);
void accumulate_outer_scalar(SplitMatrix& acc, const double* v_re, const double* v_im,
                             double weight);
#if defined(NFLOC_HAVE_AVX2_TU)
void projection_energy_avx2(const SplitMatrix& basis, const SplitMatrix& probes_t,
                            std::span<double> out);
void accumulate_outer_avx2(SplitMatrix& acc, const double* v_re, const double* v_im,
                           double weight);
#endif

}  // namespace detail

}  // namespace nfloc::kernels
