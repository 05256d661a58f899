// Compiled with -mavx2 -mfma; only reached after a runtime CPUID check.

#include <immintrin.h>

#include <algorithm>

#include "nfloc/kernels.hpp"

namespace nfloc::kernels::detail {

namespace {
constexpr std::size_t kProbeBlock = 256;
}

void projection_energy_avx2(const SplitMatrix& basis, const SplitMatrix& probes_t,
                            std::span<double> out) {
  const std::size_t n = basis.rows;
  const std::size_t g_total = probes_t.rows;
  alignas(32) double acc_re[kProbeBlock];
  alignas(32) double acc_im[kProbeBlock];

  for (std::size_t g0 = 0; g0 < g_total; g0 += kProbeBlock) {
    const std::size_t len = std::min(kProbeBlock, g_total - g0);
    const std::size_t vec_len = len & ~std::size_t{3};
    std::fill_n(out.data() + g0, len, 0.0);
    for (std::size_t c = 0; c < basis.cols; ++c) {
      std::fill_n(acc_re, len, 0.0);
      std::fill_n(acc_im, len, 0.0);
      const double* b_re = basis.col_re(c);
      const double* b_im = basis.col_im(c);
      for (std::size_t u = 0; u < n; ++u) {
        const __m256d br = _mm256_set1_pd(b_re[u]);
        const __m256d bi = _mm256_set1_pd(b_im[u]);
        const double* v_re = probes_t.col_re(u) + g0;
        const double* v_im = probes_t.col_im(u) + g0;
        std::size_t g = 0;
        for (; g < vec_len; g += 4) {
          const __m256d vr = _mm256_loadu_pd(v_re + g);
          const __m256d vi = _mm256_loadu_pd(v_im + g);
          __m256d ar = _mm256_load_pd(acc_re + g);
          __m256d ai = _mm256_load_pd(acc_im + g);
          ar = _mm256_fmadd_pd(br, vr, ar);
          ar = _mm256_fmadd_pd(bi, vi, ar);
          ai = _mm256_fmadd_pd(br, vi, ai);
          ai = _mm256_fnmadd_pd(bi, vr, ai);
          _mm256_store_pd(acc_re + g, ar);
          _mm256_store_pd(acc_im + g, ai);
        }
        for (; g < len; ++g) {
          acc_re[g] += b_re[u] * v_re[g] + b_im[u] * v_im[g];
          acc_im[g] += b_re[u] * v_im[g] - b_im[u] * v_re[g];
        }
      }
      std::size_t g = 0;
      for (; g < vec_len; g += 4) {
        const __m256d ar = _mm256_load_pd(acc_re + g);
        const __m256d ai = _mm256_load_pd(acc_im + g);
        __m256d o = _mm256_loadu_pd(out.data() + g0 + g);
        o = _mm256_add_pd(o, _mm256_fmadd_pd(ar, ar, _mm256_mul_pd(ai, ai)));
        _mm256_storeu_pd(out.data() + g0 + g, o);
      }
      for (; g < len; ++g) out[g0 + g] += acc_re[g] * acc_re[g] + acc_im[g] * acc_im[g];
    }
  }
}

void accumulate_outer_avx2(SplitMatrix& acc, const double* v_re, const double* v_im,
                           double weight) {
  const std::size_t n = acc.rows;
  const std::size_t vec_n = n & ~std::size_t{3};
  for (std::size_t j = 0; j < n; ++j) {
    const double sr_s = weight * v_re[j];
    const double si_s = -weight * v_im[j];
    const __m256d sr = _mm256_set1_pd(sr_s);
    const __m256d si = _mm256_set1_pd(si_s);
    double* a_re = acc.col_re(j);
    double* a_im = acc.col_im(j);
    std::size_t i = 0;
    for (; i < vec_n; i += 4) {
      const __m256d vr = _mm256_loadu_pd(v_re + i);
      const __m256d vi = _mm256_loadu_pd(v_im + i);
      __m256d ar = _mm256_loadu_pd(a_re + i);
      __m256d ai = _mm256_loadu_pd(a_im + i);
      ar = _mm256_fmadd_pd(sr, vr, ar);
      ar = _mm256_fnmadd_pd(si, vi, ar);
      ai = _mm256_fmadd_pd(sr, vi, ai);
      ai = _mm256_fmadd_pd(si, vr, ai);
      _mm256_storeu_pd(a_re + i, ar);
      _mm256_storeu_pd(a_im + i, ai);
    }
    for (; i < n; ++i) {
      a_re[i] += sr_s * v_re[i] - si_s * v_im[i];
      a_im[i] += sr_s * v_im[i] + si_s * v_re[i];
    }
  }
}

}  // namespace nfloc::kernels::detail
