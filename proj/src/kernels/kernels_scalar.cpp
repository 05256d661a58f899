#include <algorithm>

#include "nfloc/kernels.hpp"

namespace nfloc::kernels::detail {

namespace {
constexpr std::size_t kProbeBlock = 256;
}

void projection_energy_scalar(const SplitMatrix& basis, const SplitMatrix& probes_t,
                              std::span<double> out) {
  const std::size_t n = basis.rows;
  const std::size_t g_total = probes_t.rows;
  double acc_re[kProbeBlock];
  double acc_im[kProbeBlock];

  for (std::size_t g0 = 0; g0 < g_total; g0 += kProbeBlock) {
    const std::size_t len = std::min(kProbeBlock, g_total - g0);
    std::fill_n(out.data() + g0, len, 0.0);
    for (std::size_t c = 0; c < basis.cols; ++c) {
      std::fill_n(acc_re, len, 0.0);
      std::fill_n(acc_im, len, 0.0);
      const double* b_re = basis.col_re(c);
      const double* b_im = basis.col_im(c);
      for (std::size_t u = 0; u < n; ++u) {
        const double br = b_re[u];
        const double bi = b_im[u];
        const double* v_re = probes_t.col_re(u) + g0;
        const double* v_im = probes_t.col_im(u) + g0;
        for (std::size_t g = 0; g < len; ++g) {
          acc_re[g] += br * v_re[g] + bi * v_im[g];
          acc_im[g] += br * v_im[g] - bi * v_re[g];
        }
      }
      for (std::size_t g = 0; g < len; ++g) {
        out[g0 + g] += acc_re[g] * acc_re[g] + acc_im[g] * acc_im[g];
      }
    }
  }
}

void accumulate_outer_scalar(SplitMatrix& acc, const double* v_re, const double* v_im,
                             double weight) {
  const std::size_t n = acc.rows;
  for (std::size_t j = 0; j < n; ++j) {
    const double sr = weight * v_re[j];
    const double si = -weight * v_im[j];
    double* a_re = acc.col_re(j);
    double* a_im = acc.col_im(j);
    for (std::size_t i = 0; i < n; ++i) {
      a_re[i] += sr * v_re[i] - si * v_im[i];
      a_im[i] += sr * v_im[i] + si * v_re[i];
    }
  }
}

}  // namespace nfloc::kernels::detail
