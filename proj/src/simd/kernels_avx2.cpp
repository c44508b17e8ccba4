// Compiled with -mavx2 only; never called unless the CPU reports AVX2.

#include <immintrin.h>

#include "pronk/simd/kernels.hpp"

namespace pronk::simd {
namespace avx2_impl {

void bezier4(const double* cols, int n_cols, double s, double* out) {
  __m256d work[kMaxBezierOrder + 1];
  for (int i = 0; i < n_cols; ++i) work[i] = _mm256_loadu_pd(cols + i * kLanes);
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vt = _mm256_set1_pd(1.0 - s);
  for (int r = n_cols - 1; r > 0; --r) {
    for (int i = 0; i < r; ++i) {
      work[i] = _mm256_add_pd(_mm256_mul_pd(vt, work[i]), _mm256_mul_pd(vs, work[i + 1]));
    }
  }
  _mm256_storeu_pd(out, work[0]);
}

void bezier_derivative4(const double* cols, int n_cols, double s, double* out) {
  if (n_cols < 2) {
    _mm256_storeu_pd(out, _mm256_setzero_pd());
    return;
  }
  alignas(32) double diff[kMaxBezierOrder * kLanes];
  for (int i = 0; i + 1 < n_cols; ++i) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(cols + (i + 1) * kLanes),
                                    _mm256_loadu_pd(cols + i * kLanes));
    _mm256_store_pd(diff + i * kLanes, d);
  }
  __m256d v;
  {
    alignas(32) double tmp[kLanes];
    bezier4(diff, n_cols - 1, s, tmp);
    v = _mm256_load_pd(tmp);
  }
  _mm256_storeu_pd(out, _mm256_mul_pd(_mm256_set1_pd(static_cast<double>(n_cols - 1)), v));
}

void iir4(const double* b, const double* a, int order, const double* x, double* y,
          std::size_t n, double* state) {
  __m256d z[kMaxFilterOrder];
  __m256d vb[kMaxFilterOrder + 1];
  __m256d va[kMaxFilterOrder + 1];
  for (int i = 0; i < order; ++i) z[i] = _mm256_loadu_pd(state + i * kLanes);
  for (int i = 0; i <= order; ++i) {
    vb[i] = _mm256_set1_pd(b[i]);
    va[i] = _mm256_set1_pd(a[i]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d xi = _mm256_loadu_pd(x + k * kLanes);
    const __m256d yi = _mm256_add_pd(_mm256_mul_pd(vb[0], xi), z[0]);
    for (int i = 0; i + 1 < order; ++i) {
      z[i] = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(vb[i + 1], xi), _mm256_mul_pd(va[i + 1], yi)),
                           z[i + 1]);
    }
    z[order - 1] = _mm256_sub_pd(_mm256_mul_pd(vb[order], xi), _mm256_mul_pd(va[order], yi));
    _mm256_storeu_pd(y + k * kLanes, yi);
  }
  for (int i = 0; i < order; ++i) _mm256_storeu_pd(state + i * kLanes, z[i]);
}

void affine4(const double* base, const double* e, const double* ed, const double* kp,
             const double* kd, double* out, std::size_t n) {
  const __m256d vkp = _mm256_loadu_pd(kp);
  const __m256d vkd = _mm256_loadu_pd(kd);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k * kLanes;
    const __m256d p = _mm256_add_pd(_mm256_loadu_pd(base + i), _mm256_mul_pd(vkp, _mm256_loadu_pd(e + i)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(p, _mm256_mul_pd(vkd, _mm256_loadu_pd(ed + i))));
  }
}

void blend4(const double* a, const double* b, double wa, double wb, double* out,
            std::size_t n) {
  const __m256d va = _mm256_set1_pd(wa);
  const __m256d vb = _mm256_set1_pd(wb);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k * kLanes;
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(a + i)),
                                            _mm256_mul_pd(vb, _mm256_loadu_pd(b + i))));
  }
}

}  // namespace avx2_impl

const KernelTable& avx2_kernels_impl() {
  static const KernelTable table{avx2_impl::bezier4, avx2_impl::bezier_derivative4, avx2_impl::iir4, avx2_impl::affine4,
                                 avx2_impl::blend4};
  return table;
}

}  // namespace pronk::simd
