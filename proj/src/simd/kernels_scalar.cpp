#include "pronk/simd/kernels.hpp"

namespace pronk::simd {
namespace scalar_impl {

void bezier4(const double* cols, int n_cols, double s, double* out) {
  double work[(kMaxBezierOrder + 1) * kLanes];
  for (int i = 0; i < n_cols * kLanes; ++i) work[i] = cols[i];
  const double t = 1.0 - s;
  for (int r = n_cols - 1; r > 0; --r) {
    for (int i = 0; i < r; ++i) {
      for (int l = 0; l < kLanes; ++l) {
        work[i * kLanes + l] = t * work[i * kLanes + l] + s * work[(i + 1) * kLanes + l];
      }
    }
  }
  for (int l = 0; l < kLanes; ++l) out[l] = work[l];
}

void bezier_derivative4(const double* cols, int n_cols, double s, double* out) {
  if (n_cols < 2) {
    for (int l = 0; l < kLanes; ++l) out[l] = 0.0;
    return;
  }
  double diff[kMaxBezierOrder * kLanes];
  for (int i = 0; i + 1 < n_cols; ++i) {
    for (int l = 0; l < kLanes; ++l) {
      diff[i * kLanes + l] = cols[(i + 1) * kLanes + l] - cols[i * kLanes + l];
    }
  }
  bezier4(diff, n_cols - 1, s, out);
  const double order = static_cast<double>(n_cols - 1);
  for (int l = 0; l < kLanes; ++l) out[l] = order * out[l];
}

void iir4(const double* b, const double* a, int order, const double* x, double* y,
          std::size_t n, double* z) {
  for (std::size_t k = 0; k < n; ++k) {
    for (int l = 0; l < kLanes; ++l) {
      const double xi = x[k * kLanes + l];
      const double yi = b[0] * xi + z[l];
      for (int i = 0; i + 1 < order; ++i) {
        z[i * kLanes + l] = (b[i + 1] * xi - a[i + 1] * yi) + z[(i + 1) * kLanes + l];
      }
      z[(order - 1) * kLanes + l] = b[order] * xi - a[order] * yi;
      y[k * kLanes + l] = yi;
    }
  }
}

void affine4(const double* base, const double* e, const double* ed, const double* kp,
             const double* kd, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    for (int l = 0; l < kLanes; ++l) {
      const std::size_t i = k * kLanes + l;
      out[i] = (base[i] + kp[l] * e[i]) + kd[l] * ed[i];
    }
  }
}

void blend4(const double* a, const double* b, double wa, double wb, double* out,
            std::size_t n) {
  for (std::size_t i = 0; i < n * kLanes; ++i) out[i] = wa * a[i] + wb * b[i];
}

}  // namespace scalar_impl

const KernelTable& scalar_kernels() {
  static const KernelTable table{scalar_impl::bezier4, scalar_impl::bezier_derivative4, scalar_impl::iir4, scalar_impl::affine4,
                                 scalar_impl::blend4};
  return table;
}

}  // namespace pronk::simd
