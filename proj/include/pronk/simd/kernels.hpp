#pragma once

// Four-lane arithmetic kernels. Every signal handled by the controller has one
// channel per actuated joint (thigh_F, calf_F, thigh_R, calf_R), so the inner
// loops run on four interleaved doubles: one AVX2 register per sample.
//
// Layout: a "lane block" is 4 contiguous doubles. Bezier coefficient matrices
// are column-major 4 x (order+1), so column i is lane block i. Signals are
// sample-major: sample n occupies [4n, 4n+4).
//
// The scalar variant is the reference. The AVX2 variant performs the same
// IEEE operations in the same order and is required to match it bit for bit
// (FMA contraction is disabled project-wide).

#include <cstddef>

namespace pronk::simd {

inline constexpr int kLanes = 4;
// Upper bound on Bezier order supported by the stack-allocated kernels.
inline constexpr int kMaxBezierOrder = 15;
inline constexpr int kMaxFilterOrder = 8;

enum class Backend { kScalar, kAvx2 };

const char* name(Backend b);

// True when the AVX2 variant was compiled in and the CPU reports AVX2.
bool avx2_available();

// Backend used by the free functions below. Defaults to the best available;
// the PRONK_SIMD environment variable ("scalar" or "avx2") overrides it.
Backend active_backend();

// Override the active backend (tests). Requesting AVX2 on a machine without
// it throws std::runtime_error.
void set_backend(Backend b);

struct KernelTable {
  // out = Bezier value of each lane at s (de Casteljau).
  void (*bezier4)(const double* cols, int n_cols, double s, double* out);
  // out = d/ds of the Bezier curve of each lane at s.
  void (*bezier_derivative4)(const double* cols, int n_cols, double s, double* out);
  // Direct-form-II-transposed IIR over n samples. b and a have order+1 taps
  // with a[0] == 1. state holds order lane blocks and is updated in place.
  void (*iir4)(const double* b, const double* a, int order, const double* x, double* y,
               std::size_t n, double* state);
  // out = base + kp .* e + kd .* ed, per sample.
  void (*affine4)(const double* base, const double* e, const double* ed, const double* kp,
                  const double* kd, double* out, std::size_t n);
  // out = wa * a + wb * b over n lane blocks.
  void (*blend4)(const double* a, const double* b, double wa, double wb, double* out,
                 std::size_t n);
};

const KernelTable& scalar_kernels();
// Only valid when avx2_available().
const KernelTable& avx2_kernels();
const KernelTable& kernels_for(Backend b);
const KernelTable& active_kernels();

inline void bezier4(const double* cols, int n_cols, double s, double* out) {
  active_kernels().bezier4(cols, n_cols, s, out);
}
inline void bezier_derivative4(const double* cols, int n_cols, double s, double* out) {
  active_kernels().bezier_derivative4(cols, n_cols, s, out);
}
inline void iir4(const double* b, const double* a, int order, const double* x, double* y,
                 std::size_t n, double* state) {
  active_kernels().iir4(b, a, order, x, y, n, state);
}
inline void affine4(const double* base, const double* e, const double* ed, const double* kp,
                    const double* kd, double* out, std::size_t n) {
  active_kernels().affine4(base, e, ed, kp, kd, out, n);
}
inline void blend4(const double* a, const double* b, double wa, double wb, double* out,
                   std::size_t n) {
  active_kernels().blend4(a, b, wa, wb, out, n);
}

}  // namespace pronk::simd
