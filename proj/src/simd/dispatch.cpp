#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "pronk/simd/kernels.hpp"

namespace pronk::simd {

#ifdef PRONK_HAVE_AVX2
const KernelTable& avx2_kernels_impl();
#endif

namespace {

Backend detect() {
  if (const char* env = std::getenv("PRONK_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::kAvx2;
  }
  return avx2_available() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

const char* name(Backend b) { return b == Backend::kAvx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(PRONK_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_available()) {
    throw std::runtime_error("AVX2 kernels requested but not available on this CPU");
  }
  current().store(b, std::memory_order_relaxed);
}

const KernelTable& avx2_kernels() {
#ifdef PRONK_HAVE_AVX2
  if (avx2_available()) return avx2_kernels_impl();
#endif
  throw std::runtime_error("AVX2 kernels not available");
}

const KernelTable& kernels_for(Backend b) {
  return b == Backend::kAvx2 ? avx2_kernels() : scalar_kernels();
}

const KernelTable& active_kernels() { return kernels_for(active_backend()); }

}  // namespace pronk::simd
