#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bpqm/kernels.hpp"

namespace bpqm::kern {
namespace {

bool avx2_available() {
#if defined(BPQM_BUILD_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick_default() {
#if defined(BPQM_BUILD_AVX2)
  if (avx2_available()) {
    const char* env = std::getenv("BPQM_KERNEL_BACKEND");
    if (env == nullptr || std::strcmp(env, "scalar") != 0) return &avx2_ops();
  }
#endif
  return &scalar_ops();
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& ops() {
  const Ops* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select_backend(std::string_view name) {
  if (name == "scalar") {
    g_active.store(&scalar_ops(), std::memory_order_release);
    return true;
  }
#if defined(BPQM_BUILD_AVX2)
  if (name == "avx2" && avx2_available()) {
    g_active.store(&avx2_ops(), std::memory_order_release);
    return true;
  }
#endif
  return false;
}

}  // namespace bpqm::kern
