#include "deconvq/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace deconvq::kernels {

namespace {

const KernelTable kReference{Backend::reference, "reference", &reference::over_points,
                             &reference::over_freqs};
const KernelTable kPortable{Backend::portable, "portable", &portable::over_points,
                            &portable::over_freqs};
#if defined(DECONVQ_HAVE_AVX2)
const KernelTable kAvx2{Backend::avx2, "avx2", &avx2::over_points, &avx2::over_freqs};
#endif

const KernelTable* select_default()
{
  if (const char* env = std::getenv("DECONVQ_SIMD")) {
    const std::string_view want{env};
    if (want == "reference") {
      return &kReference;
    }
    if (want == "portable") {
      return &kPortable;
    }
    if (want == "avx2" && avx2_table() && cpu_supports_avx2()) {
      return avx2_table();
    }
  }
  if (avx2_table() && cpu_supports_avx2()) {
    return avx2_table();
  }
  return &kPortable;
}

std::atomic<const KernelTable*>& slot()
{
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

} // namespace

const KernelTable& reference_table() { return kReference; }

const KernelTable& portable_table() { return kPortable; }

const KernelTable* avx2_table()
{
#if defined(DECONVQ_HAVE_AVX2)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2()
{
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void force_backend(Backend backend)
{
  switch (backend) {
    case Backend::reference:
      slot().store(&kReference);
      break;
    case Backend::portable:
      slot().store(&kPortable);
      break;
    case Backend::avx2:
      if (avx2_table() && cpu_supports_avx2()) {
        slot().store(avx2_table());
      }
      break;
  }
}

} // namespace deconvq::kernels
