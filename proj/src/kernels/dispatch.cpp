#include "pba/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "pba/errors.hpp"

namespace pba::kernels {
namespace {

const Backend* g_forced = nullptr;

const Backend& select() {
#if defined(__x86_64__) || defined(_M_X64)
  const char* env = std::getenv("PHOTOBA_SIMD");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return scalar_backend();
    if (std::strcmp(env, "avx2") == 0) return avx2_backend();
  }
  if (cpu_has_avx2()) return avx2_backend();
#endif
  return scalar_backend();
}

}  // namespace

const Backend& active() {
  if (g_forced != nullptr) return *g_forced;
  static const Backend& chosen = select();
  return chosen;
}

void force_backend(const char* name) {
  if (name == nullptr) {
    g_forced = nullptr;
    return;
  }
  if (std::strcmp(name, "scalar") == 0) {
    g_forced = &scalar_backend();
    return;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (std::strcmp(name, "avx2") == 0) {
    g_forced = &avx2_backend();
    return;
  }
#endif
  throw InvalidInputError("unknown kernel backend: " + std::string(name));
}

}  // namespace pba::kernels
