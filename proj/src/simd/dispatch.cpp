#include <atomic>
#include <cstdlib>
#include <string>

#include "gpb/error.hpp"
#include "gpb/simd/kernels.hpp"

namespace gpb::simd {

#ifndef GPB_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(GPB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "auto" || name.empty())
    return cpu_supports(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  throw InvalidArgument("unknown SIMD variant '" + std::string(name) + "'");
}

namespace {

const KernelTable* table_for(Isa isa) {
  if (!cpu_supports(isa))
    throw InvalidArgument("CPU does not support the requested SIMD variant");
  return isa == Isa::avx2 ? avx2_table() : &scalar_table();
}

const KernelTable* initial_table() {
  const char* env = std::getenv("GPB_SIMD");
  return table_for(parse_isa(env ? env : "auto"));
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(table_for(isa), std::memory_order_relaxed); }

}  // namespace gpb::simd
