// Runtime ISA selection. The choice is made once, on first use, from the
// CPU's capabilities, unless CMDISTILL_ISA forces a variant.

#include "cmd/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "cmd/error.hpp"

namespace cmd::kern {

namespace {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("CMDISTILL_ISA")) {
    std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
      if (want == isa_name(isa) && isa_available(isa)) return isa;
    // Unknown or unsupported request: fall through to autodetect.
  }
  return best_isa();
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

Isa best_isa() {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa))
    throw InvalidInput("ISA " + isa_name(isa) + " not available on this CPU");
  active_slot().store(isa, std::memory_order_relaxed);
}

const Ops& ops_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return detail::scalar_ops;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::avx2_ops;
#else
      break;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return detail::neon_ops;
#else
      break;
#endif
  }
  throw InvalidInput("ISA " + isa_name(isa) + " not compiled in");
}

const Ops& ops() { return ops_for(active_isa()); }

}  // namespace cmd::kern
