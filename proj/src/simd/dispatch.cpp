#include "qcd/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace qcd::simd {
namespace {

bool cpu_has_avx2() {
#if defined(QCD_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    if (const char* env = std::getenv("QCD_ISA"); env != nullptr && std::string(env) == "scalar")
        return Isa::scalar;
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

const KernelTable& table_for(Isa isa) {
    return isa == Isa::avx2 ? avx2_kernels() : scalar_kernels();
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void select_isa(Isa isa) {
    if (!isa_available(isa)) isa = Isa::scalar;
    current().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels() { return table_for(active_isa()); }

}  // namespace qcd::simd
