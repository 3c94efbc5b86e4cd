#include <cstdlib>

#include "svbm/simd/kernels.hpp"

namespace svbm::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SVBM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& select_table() noexcept {
    const char* force = std::getenv("SVBM_FORCE_SCALAR");
    if (force != nullptr && *force != '\0' && *force != '0') return detail::scalar_table;
#if defined(SVBM_HAVE_AVX2)
    if (cpu_has_avx2()) return detail::avx2_table;
#endif
#if defined(SVBM_HAVE_NEON)
    return detail::neon_table;
#endif
    return detail::scalar_table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select_table();
    return table;
}

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return &detail::scalar_table;
        case Isa::avx2:
#if defined(SVBM_HAVE_AVX2)
            if (cpu_has_avx2()) return &detail::avx2_table;
#endif
            return nullptr;
        case Isa::neon:
#if defined(SVBM_HAVE_NEON)
            return &detail::neon_table;
#endif
            return nullptr;
    }
    return nullptr;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (table_for(isa) != nullptr) out.push_back(isa);
    }
    return out;
}

}  // namespace svbm::simd
