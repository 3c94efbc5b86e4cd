#pragma once

// Data-parallel inner loops shared by the SVM solver and the boosting loop.
//
// Every kernel has a scalar reference and optional AVX2 / NEON variants that
// are selected once at runtime. All variants produce bit-identical results:
// elementwise kernels use the same operation order per lane, and reductions
// follow a fixed 4-lane accumulation order (lane l takes indices k = l mod 4
// over the largest multiple-of-4 prefix, lanes combine as (l0 + l1) + (l2 + l3),
// then the tail is added in index order).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace svbm::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;
    // out[k] = sum_j (columns[j * n + k] - point[j])^2, j ascending.
    void (*squared_distances)(const double* columns, std::size_t n, const double* point,
                              std::size_t d, double* out);
    // y[k] += a[k] * ca + b[k] * cb
    void (*axpy2)(double* y, const double* a, double ca, const double* b, double cb,
                  std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    // x[k] /= s
    void (*divide)(double* x, double s, std::size_t n);
    // x[k] = (x[k] + beta * prev[k]) / (1 + beta)
    void (*residual_mix)(double* x, const double* prev, double beta, std::size_t n);
};

std::string_view isa_name(Isa isa) noexcept;

/// Kernel table in use. Chosen on first call: the widest ISA the CPU supports,
/// unless SVBM_FORCE_SCALAR is set in the environment.
const KernelTable& active() noexcept;

/// Table for a specific ISA, or nullptr when this build or CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

// Span wrappers over the active table.

inline void squared_distances(std::span<const double> columns, std::size_t n,
                              std::span<const double> point, std::span<double> out) {
    active().squared_distances(columns.data(), n, point.data(), point.size(), out.data());
}

inline void axpy2(std::span<double> y, std::span<const double> a, double ca,
                  std::span<const double> b, double cb) {
    active().axpy2(y.data(), a.data(), ca, b.data(), cb, y.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

inline void divide(std::span<double> x, double s) { active().divide(x.data(), s, x.size()); }

inline void residual_mix(std::span<double> x, std::span<const double> prev, double beta) {
    active().residual_mix(x.data(), prev.data(), beta, x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(SVBM_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(SVBM_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace svbm::simd
