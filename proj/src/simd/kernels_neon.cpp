#include <arm_neon.h>

#include "svbm/simd/kernels.hpp"

// Two float64x2 registers stand in for the four reduction lanes, so results
// match the scalar and AVX2 variants exactly.

namespace svbm::simd::detail {
namespace {

double combine_lanes(float64x2_t lo, float64x2_t hi) {
    return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
           (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

void squared_distances_neon(const double* columns, std::size_t n, const double* point,
                            std::size_t d, double* out) {
    const std::size_t n2 = n - n % 2;
    for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double* col = columns + j * n;
        const float64x2_t p = vdupq_n_f64(point[j]);
        for (std::size_t k = 0; k < n2; k += 2) {
            const float64x2_t diff = vsubq_f64(vld1q_f64(col + k), p);
            vst1q_f64(out + k, vaddq_f64(vld1q_f64(out + k), vmulq_f64(diff, diff)));
        }
        for (std::size_t k = n2; k < n; ++k) {
            const double diff = col[k] - point[j];
            out[k] = out[k] + diff * diff;
        }
    }
}

void axpy2_neon(double* y, const double* a, double ca, const double* b, double cb,
                std::size_t n) {
    const std::size_t n2 = n - n % 2;
    const float64x2_t va = vdupq_n_f64(ca);
    const float64x2_t vb = vdupq_n_f64(cb);
    for (std::size_t k = 0; k < n2; k += 2) {
        const float64x2_t step =
            vaddq_f64(vmulq_f64(vld1q_f64(a + k), va), vmulq_f64(vld1q_f64(b + k), vb));
        vst1q_f64(y + k, vaddq_f64(vld1q_f64(y + k), step));
    }
    for (std::size_t k = n2; k < n; ++k) y[k] = y[k] + (a[k] * ca + b[k] * cb);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < n4; k += 4) {
        lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k)));
        hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + k + 2), vld1q_f64(b + k + 2)));
    }
    double total = combine_lanes(lo, hi);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k] * b[k];
    return total;
}

double sum_neon(const double* a, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < n4; k += 4) {
        lo = vaddq_f64(lo, vld1q_f64(a + k));
        hi = vaddq_f64(hi, vld1q_f64(a + k + 2));
    }
    double total = combine_lanes(lo, hi);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k];
    return total;
}

void divide_neon(double* x, double s, std::size_t n) {
    const std::size_t n2 = n - n % 2;
    const float64x2_t vs = vdupq_n_f64(s);
    for (std::size_t k = 0; k < n2; k += 2) vst1q_f64(x + k, vdivq_f64(vld1q_f64(x + k), vs));
    for (std::size_t k = n2; k < n; ++k) x[k] = x[k] / s;
}

void residual_mix_neon(double* x, const double* prev, double beta, std::size_t n) {
    const std::size_t n2 = n - n % 2;
    const double denom = 1.0 + beta;
    const float64x2_t vbeta = vdupq_n_f64(beta);
    const float64x2_t vden = vdupq_n_f64(denom);
    for (std::size_t k = 0; k < n2; k += 2) {
        const float64x2_t mixed = vaddq_f64(vld1q_f64(x + k), vmulq_f64(vbeta, vld1q_f64(prev + k)));
        vst1q_f64(x + k, vdivq_f64(mixed, vden));
    }
    for (std::size_t k = n2; k < n; ++k) x[k] = (x[k] + beta * prev[k]) / denom;
}

}  // namespace

const KernelTable neon_table = {
    Isa::neon,    squared_distances_neon, axpy2_neon, dot_neon, sum_neon,
    divide_neon,  residual_mix_neon,
};

}  // namespace svbm::simd::detail
