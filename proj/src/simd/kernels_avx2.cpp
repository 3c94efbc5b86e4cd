#include <immintrin.h>

#include "svbm/simd/kernels.hpp"

namespace svbm::simd::detail {
namespace {

double combine_lanes(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void squared_distances_avx2(const double* columns, std::size_t n, const double* point,
                            std::size_t d, double* out) {
    const std::size_t n4 = n - n % 4;
    for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double* col = columns + j * n;
        const __m256d p = _mm256_set1_pd(point[j]);
        for (std::size_t k = 0; k < n4; k += 4) {
            const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(col + k), p);
            _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(out + k),
                                                    _mm256_mul_pd(diff, diff)));
        }
        for (std::size_t k = n4; k < n; ++k) {
            const double diff = col[k] - point[j];
            out[k] = out[k] + diff * diff;
        }
    }
}

void axpy2_avx2(double* y, const double* a, double ca, const double* b, double cb,
                std::size_t n) {
    const std::size_t n4 = n - n % 4;
    const __m256d va = _mm256_set1_pd(ca);
    const __m256d vb = _mm256_set1_pd(cb);
    for (std::size_t k = 0; k < n4; k += 4) {
        const __m256d step = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + k), va),
                                           _mm256_mul_pd(_mm256_loadu_pd(b + k), vb));
        _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), step));
    }
    for (std::size_t k = n4; k < n; ++k) y[k] = y[k] + (a[k] * ca + b[k] * cb);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n4; k += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
    }
    double total = combine_lanes(acc);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k] * b[k];
    return total;
}

double sum_avx2(const double* a, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n4; k += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + k));
    double total = combine_lanes(acc);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k];
    return total;
}

void divide_avx2(double* x, double s, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    const __m256d vs = _mm256_set1_pd(s);
    for (std::size_t k = 0; k < n4; k += 4) {
        _mm256_storeu_pd(x + k, _mm256_div_pd(_mm256_loadu_pd(x + k), vs));
    }
    for (std::size_t k = n4; k < n; ++k) x[k] = x[k] / s;
}

void residual_mix_avx2(double* x, const double* prev, double beta, std::size_t n) {
    const std::size_t n4 = n - n % 4;
    const double denom = 1.0 + beta;
    const __m256d vbeta = _mm256_set1_pd(beta);
    const __m256d vden = _mm256_set1_pd(denom);
    for (std::size_t k = 0; k < n4; k += 4) {
        const __m256d mixed = _mm256_add_pd(_mm256_loadu_pd(x + k),
                                            _mm256_mul_pd(vbeta, _mm256_loadu_pd(prev + k)));
        _mm256_storeu_pd(x + k, _mm256_div_pd(mixed, vden));
    }
    for (std::size_t k = n4; k < n; ++k) x[k] = (x[k] + beta * prev[k]) / denom;
}

}  // namespace

const KernelTable avx2_table = {
    Isa::avx2,    squared_distances_avx2, axpy2_avx2, dot_avx2, sum_avx2,
    divide_avx2,  residual_mix_avx2,
};

}  // namespace svbm::simd::detail
