#include "svbm/simd/kernels.hpp"

namespace svbm::simd::detail {
namespace {

void squared_distances_scalar(const double* columns, std::size_t n, const double* point,
                              std::size_t d, double* out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double* col = columns + j * n;
        const double p = point[j];
        for (std::size_t k = 0; k < n; ++k) {
            const double diff = col[k] - p;
            out[k] = out[k] + diff * diff;
        }
    }
}

void axpy2_scalar(double* y, const double* a, double ca, const double* b, double cb,
                  std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        y[k] = y[k] + (a[k] * ca + b[k] * cb);
    }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - n % 4;
    for (std::size_t k = 0; k < n4; k += 4) {
        for (std::size_t l = 0; l < 4; ++l) lane[l] = lane[l] + a[k + l] * b[k + l];
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k] * b[k];
    return total;
}

double sum_scalar(const double* a, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - n % 4;
    for (std::size_t k = 0; k < n4; k += 4) {
        for (std::size_t l = 0; l < 4; ++l) lane[l] = lane[l] + a[k + l];
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t k = n4; k < n; ++k) total = total + a[k];
    return total;
}

void divide_scalar(double* x, double s, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) x[k] = x[k] / s;
}

void residual_mix_scalar(double* x, const double* prev, double beta, std::size_t n) {
    const double denom = 1.0 + beta;
    for (std::size_t k = 0; k < n; ++k) x[k] = (x[k] + beta * prev[k]) / denom;
}

}  // namespace

const KernelTable scalar_table = {
    Isa::scalar,        squared_distances_scalar, axpy2_scalar, dot_scalar, sum_scalar,
    divide_scalar,      residual_mix_scalar,
};

}  // namespace svbm::simd::detail
