#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "svbm/matrix.hpp"

namespace svbm {

/// RBF kernel width: K(x, z) = exp(-gamma * |x - z|^2).
struct KernelSpec {
    double gamma = 1.0;

    void validate() const;
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct SvmConfig {
    double cost = 1.0;
    /// Stopping threshold on the maximal KKT violation.
    double tolerance = 1e-3;
    /// The solver gives up after max_passes * N pair updates.
    int max_passes = 200;
    /// Empty means "auto": see auto_gamma().
    std::optional<KernelSpec> kernel;

    void validate() const;
    friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

struct BinarySvmModel {
    Matrix support_vectors;
    /// lambda_i * y_i for each support vector.
    std::vector<double> dual_coefficients;
    double bias = 0.0;
    KernelSpec kernel;
    /// False when the solver hit its iteration cap; the model is the last iterate.
    bool converged = true;

    std::size_t dims() const noexcept { return support_vectors.cols(); }
};

/// Lagrange multipliers and bias of one solved dual problem.
struct DualSolution {
    std::vector<double> lambdas;
    double bias = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

double rbf_kernel(std::span<const double> x, std::span<const double> z, KernelSpec spec);

/// 1 / (d * mean population variance of the columns), or 1 / d when the
/// features carry no variance.
double auto_gamma(const Matrix& features);

/// Config kernel if set, auto_gamma(features) otherwise.
KernelSpec resolve_kernel(const SvmConfig& config, const Matrix& features);

/// Per-sample upper bounds C_i = cost * N * w_i.
std::vector<double> box_constraints(std::span<const double> sample_weights, double cost);

/// SMO on the dual: maximize sum(l) - 1/2 sum_ij l_i l_j y_i y_j K_ij subject to
/// 0 <= l_i <= box_i and sum(l_i y_i) = 0. Working pairs are chosen by the
/// first-order maximal-violating-pair rule with lowest-index tie-breaking.
DualSolution solve_dual(const Matrix& features, std::span<const int> labels,
                        std::span<const double> box, KernelSpec kernel, double tolerance,
                        int max_passes);

/// Weighted soft-margin SVM. Labels are -1/+1; weights are non-negative and sum
/// to 1. Throws TrainingError for single-class or degenerate weight input.
BinarySvmModel train_weighted_svm(const Matrix& features, std::span<const int> labels,
                                  std::span<const double> sample_weights,
                                  const SvmConfig& config);

/// Keeps points with lambda > 1e-9 as support vectors.
BinarySvmModel make_model(const Matrix& features, std::span<const int> labels,
                          const DualSolution& solution, KernelSpec kernel);

double dual_objective(const Matrix& features, std::span<const int> labels,
                      std::span<const double> lambdas, KernelSpec kernel);

double decision_value(const BinarySvmModel& model, std::span<const double> x);
std::vector<double> decision_values(const BinarySvmModel& model, const Matrix& points);

/// Sign of the decision value; an exact zero maps to +1.
int predict_binary(const BinarySvmModel& model, std::span<const double> x);

}  // namespace svbm
