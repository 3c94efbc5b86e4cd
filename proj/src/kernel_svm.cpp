#include "svbm/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "svbm/errors.hpp"
#include "svbm/simd/kernels.hpp"

namespace svbm {
namespace {

constexpr double kSupportThreshold = 1e-9;
constexpr double kMinClassMass = 1e-9;
constexpr double kTau = 1e-12;
constexpr std::size_t kFullMatrixLimit = 2048;

// Signed kernel rows Q_ik = y_i y_k K(x_i, x_k). Small problems keep the whole
// matrix; larger ones recompute the two rows each SMO step needs.
class KernelRows {
public:
    KernelRows(const Matrix& features, std::span<const int> labels, KernelSpec kernel)
        : n_(features.rows()),
          dims_(features.cols()),
          gamma_(kernel.gamma),
          labels_(labels),
          features_(features),
          columns_(features.transposed()) {
        if (n_ <= kFullMatrixLimit) {
            full_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) compute(i, {full_.data() + i * n_, n_});
        } else {
            scratch_[0].resize(n_);
            scratch_[1].resize(n_);
        }
    }

    std::span<const double> row(std::size_t i, int slot) {
        if (!full_.empty()) return {full_.data() + i * n_, n_};
        auto& buf = scratch_[slot];
        compute(i, buf);
        return buf;
    }

private:
    void compute(std::size_t i, std::span<double> out) const {
        simd::squared_distances(columns_, n_, features_.row(i), out);
        const double yi = labels_[i];
        for (std::size_t k = 0; k < n_; ++k) {
            out[k] = yi * labels_[k] * std::exp(-gamma_ * out[k]);
        }
    }

    std::size_t n_;
    std::size_t dims_;
    double gamma_;
    std::span<const int> labels_;
    const Matrix& features_;
    std::vector<double> columns_;
    std::vector<double> full_;
    std::vector<double> scratch_[2];
};

void check_labels(std::span<const int> labels, std::size_t n) {
    if (labels.size() != n) throw DataError("label count does not match rows");
    for (int y : labels) {
        if (y != 1 && y != -1) throw DataError("binary labels must be -1 or +1");
    }
}

}  // namespace

void KernelSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("kernel gamma must be positive and finite");
    }
}

void SvmConfig::validate() const {
    if (!(cost > 0.0) || !std::isfinite(cost)) throw std::invalid_argument("C must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_passes < 1) throw std::invalid_argument("max_passes must be at least 1");
    if (kernel) kernel->validate();
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, KernelSpec spec) {
    if (x.size() != z.size()) throw DataError("kernel arguments differ in dimension");
    double dist = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - z[j];
        dist = dist + diff * diff;
    }
    return std::exp(-spec.gamma * dist);
}

double auto_gamma(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (d == 0) throw DataError("no feature columns");
    double total_var = 0.0;
    if (n > 0) {
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += features(i, j);
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = features(i, j) - mean;
                ss += diff * diff;
            }
            total_var += ss / static_cast<double>(n);
        }
    }
    const double mean_var = total_var / static_cast<double>(d);
    if (!(mean_var > 1e-12) || !std::isfinite(mean_var)) return 1.0 / static_cast<double>(d);
    return 1.0 / (static_cast<double>(d) * mean_var);
}

KernelSpec resolve_kernel(const SvmConfig& config, const Matrix& features) {
    if (config.kernel) return *config.kernel;
    return KernelSpec{auto_gamma(features)};
}

std::vector<double> box_constraints(std::span<const double> sample_weights, double cost) {
    const double scale = cost * static_cast<double>(sample_weights.size());
    std::vector<double> box(sample_weights.size());
    std::transform(sample_weights.begin(), sample_weights.end(), box.begin(),
                   [scale](double w) { return scale * w; });
    return box;
}

DualSolution solve_dual(const Matrix& features, std::span<const int> labels,
                        std::span<const double> box, KernelSpec kernel, double tolerance,
                        int max_passes) {
    const std::size_t n = features.rows();
    check_labels(labels, n);
    if (box.size() != n) throw DataError("box constraint count does not match rows");
    kernel.validate();

    KernelRows rows(features, labels, kernel);
    DualSolution sol;
    sol.lambdas.assign(n, 0.0);
    auto& alpha = sol.lambdas;
    // Gradient of 1/2 l'Ql - sum(l); starts at -1 for l = 0.
    std::vector<double> grad(n, -1.0);

    const auto in_up = [&](std::size_t t) {
        return labels[t] > 0 ? alpha[t] < box[t] : alpha[t] > 0.0;
    };
    const auto in_low = [&](std::size_t t) {
        return labels[t] > 0 ? alpha[t] > 0.0 : alpha[t] < box[t];
    };

    const std::size_t max_iter = static_cast<std::size_t>(max_passes) * std::max<std::size_t>(n, 1);
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    sol.converged = false;
    for (;;) {
        std::size_t i = n;
        std::size_t j = n;
        up_max = -std::numeric_limits<double>::infinity();
        low_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -labels[t] * grad[t];
            if (in_up(t) && v > up_max) {
                up_max = v;
                i = t;
            }
            if (in_low(t) && v < low_min) {
                low_min = v;
                j = t;
            }
        }
        if (i == n || j == n || up_max - low_min < tolerance) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= max_iter) break;
        ++sol.iterations;

        const auto q_i = rows.row(i, 0);
        const auto q_j = rows.row(j, 1);
        const double c_i = box[i];
        const double c_j = box[j];
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        if (labels[i] != labels[j]) {
            double quad = q_i[i] + q_j[j] + 2.0 * q_i[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > c_i - c_j) {
                if (alpha[i] > c_i) {
                    alpha[i] = c_i;
                    alpha[j] = c_i - diff;
                }
            } else if (alpha[j] > c_j) {
                alpha[j] = c_j;
                alpha[i] = c_j + diff;
            }
        } else {
            double quad = q_i[i] + q_j[j] - 2.0 * q_i[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double total = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (total > c_i) {
                if (alpha[i] > c_i) {
                    alpha[i] = c_i;
                    alpha[j] = total - c_i;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = total;
            }
            if (total > c_j) {
                if (alpha[j] > c_j) {
                    alpha[j] = c_j;
                    alpha[i] = total - c_j;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = total;
            }
        }
        // Rounding in the clip arithmetic can leave values an ulp outside the box.
        alpha[i] = std::clamp(alpha[i], 0.0, c_i);
        alpha[j] = std::clamp(alpha[j], 0.0, c_j);

        simd::axpy2(grad, q_i, alpha[i] - old_i, q_j, alpha[j] - old_j);
    }

    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < box[t]) {
            free_sum += -labels[t] * grad[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        sol.bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(up_max) && std::isfinite(low_min)) {
        sol.bias = 0.5 * (up_max + low_min);
    } else {
        sol.bias = std::isfinite(up_max) ? up_max : (std::isfinite(low_min) ? low_min : 0.0);
    }
    return sol;
}

BinarySvmModel make_model(const Matrix& features, std::span<const int> labels,
                          const DualSolution& solution, KernelSpec kernel) {
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < solution.lambdas.size(); ++t) {
        if (solution.lambdas[t] > kSupportThreshold) keep.push_back(t);
    }
    if (keep.empty()) throw TrainingError("SVM solution has no support vectors");
    BinarySvmModel model;
    model.support_vectors = features.select_rows(keep);
    model.dual_coefficients.reserve(keep.size());
    for (auto t : keep) model.dual_coefficients.push_back(solution.lambdas[t] * labels[t]);
    model.bias = solution.bias;
    model.kernel = kernel;
    model.converged = solution.converged;
    return model;
}

BinarySvmModel train_weighted_svm(const Matrix& features, std::span<const int> labels,
                                  std::span<const double> sample_weights,
                                  const SvmConfig& config) {
    config.validate();
    const std::size_t n = features.rows();
    if (n == 0 || features.cols() == 0) throw DataError("empty training set");
    check_labels(labels, n);
    if (sample_weights.size() != n) throw DataError("weight count does not match rows");

    double mass_pos = 0.0;
    double mass_neg = 0.0;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t t = 0; t < n; ++t) {
        const double w = sample_weights[t];
        if (!std::isfinite(w) || w < 0.0) throw DataError("sample weights must be finite and >= 0");
        (labels[t] > 0 ? mass_pos : mass_neg) += w;
        (labels[t] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw TrainingError("single-class input to binary SVM");
    if (std::abs(mass_pos + mass_neg - 1.0) > 1e-6) {
        throw DataError("sample weights must sum to 1");
    }
    if (mass_pos < kMinClassMass || mass_neg < kMinClassMass) {
        throw TrainingError("degenerate sample weights: one class carries no weight");
    }

    const KernelSpec kernel = resolve_kernel(config, features);
    const auto box = box_constraints(sample_weights, config.cost);
    const auto solution = solve_dual(features, labels, box, kernel, config.tolerance, config.max_passes);
    return make_model(features, labels, solution, kernel);
}

double dual_objective(const Matrix& features, std::span<const int> labels,
                      std::span<const double> lambdas, KernelSpec kernel) {
    const std::size_t n = features.rows();
    check_labels(labels, n);
    if (lambdas.size() != n) throw DataError("multiplier count does not match rows");
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += lambdas[i];
        if (lambdas[i] == 0.0) continue;
        for (std::size_t k = 0; k < n; ++k) {
            if (lambdas[k] == 0.0) continue;
            quad += lambdas[i] * lambdas[k] * labels[i] * labels[k] *
                    rbf_kernel(features.row(i), features.row(k), kernel);
        }
    }
    return linear - 0.5 * quad;
}

std::vector<double> decision_values(const BinarySvmModel& model, const Matrix& points) {
    const std::size_t m = model.support_vectors.rows();
    if (points.cols() != model.dims()) {
        throw DataError("model expects " + std::to_string(model.dims()) +
                        " features, input has " + std::to_string(points.cols()));
    }
    const auto columns = model.support_vectors.transposed();
    std::vector<double> kvals(m);
    std::vector<double> out(points.rows());
    const double gamma = model.kernel.gamma;
    for (std::size_t p = 0; p < points.rows(); ++p) {
        simd::squared_distances(columns, m, points.row(p), kvals);
        for (auto& v : kvals) v = std::exp(-gamma * v);
        out[p] = simd::dot(model.dual_coefficients, kvals) + model.bias;
    }
    return out;
}

double decision_value(const BinarySvmModel& model, std::span<const double> x) {
    if (x.size() != model.dims()) {
        throw DataError("model expects " + std::to_string(model.dims()) +
                        " features, input has " + std::to_string(x.size()));
    }
    Matrix single(1, x.size(), std::vector<double>(x.begin(), x.end()));
    return decision_values(model, single)[0];
}

int predict_binary(const BinarySvmModel& model, std::span<const double> x) {
    return decision_value(model, x) >= 0.0 ? 1 : -1;
}

}  // namespace svbm
