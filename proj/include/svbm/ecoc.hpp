#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svbm/kernel_svm.hpp"
#include "svbm/matrix.hpp"

namespace svbm {

/// K x L code over {-1, 0, +1}. Row k is the codeword of class k; column l
/// defines binary problem l.
class CodeMatrix {
public:
    CodeMatrix() = default;
    CodeMatrix(int classes, int columns, std::vector<std::int8_t> entries, std::string scheme);

    int classes() const noexcept { return classes_; }
    int columns() const noexcept { return columns_; }
    const std::string& scheme() const noexcept { return scheme_; }
    std::int8_t at(int k, int l) const { return entries_[static_cast<std::size_t>(k * columns_ + l)]; }
    std::span<const std::int8_t> entries() const noexcept { return entries_; }

    friend bool operator==(const CodeMatrix&, const CodeMatrix&) = default;

private:
    int classes_ = 0;
    int columns_ = 0;
    std::vector<std::int8_t> entries_;
    std::string scheme_;
};

/// One-vs-one code: column order is (0 vs 1), (0 vs 2), ..., (K-2 vs K-1),
/// with +1 on the first class of the pair and -1 on the second.
CodeMatrix build_codebook(int num_classes);

/// One multiclass weak learner. A column whose subproblem was single-class
/// during training holds no learner and adds nothing to any decoding loss.
struct EcocModel {
    CodeMatrix code;
    std::vector<std::optional<BinarySvmModel>> learners;

    int classes() const noexcept { return code.classes(); }
    std::size_t trained_columns() const;
};

/// Trains one weighted SVM per code column on the rows whose code entry is
/// non-zero, with weights renormalized over those rows. `kernel` overrides
/// config.kernel; when neither is set, gamma comes from auto_gamma(features).
/// Throws TrainingError if no column could be trained.
EcocModel train_ecoc(const Matrix& features, std::span<const int> labels, int num_classes,
                     std::span<const double> sample_weights, const SvmConfig& config);

/// Hinge loss of every class codeword: sum_l max(0, 1 - code(k, l) * f_l).
/// Zero entries and empty columns contribute nothing.
std::vector<double> ecoc_losses(const EcocModel& model, std::span<const double> column_values);

/// Lowest-loss class; ties go to the lowest index.
int decode_losses(std::span<const double> losses);

/// Decision value of every trained column at x (0 for empty columns).
std::vector<double> ecoc_column_values(const EcocModel& model, std::span<const double> x);

int predict_ecoc(const EcocModel& model, std::span<const double> x);
std::vector<int> predict_ecoc(const EcocModel& model, const Matrix& points);

}  // namespace svbm
