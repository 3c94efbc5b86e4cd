#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svbm/matrix.hpp"

namespace svbm {

/// Feature matrix with class-index labels. Labels index into class_names,
/// which is sorted lexicographically by load_csv.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dims() const noexcept { return features.cols(); }
    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }

    /// Rows at the given indices, same class encoding.
    Dataset subset(std::span<const std::size_t> indices) const;

    /// Throws DataError when an invariant is broken (shape, label range,
    /// missing classes, non-finite values).
    void validate() const;
};

/// Which CSV column holds the label. An empty index means the last column.
struct LabelColumn {
    std::optional<std::size_t> index;

    static LabelColumn last() { return {}; }
    static LabelColumn at(std::size_t i) { return {i}; }
    /// Parses "last" or a 0-based index.
    static LabelColumn parse(const std::string& text);
};

Dataset load_csv(const std::filesystem::path& path, LabelColumn label_column, bool has_header);

/// Features-only table: every column is numeric. Throws DataError on empty input.
Matrix load_feature_csv(const std::filesystem::path& path, bool has_header);

/// Features plus the raw label strings, without encoding.
struct LabeledRows {
    Matrix features;
    std::vector<std::string> labels;
};
LabeledRows load_labeled_csv(const std::filesystem::path& path, LabelColumn label_column,
                             bool has_header);

/// Encodes raw labels as indices of their sorted distinct values.
Dataset encode_labels(LabeledRows rows);

/// Writes features followed by the label name in the last column, no header.
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct ScalerParams {
    std::vector<double> means;
    std::vector<double> std_devs;

    static ScalerParams identity(std::size_t dims);
    std::size_t dims() const noexcept { return means.size(); }
    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Per-column mean and population standard deviation; columns with
/// std < 1e-12 get std 1.
ScalerParams fit_standardizer(const Dataset& data);
ScalerParams fit_standardizer(const Matrix& features);

Dataset apply_standardizer(const Dataset& data, const ScalerParams& params);
Matrix apply_standardizer(const Matrix& features, const ScalerParams& params);
std::vector<double> apply_standardizer(std::span<const double> x, const ScalerParams& params);

/// Per-class split: round(test_fraction * count) rows of each class go to the
/// test side, clamped so both sides keep at least one row. Rows inside each
/// side keep their original order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

/// Row indices of the split, ascending: {train, test}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace svbm
