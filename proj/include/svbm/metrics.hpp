#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace svbm {

struct TrainingTrace;

/// Rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<std::size_t> counts;
    std::vector<std::string> class_names;

    std::size_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth * classes + predicted)];
    }
    std::size_t total() const;
    std::size_t trace() const;
};

double accuracy(std::span<const int> predictions, std::span<const int> truths);

/// Names default to "0".."K-1" when none are given.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths,
                          int num_classes, std::vector<std::string> class_names = {});

/// Header "truth,<name_0>,...,<name_K-1>", then one row per true class.
std::string format_confusion_csv(const ConfusionMatrix& matrix);

/// Fixed layout used by every real-valued CSV export: %.9g.
std::string format_real(double value);

inline constexpr int kHistogramBins = 20;

/// CSV bodies written by export_trace.
std::string format_trace_scalars(const TrainingTrace& trace);
std::string format_trace_weights(const TrainingTrace& trace);

/// Writes trace_scalars.csv and trace_weights.csv into `directory`.
void export_trace(const TrainingTrace& trace, const std::filesystem::path& directory);

/// Writes `contents` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace svbm
