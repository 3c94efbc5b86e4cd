#include "svbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "svbm/boosting.hpp"
#include "svbm/errors.hpp"

namespace svbm {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t diag = 0;
    for (int k = 0; k < classes; ++k) diag += at(k, k);
    return diag;
}

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.size() != truths.size()) throw DataError("predictions and truths differ in length");
    if (predictions.empty()) throw DataError("accuracy of an empty set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truths[i];
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths,
                          int num_classes, std::vector<std::string> class_names) {
    if (predictions.size() != truths.size()) throw DataError("predictions and truths differ in length");
    if (num_classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
    if (class_names.empty()) {
        for (int k = 0; k < num_classes; ++k) class_names.push_back(std::to_string(k));
    }
    if (static_cast<int>(class_names.size()) != num_classes) {
        throw std::invalid_argument("class name count does not match class count");
    }
    ConfusionMatrix m{num_classes,
                      std::vector<std::size_t>(static_cast<std::size_t>(num_classes * num_classes), 0),
                      std::move(class_names)};
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int t = truths[i];
        const int p = predictions[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
            throw DataError("label out of range in confusion matrix");
        }
        ++m.counts[static_cast<std::size_t>(t * num_classes + p)];
    }
    return m;
}

std::string format_confusion_csv(const ConfusionMatrix& matrix) {
    std::string out = "truth";
    for (const auto& name : matrix.class_names) out += "," + name;
    out += '\n';
    for (int t = 0; t < matrix.classes; ++t) {
        out += matrix.class_names[static_cast<std::size_t>(t)];
        for (int p = 0; p < matrix.classes; ++p) out += "," + std::to_string(matrix.at(t, p));
        out += '\n';
    }
    return out;
}

std::string format_real(double value) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.9g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_trace_scalars(const TrainingTrace& trace) {
    std::string out = "round,error,alpha,beta,staged_accuracy\n";
    for (const auto& r : trace.rounds) {
        out += std::to_string(r.round) + ',' + format_real(r.error) + ',' + format_real(r.alpha) +
               ',' + format_real(r.beta) + ',' + format_real(r.train_accuracy_staged) + '\n';
    }
    return out;
}

std::string format_trace_weights(const TrainingTrace& trace) {
    std::string out = "round,bin_low,bin_high,count\n";
    for (const auto& r : trace.rounds) {
        const auto& w = r.weights_after.values;
        const double top = w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
        const double width = top / kHistogramBins;
        std::vector<std::size_t> counts(kHistogramBins, 0);
        for (double v : w) {
            int bin = width > 0.0 ? static_cast<int>(v / width) : 0;
            bin = std::clamp(bin, 0, kHistogramBins - 1);
            ++counts[static_cast<std::size_t>(bin)];
        }
        for (int b = 0; b < kHistogramBins; ++b) {
            const double low = width * b;
            const double high = b + 1 == kHistogramBins ? top : width * (b + 1);
            out += std::to_string(r.round) + ',' + format_real(low) + ',' + format_real(high) + ',' +
                   std::to_string(counts[static_cast<std::size_t>(b)]) + '\n';
        }
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failure on '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void export_trace(const TrainingTrace& trace, const std::filesystem::path& directory) {
    if (trace.rounds.empty()) throw std::invalid_argument("cannot export an empty trace");
    const auto scalars = format_trace_scalars(trace);
    const auto weights = format_trace_weights(trace);
    std::filesystem::create_directories(directory);
    write_file_atomic(directory / "trace_scalars.csv", scalars);
    write_file_atomic(directory / "trace_weights.csv", weights);
}

}  // namespace svbm
