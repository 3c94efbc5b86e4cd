#include "svbm/ecoc.hpp"

#include <algorithm>
#include <stdexcept>

#include "svbm/errors.hpp"

namespace svbm {

CodeMatrix::CodeMatrix(int classes, int columns, std::vector<std::int8_t> entries,
                       std::string scheme)
    : classes_(classes), columns_(columns), entries_(std::move(entries)), scheme_(std::move(scheme)) {
    if (classes_ < 2 || columns_ < 1 ||
        entries_.size() != static_cast<std::size_t>(classes_) * static_cast<std::size_t>(columns_)) {
        throw std::invalid_argument("code matrix shape is inconsistent");
    }
    for (int l = 0; l < columns_; ++l) {
        bool pos = false;
        bool neg = false;
        for (int k = 0; k < classes_; ++k) {
            const auto e = at(k, l);
            if (e < -1 || e > 1) throw std::invalid_argument("code entries must be -1, 0 or +1");
            pos = pos || e > 0;
            neg = neg || e < 0;
        }
        if (!pos || !neg) throw std::invalid_argument("every code column needs a +1 and a -1");
    }
    for (int a = 0; a < classes_; ++a) {
        for (int b = a + 1; b < classes_; ++b) {
            bool same = true;
            for (int l = 0; l < columns_ && same; ++l) same = at(a, l) == at(b, l);
            if (same) throw std::invalid_argument("code matrix has duplicate rows");
        }
    }
}

CodeMatrix build_codebook(int num_classes) {
    if (num_classes < 2) throw std::invalid_argument("ECOC needs at least 2 classes");
    const int columns = num_classes * (num_classes - 1) / 2;
    std::vector<std::int8_t> entries(static_cast<std::size_t>(num_classes * columns), 0);
    int l = 0;
    for (int a = 0; a < num_classes; ++a) {
        for (int b = a + 1; b < num_classes; ++b, ++l) {
            entries[static_cast<std::size_t>(a * columns + l)] = 1;
            entries[static_cast<std::size_t>(b * columns + l)] = -1;
        }
    }
    return CodeMatrix(num_classes, columns, std::move(entries), "one-vs-one");
}

std::size_t EcocModel::trained_columns() const {
    return static_cast<std::size_t>(std::count_if(
        learners.begin(), learners.end(), [](const auto& m) { return m.has_value(); }));
}

EcocModel train_ecoc(const Matrix& features, std::span<const int> labels, int num_classes,
                     std::span<const double> sample_weights, const SvmConfig& config) {
    const std::size_t n = features.rows();
    if (labels.size() != n || sample_weights.size() != n) {
        throw DataError("labels and weights must align with rows");
    }
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw DataError("label index out of range");
    }
    SvmConfig column_config = config;
    column_config.kernel = resolve_kernel(config, features);

    EcocModel model{build_codebook(num_classes), {}};
    model.learners.reserve(static_cast<std::size_t>(model.code.columns()));
    for (int l = 0; l < model.code.columns(); ++l) {
        std::vector<std::size_t> rows;
        std::vector<int> binary;
        std::vector<double> weights;
        double mass = 0.0;
        bool pos = false;
        bool neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = model.code.at(labels[i], l);
            if (e == 0) continue;
            rows.push_back(i);
            binary.push_back(e);
            weights.push_back(sample_weights[i]);
            mass += sample_weights[i];
            pos = pos || e > 0;
            neg = neg || e < 0;
        }
        if (!pos || !neg || !(mass > 0.0)) {
            model.learners.emplace_back(std::nullopt);
            continue;
        }
        for (auto& w : weights) w /= mass;
        try {
            model.learners.emplace_back(
                train_weighted_svm(features.select_rows(rows), binary, weights, column_config));
        } catch (const TrainingError&) {
            model.learners.emplace_back(std::nullopt);
        }
    }
    if (model.trained_columns() == 0) throw TrainingError("no ECOC column could be trained");
    return model;
}

std::vector<double> ecoc_losses(const EcocModel& model, std::span<const double> column_values) {
    const int K = model.code.classes();
    const int L = model.code.columns();
    std::vector<double> losses(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        double loss = 0.0;
        for (int l = 0; l < L; ++l) {
            const auto e = model.code.at(k, l);
            if (e == 0 || !model.learners[static_cast<std::size_t>(l)]) continue;
            loss += std::max(0.0, 1.0 - e * column_values[static_cast<std::size_t>(l)]);
        }
        losses[static_cast<std::size_t>(k)] = loss;
    }
    return losses;
}

int decode_losses(std::span<const double> losses) {
    int best = 0;
    for (std::size_t k = 1; k < losses.size(); ++k) {
        if (losses[k] < losses[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

std::vector<double> ecoc_column_values(const EcocModel& model, std::span<const double> x) {
    std::vector<double> values(model.learners.size(), 0.0);
    for (std::size_t l = 0; l < model.learners.size(); ++l) {
        if (model.learners[l]) values[l] = decision_value(*model.learners[l], x);
    }
    return values;
}

int predict_ecoc(const EcocModel& model, std::span<const double> x) {
    return decode_losses(ecoc_losses(model, ecoc_column_values(model, x)));
}

std::vector<int> predict_ecoc(const EcocModel& model, const Matrix& points) {
    const std::size_t L = model.learners.size();
    std::vector<std::vector<double>> per_column(L);
    for (std::size_t l = 0; l < L; ++l) {
        if (model.learners[l]) per_column[l] = decision_values(*model.learners[l], points);
    }
    std::vector<int> out(points.rows());
    std::vector<double> values(L, 0.0);
    for (std::size_t p = 0; p < points.rows(); ++p) {
        for (std::size_t l = 0; l < L; ++l) values[l] = per_column[l].empty() ? 0.0 : per_column[l][p];
        out[p] = decode_losses(ecoc_losses(model, values));
    }
    return out;
}

}  // namespace svbm
