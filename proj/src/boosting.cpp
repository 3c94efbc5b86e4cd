#include "svbm/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "svbm/errors.hpp"
#include "svbm/metrics.hpp"
#include "svbm/simd/kernels.hpp"

namespace svbm {
namespace {

void check_aligned(std::size_t a, std::size_t b, std::size_t c) {
    if (a != b || a != c) throw DataError("weights, predictions and truths differ in length");
}

std::vector<std::size_t> weight_order(const WeightVector& weights) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return weights[a] > weights[b];
    });
    return order;
}

std::vector<int> vote(const std::vector<std::vector<int>>& predictions,
                      std::span<const double> alphas, int num_classes, std::size_t samples) {
    VoteTally tally(num_classes, samples);
    for (std::size_t t = 0; t < predictions.size(); ++t) tally.add(predictions[t], alphas[t]);
    return tally.predictions();
}

}  // namespace

void SvbmConfig::validate() const {
    if (n_classifiers < 1) throw std::invalid_argument("n_classifiers must be at least 1");
    if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) {
        throw std::invalid_argument("sample_ratio must lie in (0, 1]");
    }
    if (!(beta0 >= 0.0 && beta0 <= 1.0)) throw std::invalid_argument("beta0 must lie in [0, 1]");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be positive");
    }
    svm.validate();
}

WeightVector init_weights(std::size_t n) {
    if (n == 0) throw std::invalid_argument("cannot initialize weights for 0 samples");
    return normalize_weights(WeightVector{std::vector<double>(n, 1.0)});
}

std::size_t subsample_size(std::size_t n, double ratio) {
    // The small slack keeps products like 0.3 * 10 = 3.0000000000000004 at 3.
    const auto wanted = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    return std::min(n, std::max<std::size_t>(2, wanted));
}

std::vector<std::size_t> structured_subsample(const WeightVector& weights, double ratio,
                                              std::span<const int> labels, int num_classes,
                                              std::uint64_t seed, int round, SubsampleMode mode) {
    const std::size_t n = weights.size();
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("sample ratio must lie in (0, 1]");
    if (labels.size() != n) throw DataError("labels and weights differ in length");
    if (n < 2) throw DataError("need at least 2 samples to subsample");

    const auto order = weight_order(weights);
    const std::size_t m = subsample_size(n, ratio);
    const std::size_t base = n / m;
    const std::size_t extra = n % m;

    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(round + 1)));
    std::vector<bool> selected(n, false);
    for (std::size_t s = 0; s < m; ++s) {
        const std::size_t start = s * base + std::min(s, extra);
        const std::size_t len = base + (s < extra ? 1 : 0);
        std::size_t pick = start;
        if (mode == SubsampleMode::randomized) pick += static_cast<std::size_t>(rng() % len);
        selected[order[pick]] = true;
    }

    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw DataError("label index out of range");
        if (selected[i]) ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int c = 0; c < num_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        auto candidate = std::find_if(order.begin(), order.end(), [&](std::size_t i) {
            return !selected[i] && labels[i] == c;
        });
        if (candidate == order.end()) continue;  // class absent from the data
        auto victim = std::find_if(order.rbegin(), order.rend(), [&](std::size_t i) {
            return selected[i] && counts[static_cast<std::size_t>(labels[i])] >= 2;
        });
        if (victim != order.rend()) {
            selected[*victim] = false;
            --counts[static_cast<std::size_t>(labels[*victim])];
        }
        selected[*candidate] = true;
        ++counts[static_cast<std::size_t>(c)];
    }

    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < n; ++i) {
        if (selected[i]) out.push_back(i);
    }
    return out;
}

double compute_weighted_error(const WeightVector& weights, std::span<const int> predictions,
                              std::span<const int> truths) {
    check_aligned(weights.size(), predictions.size(), truths.size());
    double wrong = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (predictions[i] != truths[i]) wrong += weights[i];
    }
    const double total = simd::sum(weights.values);
    if (!(total > 0.0)) throw DataError("weights sum to zero");
    return wrong / total;
}

double clamp_error(double error) {
    if (std::isnan(error)) throw std::invalid_argument("weighted error is NaN");
    return std::clamp(error, kErrorFloor, kErrorCeiling);
}

double classifier_weight(double error) {
    const double e = clamp_error(error);
    return 0.5 * std::log((1.0 - e) / e);
}

WeightVector update_weights(const WeightVector& weights, double alpha,
                            std::span<const int> predictions, std::span<const int> truths,
                            double learning_rate) {
    check_aligned(weights.size(), predictions.size(), truths.size());
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    const double step = learning_rate * alpha;
    const double shrink = std::exp(-step);
    const double grow = std::exp(step);
    WeightVector out = weights;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values[i] *= predictions[i] == truths[i] ? shrink : grow;
    }
    return out;
}

WeightVector apply_residual(const WeightVector& weights, const WeightVector& prev, double beta) {
    if (weights.size() != prev.size()) throw DataError("weight vectors differ in length");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    WeightVector out = weights;
    simd::residual_mix(out.values, prev.values, beta);
    return out;
}

WeightVector normalize_weights(WeightVector weights) {
    const double total = simd::sum(weights.values);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw std::domain_error("cannot normalize weights with zero or non-finite sum");
    }
    simd::divide(weights.values, total);
    return weights;
}

double adjust_beta(double beta, int round, int n_classifiers, double accuracy,
                   double previous_accuracy) {
    if (round < 1 || round > n_classifiers) throw std::invalid_argument("round out of range");
    const double decay = 1.0 - static_cast<double>(round) / (2.0 * n_classifiers);
    if (accuracy < previous_accuracy) return std::min(1.0, beta * 1.05 * decay);
    return std::max(0.0, beta * 0.95 * decay);
}

VoteTally::VoteTally(int num_classes, std::size_t samples)
    : num_classes_(num_classes),
      samples_(samples),
      scores_(static_cast<std::size_t>(num_classes) * samples, 0.0) {}

void VoteTally::add(std::span<const int> predictions, double alpha) {
    if (predictions.size() != samples_) throw DataError("vote size mismatch");
    for (std::size_t i = 0; i < samples_; ++i) {
        const int k = predictions[i];
        if (k < 0 || k >= num_classes_) throw DataError("predicted class out of range");
        scores_[i * static_cast<std::size_t>(num_classes_) + static_cast<std::size_t>(k)] += alpha;
    }
}

std::vector<int> VoteTally::predictions() const {
    std::vector<int> out(samples_);
    const auto K = static_cast<std::size_t>(num_classes_);
    for (std::size_t i = 0; i < samples_; ++i) {
        const double* row = scores_.data() + i * K;
        std::size_t best = 0;
        for (std::size_t k = 1; k < K; ++k) {
            if (row[k] > row[best]) best = k;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

double staged_train_accuracy(const SvbmEnsemble& ensemble, const Dataset& data,
                             std::size_t learners) {
    if (learners == 0 || learners > ensemble.learners.size()) {
        throw std::invalid_argument("staged accuracy needs between 1 and T learners");
    }
    const Matrix x = apply_standardizer(data.features, ensemble.scaler);
    std::vector<std::vector<int>> preds;
    for (std::size_t t = 0; t < learners; ++t) preds.push_back(predict_ecoc(ensemble.learners[t], x));
    return accuracy(vote(preds, ensemble.alphas, ensemble.num_classes, data.size()), data.labels);
}

FitResult fit(const Dataset& train, const SvbmConfig& config) {
    config.validate();
    train.validate();

    FitResult result;
    SvbmEnsemble& ensemble = result.ensemble;
    ensemble.config = config;
    ensemble.num_classes = train.num_classes();
    ensemble.scaler = config.standardize ? fit_standardizer(train) : ScalerParams::identity(train.dims());
    const Matrix x = apply_standardizer(train.features, ensemble.scaler);
    const auto& labels = train.labels;
    const int K = train.num_classes();
    const int T = config.n_classifiers;

    WeightVector weights = init_weights(train.size());
    double beta = config.residual_enabled ? config.beta0 : 0.0;
    double previous_accuracy = 0.0;
    VoteTally tally(K, train.size());

    for (int t = 1; t <= T; ++t) {
        RoundRecord rec;
        rec.round = t;
        rec.beta_used = beta;
        rec.subsample_indices = structured_subsample(weights, config.sample_ratio, labels, K,
                                                     config.seed, t, config.subsample_mode);
        const auto& idx = rec.subsample_indices;

        std::vector<int> sub_labels;
        std::vector<double> sub_weights;
        sub_labels.reserve(idx.size());
        sub_weights.reserve(idx.size());
        for (auto i : idx) {
            sub_labels.push_back(labels[i]);
            sub_weights.push_back(weights[i]);
        }
        const double sub_mass = std::accumulate(sub_weights.begin(), sub_weights.end(), 0.0);
        for (auto& w : sub_weights) w /= sub_mass;

        EcocModel learner;
        try {
            learner = train_ecoc(x.select_rows(idx), sub_labels, K, sub_weights, config.svm);
        } catch (const TrainingError& err) {
            rec.trained = false;
            rec.skip_reason = err.what();
            rec.error_raw = rec.error = rec.alpha = std::nan("");
            rec.beta = beta;
            rec.train_accuracy_staged = previous_accuracy;
            rec.weights_after = weights;
            result.trace.rounds.push_back(std::move(rec));
            continue;
        }

        const auto predictions = predict_ecoc(learner, x);
        rec.error_raw = compute_weighted_error(weights, predictions, labels);
        rec.error = clamp_error(rec.error_raw);
        rec.alpha = classifier_weight(rec.error_raw);

        WeightVector updated = update_weights(weights, rec.alpha, predictions, labels,
                                              config.learning_rate);
        if (config.residual_enabled) updated = apply_residual(updated, weights, beta);
        weights = normalize_weights(std::move(updated));

        tally.add(predictions, rec.alpha);
        const double staged = accuracy(tally.predictions(), labels);
        if (config.residual_enabled) beta = adjust_beta(beta, t, T, staged, previous_accuracy);
        previous_accuracy = staged;

        rec.beta = beta;
        rec.train_accuracy_staged = staged;
        rec.weights_after = weights;
        ensemble.learners.push_back(std::move(learner));
        ensemble.alphas.push_back(rec.alpha);
        result.trace.rounds.push_back(std::move(rec));
    }
    if (ensemble.learners.empty()) throw TrainingError("no boosting round produced a learner");
    return result;
}

std::vector<int> predict_ensemble(const SvbmEnsemble& ensemble, const Matrix& points) {
    if (ensemble.learners.empty()) throw std::invalid_argument("empty ensemble");
    const Matrix x = apply_standardizer(points, ensemble.scaler);
    std::vector<std::vector<int>> preds;
    preds.reserve(ensemble.learners.size());
    for (const auto& learner : ensemble.learners) preds.push_back(predict_ecoc(learner, x));
    return vote(preds, ensemble.alphas, ensemble.num_classes, points.rows());
}

int predict_ensemble(const SvbmEnsemble& ensemble, std::span<const double> x) {
    Matrix single(1, x.size(), std::vector<double>(x.begin(), x.end()));
    return predict_ensemble(ensemble, single)[0];
}

}  // namespace svbm
