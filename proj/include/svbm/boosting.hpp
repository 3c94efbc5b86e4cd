#pragma once

// Support Vector Boosting Machine: AdaBoost over ECOC/RBF-SVM weak learners
// trained on structured subsamples, with a residual connection between the
// sample weights of consecutive rounds and an adaptive mixing weight beta.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svbm/data_io.hpp"
#include "svbm/ecoc.hpp"
#include "svbm/kernel_svm.hpp"

namespace svbm {

/// Bounds applied to the weighted error before computing alpha.
inline constexpr double kErrorFloor = 1e-10;
inline constexpr double kErrorCeiling = 0.4999;

enum class SubsampleMode {
    /// Head of each stratum of the weight-sorted order.
    structured,
    /// Uniform pick inside each stratum, seeded by (seed, round).
    randomized,
};

struct SvbmConfig {
    int n_classifiers = 10;
    double sample_ratio = 0.5;
    double beta0 = 0.5;
    bool residual_enabled = true;
    SvmConfig svm;
    std::uint64_t seed = 42;
    /// Multiplier on alpha inside the weight update; 1 reproduces plain AdaBoost.
    double learning_rate = 1.0;
    bool standardize = true;
    SubsampleMode subsample_mode = SubsampleMode::structured;

    void validate() const;
    friend bool operator==(const SvbmConfig&, const SvbmConfig&) = default;
};

struct WeightVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

struct RoundRecord {
    int round = 0;
    /// False when the round's learner could not be trained; weights and beta
    /// then carry over unchanged.
    bool trained = true;
    std::string skip_reason;
    double error_raw = 0.0;
    /// Clamped to [kErrorFloor, kErrorCeiling].
    double error = 0.0;
    double alpha = 0.0;
    /// Beta used for this round's residual mixing.
    double beta_used = 0.0;
    /// Beta after this round's adjustment.
    double beta = 0.0;
    std::vector<std::size_t> subsample_indices;
    double train_accuracy_staged = 0.0;
    WeightVector weights_after;
};

struct TrainingTrace {
    std::vector<RoundRecord> rounds;
};

struct SvbmEnsemble {
    std::vector<EcocModel> learners;
    std::vector<double> alphas;
    SvbmConfig config;
    ScalerParams scaler;
    int num_classes = 0;

    std::size_t dims() const noexcept { return scaler.dims(); }
};

struct FitResult {
    SvbmEnsemble ensemble;
    TrainingTrace trace;
};

/// Uniform 1/n.
WeightVector init_weights(std::size_t n);

/// Number of samples drawn per round: min(n, max(2, ceil(ratio * n))).
std::size_t subsample_size(std::size_t n, double ratio);

/// Indices (ascending) of one round's training subsample. The weight-sorted
/// order (descending weight, ascending index on ties) is cut into
/// subsample_size() contiguous strata whose sizes differ by at most one, and one
/// index is taken per stratum. Classes missing from the pick are then added by
/// swapping out the lowest-weight picks of classes that remain covered.
std::vector<std::size_t> structured_subsample(const WeightVector& weights, double ratio,
                                              std::span<const int> labels, int num_classes,
                                              std::uint64_t seed = 0, int round = 0,
                                              SubsampleMode mode = SubsampleMode::structured);

/// sum(w_i * [pred_i != truth_i]) / sum(w_i)
double compute_weighted_error(const WeightVector& weights, std::span<const int> predictions,
                              std::span<const int> truths);

double clamp_error(double error);

/// 0.5 * ln((1 - e) / e) after clamping e.
double classifier_weight(double error);

/// Correct samples scale by exp(-rate * alpha), misclassified ones by exp(+rate * alpha).
/// The result is not normalized.
WeightVector update_weights(const WeightVector& weights, double alpha,
                            std::span<const int> predictions, std::span<const int> truths,
                            double learning_rate = 1.0);

/// (w + beta * prev) / (1 + beta)
WeightVector apply_residual(const WeightVector& weights, const WeightVector& prev, double beta);

WeightVector normalize_weights(WeightVector weights);

/// Beta schedule: a drop in staged accuracy multiplies beta by
/// 1.05 * (1 - t / 2T) capped at 1, anything else by 0.95 * (1 - t / 2T)
/// floored at 0.
double adjust_beta(double beta, int round, int n_classifiers, double accuracy,
                   double previous_accuracy);

/// Running alpha-weighted vote over a fixed set of samples.
class VoteTally {
public:
    VoteTally(int num_classes, std::size_t samples);

    void add(std::span<const int> predictions, double alpha);
    /// Highest-scoring class per sample; ties go to the lowest class index.
    std::vector<int> predictions() const;

private:
    int num_classes_;
    std::size_t samples_;
    std::vector<double> scores_;
};

/// Accuracy on `data` (raw features) of the vote of the first `learners` members.
double staged_train_accuracy(const SvbmEnsemble& ensemble, const Dataset& data,
                             std::size_t learners);

FitResult fit(const Dataset& train, const SvbmConfig& config);

/// Standardizes x with the ensemble's scaler, then takes the alpha-weighted vote.
int predict_ensemble(const SvbmEnsemble& ensemble, std::span<const double> x);
std::vector<int> predict_ensemble(const SvbmEnsemble& ensemble, const Matrix& points);

}  // namespace svbm
