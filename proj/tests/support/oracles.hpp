#pragma once

// Reference computations used to check the library. They deliberately avoid
// the library's numeric paths (no SIMD kernels, no SMO, own Gram matrices).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "svbm/boosting.hpp"
#include "svbm/data_io.hpp"
#include "svbm/ecoc.hpp"
#include "svbm/kernel_svm.hpp"

namespace svbm::oracle {

inline std::vector<double> gram(const Matrix& x, double gamma) {
    const std::size_t n = x.rows();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double dist = 0.0L;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const long double diff = static_cast<long double>(x(i, c)) - x(j, c);
                dist += diff * diff;
            }
            k[i * n + j] = static_cast<double>(std::exp(-static_cast<long double>(gamma) * dist));
        }
    }
    return k;
}

inline double objective(const std::vector<double>& q, const std::vector<double>& lambda) {
    const std::size_t n = lambda.size();
    long double lin = 0.0L;
    long double quad = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        lin += lambda[i];
        for (std::size_t j = 0; j < n; ++j) quad += static_cast<long double>(lambda[i]) * lambda[j] * q[i * n + j];
    }
    return static_cast<double>(lin - 0.5L * quad);
}

/// Euclidean projection onto {0 <= l <= box, sum(y l) = 0} by bisection on
/// the multiplier of the equality constraint.
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                                   const std::vector<double>& box) {
    const std::size_t n = v.size();
    const auto at = [&](double tau, std::vector<double>& out) {
        double h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::clamp(v[i] - tau * y[i], 0.0, box[i]);
            h += y[i] * out[i];
        }
        return h;
    };
    double span = 1.0;
    for (std::size_t i = 0; i < n; ++i) span = std::max(span, std::abs(v[i]) + box[i]);
    double lo = -span;
    double hi = span;
    std::vector<double> out(n);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (at(mid, out) > 0.0) lo = mid; else hi = mid;
    }
    at(0.5 * (lo + hi), out);
    return out;
}

/// Accelerated projected-gradient ascent on the weighted SVM dual, with
/// gradient restarts. Returns the multipliers.
inline std::vector<double> projected_gradient_dual(const Matrix& x, const std::vector<int>& y,
                                                   const std::vector<double>& box, double gamma,
                                                   int max_iter = 400000) {
    const std::size_t n = x.rows();
    const auto k = gram(x, gamma);
    std::vector<double> q(n * n);
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            q[i * n + j] = y[i] * y[j] * k[i * n + j];
            row += std::abs(q[i * n + j]);
        }
        lipschitz = std::max(lipschitz, row);
    }
    const double step = 1.0 / lipschitz;
    std::vector<double> lam(n, 0.0), prev(n, 0.0), z(n, 0.0), g(n);
    double t = 1.0;
    double best = objective(q, lam);
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 1.0;
            for (std::size_t j = 0; j < n; ++j) s -= q[i * n + j] * z[j];
            g[i] = z[i] + step * s;
        }
        prev = lam;
        lam = project(g, y, box);
        // Restart momentum when it points against the ascent direction.
        double dir = 0.0;
        for (std::size_t i = 0; i < n; ++i) dir += (z[i] - lam[i]) * (lam[i] - prev[i]);
        if (dir > 0.0) t = 1.0;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i) z[i] = lam[i] + (t - 1.0) / t_next * (lam[i] - prev[i]);
        t = t_next;
        if (it % 200 == 199) {
            const double obj = objective(q, lam);
            stall = obj - best < 1e-14 ? stall + 1 : 0;
            best = std::max(best, obj);
            if (stall >= 5) break;
        }
    }
    return lam;
}

inline double dual_objective(const Matrix& x, const std::vector<int>& y,
                             const std::vector<double>& lambda, double gamma) {
    const std::size_t n = x.rows();
    const auto k = gram(x, gamma);
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) q[i * n + j] = y[i] * y[j] * k[i * n + j];
    }
    return objective(q, lambda);
}

struct KktReport {
    double worst = 0.0;        // largest violation of the margin conditions
    double balance = 0.0;      // |sum(l y)|
    double box_excess = 0.0;   // largest amount outside [0, box]
};

/// Margin conditions recomputed from scratch: y f >= 1 - tol at l = 0,
/// |y f - 1| <= tol for free multipliers, y f <= 1 + tol at the upper bound.
/// Points with a zero box carry no condition.
inline KktReport kkt(const Matrix& x, const std::vector<int>& y, const std::vector<double>& box,
                     const std::vector<double>& lambda, double bias, double gamma) {
    const std::size_t n = x.rows();
    const auto k = gram(x, gamma);
    KktReport r;
    long double bal = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        bal += static_cast<long double>(lambda[i]) * y[i];
        r.box_excess = std::max({r.box_excess, -lambda[i], lambda[i] - box[i]});
        if (box[i] == 0.0) continue;
        long double f = bias;
        for (std::size_t j = 0; j < n; ++j) f += static_cast<long double>(lambda[j]) * y[j] * k[i * n + j];
        const double margin = static_cast<double>(y[i] * f) - 1.0;
        double violation = 0.0;
        if (lambda[i] <= 0.0) {
            violation = std::max(0.0, -margin);
        } else if (lambda[i] >= box[i]) {
            violation = std::max(0.0, margin);
        } else {
            violation = std::abs(margin);
        }
        r.worst = std::max(r.worst, violation);
    }
    r.balance = static_cast<double>(std::abs(bal));
    return r;
}

/// Enumerates every codeword row and its hinge loss; lowest loss wins, lowest index on ties.
inline int brute_force_decode(const EcocModel& model, std::span<const double> x) {
    int best = -1;
    double best_loss = 0.0;
    for (int k = 0; k < model.code.classes(); ++k) {
        double loss = 0.0;
        for (int l = 0; l < model.code.columns(); ++l) {
            const auto& learner = model.learners[static_cast<std::size_t>(l)];
            const int e = model.code.at(k, l);
            if (e == 0 || !learner) continue;
            double f = learner->bias;
            for (std::size_t m = 0; m < learner->support_vectors.rows(); ++m) {
                double dist = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double diff = learner->support_vectors(m, j) - x[j];
                    dist += diff * diff;
                }
                f += learner->dual_coefficients[m] * std::exp(-learner->kernel.gamma * dist);
            }
            loss += std::max(0.0, 1.0 - e * f);
        }
        if (best < 0 || loss < best_loss) {
            best = k;
            best_loss = loss;
        }
    }
    return best;
}

// Boosting formula references, evaluated in long double.

inline double weighted_error(const std::vector<double>& w, const std::vector<int>& pred,
                             const std::vector<int>& truth) {
    long double wrong = 0.0L, total = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) {
        total += w[i];
        if (pred[i] != truth[i]) wrong += w[i];
    }
    return static_cast<double>(wrong / total);
}

inline double alpha(double error) {
    const long double e = std::min(0.4999L, std::max(1e-10L, static_cast<long double>(error)));
    return static_cast<double>(0.5L * std::log((1.0L - e) / e));
}

inline std::vector<double> reweight(const std::vector<double>& w, double a, const std::vector<int>& pred,
                                    const std::vector<int>& truth) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const long double sign = pred[i] == truth[i] ? 1.0L : -1.0L;
        out[i] = static_cast<double>(w[i] * std::exp(-static_cast<long double>(a) * sign));
    }
    return out;
}

inline std::vector<double> residual(const std::vector<double>& w, const std::vector<double>& prev, double beta) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = static_cast<double>((w[i] + static_cast<long double>(beta) * prev[i]) / (1.0L + beta));
    }
    return out;
}

inline std::vector<double> normalize(const std::vector<double>& w) {
    long double total = 0.0L;
    for (double v : w) total += v;
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<double>(w[i] / total);
    return out;
}

inline double beta_step(double beta, int t, int T, double acc, double prev_acc) {
    const long double decay = 1.0L - static_cast<long double>(t) / (2.0L * T);
    if (acc < prev_acc) return static_cast<double>(std::min(1.0L, beta * 1.05L * decay));
    return static_cast<double>(std::max(0.0L, beta * 0.95L * decay));
}

/// Plain AdaBoost reweighting on the full training set with the same weak
/// learner family. Returns the normalized weights after each round.
inline std::vector<std::vector<double>> adaboost_trajectory(const Dataset& train, const SvbmConfig& config) {
    const ScalerParams scaler = config.standardize ? fit_standardizer(train) : ScalerParams::identity(train.dims());
    const Matrix x = apply_standardizer(train.features, scaler);
    const std::size_t n = train.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<std::vector<double>> out;
    for (int t = 1; t <= config.n_classifiers; ++t) {
        const auto learner = train_ecoc(x, train.labels, train.num_classes(), normalize(w), config.svm);
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) pred[i] = brute_force_decode(learner, x.row(i));
        const double a = alpha(weighted_error(w, pred, train.labels));
        w = normalize(reweight(w, a, pred, train.labels));
        out.push_back(w);
    }
    return out;
}

/// Violations of the per-round invariants of a fit; empty when all hold.
inline std::vector<std::string> trace_violations(const TrainingTrace& trace, const Dataset& train,
                                                 const SvbmConfig& config) {
    std::vector<std::string> bad;
    const auto note = [&](int round, const std::string& what) {
        bad.push_back("round " + std::to_string(round) + ": " + what);
    };
    if (trace.rounds.size() > static_cast<std::size_t>(config.n_classifiers)) bad.push_back("trace longer than T");
    const std::size_t m = subsample_size(train.size(), config.sample_ratio);
    int expected_round = 1;
    for (const auto& r : trace.rounds) {
        if (r.round != expected_round++) note(r.round, "round index out of sequence");
        long double total = 0.0L;
        for (double w : r.weights_after.values) {
            if (!(w >= 0.0) || !std::isfinite(w)) note(r.round, "negative or non-finite weight");
            total += w;
        }
        if (std::abs(static_cast<double>(total) - 1.0) > 1e-9) note(r.round, "weights do not sum to 1");
        if (!(r.beta >= 0.0 && r.beta <= 1.0)) note(r.round, "beta outside [0, 1]");
        if (!config.residual_enabled && r.beta != 0.0) note(r.round, "beta non-zero with residual disabled");
        const auto& idx = r.subsample_indices;
        if (!std::is_sorted(idx.begin(), idx.end()) ||
            std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
            note(r.round, "subsample indices not unique");
        }
        if (idx.size() < m || idx.size() > std::max<std::size_t>(m, static_cast<std::size_t>(train.num_classes()))) {
            note(r.round, "subsample size " + std::to_string(idx.size()) + " != " + std::to_string(m));
        }
        std::set<int> classes;
        for (auto i : idx) {
            if (i >= train.size()) note(r.round, "subsample index out of range");
            else classes.insert(train.labels[i]);
        }
        if (static_cast<int>(classes.size()) != train.num_classes()) note(r.round, "subsample misses a class");
        if (!r.trained) continue;
        if (!(r.error >= 1e-10 && r.error <= 0.4999)) note(r.round, "error outside [1e-10, 0.4999]");
        if (!(r.alpha > 0.0) || !std::isfinite(r.alpha)) note(r.round, "alpha not positive");
    }
    return bad;
}

}  // namespace svbm::oracle
