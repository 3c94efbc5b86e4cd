#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "svbm/boosting.hpp"
#include "svbm/data_io.hpp"
#include "svbm/errors.hpp"
#include "svbm/metrics.hpp"
#include "svbm/model_io.hpp"

namespace svbm::cli {
namespace {

namespace fs = std::filesystem;

/// Thrown for flag values that parse but fail validation.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataFlags {
    std::string path;
    std::string label_column = "last";
    bool header = false;

    void add_to(CLI::App& cmd, const std::string& default_label) {
        label_column = default_label;
        cmd.add_option("--data", path, "Input CSV file")->required();
        cmd.add_option("--label-column", label_column,
                       "0-based label column index, 'last', or 'none'")
            ->capture_default_str();
        cmd.add_flag("--header", header, "First row is a header");
    }

    std::optional<LabelColumn> label() const {
        if (label_column == "none") return std::nullopt;
        try {
            return LabelColumn::parse(label_column);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
};

struct ModelFlags {
    int n_classifiers = 10;
    double sample_ratio = 0.5;
    double beta0 = 0.5;
    double cost = 1.0;
    std::string gamma = "auto";
    double tolerance = 1e-3;
    int max_passes = 200;
    std::uint64_t seed = 42;
    bool no_residual = false;
    bool no_standardize = false;
    bool randomized = false;

    void add_to(CLI::App& cmd, bool with_residual_switch) {
        cmd.add_option("--n-classifiers", n_classifiers, "Boosting rounds T")->capture_default_str();
        if (with_residual_switch) {
            cmd.add_option("--sample-ratio", sample_ratio, "Subsample fraction in (0, 1]")
                ->capture_default_str();
            cmd.add_flag("--no-residual", no_residual, "Plain AdaBoost weight updates (beta frozen at 0)");
        }
        cmd.add_option("--beta0", beta0, "Initial residual weight beta")->capture_default_str();
        cmd.add_option("--C", cost, "SVM cost")->capture_default_str();
        cmd.add_option("--gamma", gamma, "RBF width, or 'auto'")->capture_default_str();
        cmd.add_option("--tolerance", tolerance, "SMO stopping tolerance")->capture_default_str();
        cmd.add_option("--max-passes", max_passes, "SMO iteration cap in sweeps")->capture_default_str();
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_flag("--no-standardize", no_standardize, "Skip feature standardization");
        cmd.add_flag("--randomized-subsample", randomized,
                     "Pick a random member of each weight stratum");
    }

    SvbmConfig config() const {
        SvbmConfig c;
        c.n_classifiers = n_classifiers;
        c.sample_ratio = sample_ratio;
        c.beta0 = beta0;
        c.residual_enabled = !no_residual;
        c.seed = seed;
        c.standardize = !no_standardize;
        c.subsample_mode = randomized ? SubsampleMode::randomized : SubsampleMode::structured;
        c.svm.cost = cost;
        c.svm.tolerance = tolerance;
        c.svm.max_passes = max_passes;
        if (gamma != "auto") {
            double g = 0.0;
            std::istringstream in(gamma);
            if (!(in >> g) || !in.eof()) throw UsageError("--gamma must be 'auto' or a positive number");
            c.svm.kernel = KernelSpec{g};
        }
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

Matrix load_features(const DataFlags& flags) {
    const auto label = flags.label();
    if (!label) return load_feature_csv(flags.path, flags.header);
    return load_labeled_csv(flags.path, *label, flags.header).features;
}

/// Labeled rows encoded with the model's class names; unknown labels are a data error.
std::pair<Matrix, std::vector<int>> load_for_model(const DataFlags& flags,
                                                   const ModelArtifact& model) {
    const auto label = flags.label();
    if (!label) throw UsageError("evaluation needs a label column");
    auto rows = load_labeled_csv(flags.path, *label, flags.header);
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < model.class_names.size(); ++k) {
        index.emplace(model.class_names[k], static_cast<int>(k));
    }
    std::vector<int> labels;
    labels.reserve(rows.labels.size());
    for (const auto& name : rows.labels) {
        const auto it = index.find(name);
        if (it == index.end()) {
            throw DataError("label '" + name + "' is not one of the model's " +
                            std::to_string(model.class_names.size()) + " classes");
        }
        labels.push_back(it->second);
    }
    return {std::move(rows.features), std::move(labels)};
}

void check_dims(const Matrix& x, const ModelArtifact& model) {
    if (x.cols() != model.ensemble.dims()) {
        throw DataError("model expects " + std::to_string(model.ensemble.dims()) +
                        " features, data has " + std::to_string(x.cols()));
    }
}

std::string join_lines(const std::vector<int>& predictions, const std::vector<std::string>& names) {
    std::string out;
    for (int p : predictions) out += names[static_cast<std::size_t>(p)] + '\n';
    return out;
}

int cmd_train(const DataFlags& data_flags, const ModelFlags& model_flags, const std::string& out_path,
              const std::string& trace_dir, std::ostream& out) {
    const SvbmConfig config = model_flags.config();
    auto label = data_flags.label();
    if (!label) throw UsageError("training needs a label column");
    const Dataset data = load_csv(data_flags.path, *label, data_flags.header);
    data.validate();

    auto result = fit(data, config);
    const double train_acc = accuracy(predict_ensemble(result.ensemble, data.features), data.labels);

    ModelArtifact artifact{kModelFormatVersion, std::move(result.ensemble), data.class_names};
    const auto model_text = serialize_model(artifact);
    const auto scalars = format_trace_scalars(result.trace);
    const auto weights = format_trace_weights(result.trace);

    const fs::path model_path(out_path);
    const fs::path trace_path = trace_dir.empty() ? model_path.parent_path() : fs::path(trace_dir);
    if (!trace_path.empty()) fs::create_directories(trace_path);
    write_file_atomic(model_path, model_text);
    write_file_atomic(trace_path / "trace_scalars.csv", scalars);
    write_file_atomic(trace_path / "trace_weights.csv", weights);

    std::size_t skipped = 0;
    for (const auto& r : result.trace.rounds) skipped += !r.trained;
    out << "learners: " << artifact.ensemble.learners.size();
    if (skipped > 0) out << " (" << skipped << " rounds skipped)";
    out << "\ntraining accuracy: " << format_real(train_acc) << '\n';
    return kOk;
}

int cmd_predict(const DataFlags& data_flags, const std::string& model_path,
                const std::string& out_path, std::ostream& out) {
    const auto model = load_model(model_path);
    const Matrix x = load_features(data_flags);
    check_dims(x, model);
    const auto text = join_lines(predict_ensemble(model.ensemble, x), model.class_names);
    if (out_path.empty()) {
        out << text;
    } else {
        write_file_atomic(out_path, text);
    }
    return kOk;
}

int cmd_evaluate(const DataFlags& data_flags, const std::string& model_path,
                 const std::string& confusion_path, std::ostream& out) {
    const auto model = load_model(model_path);
    const auto [x, labels] = load_for_model(data_flags, model);
    check_dims(x, model);
    const auto predictions = predict_ensemble(model.ensemble, x);
    const auto matrix = confusion(predictions, labels, model.ensemble.num_classes, model.class_names);
    const double acc = accuracy(predictions, labels);
    if (!confusion_path.empty()) write_file_atomic(confusion_path, format_confusion_csv(matrix));
    out << "accuracy: " << format_real(acc) << '\n' << format_confusion_csv(matrix);
    return kOk;
}

struct BenchCell {
    std::size_t dataset = 0;
    bool residual = true;
    double ratio = 0.5;
    std::uint64_t seed = 0;
};

struct BenchRow {
    double test_accuracy = 0.0;
    double seconds = 0.0;
};

int cmd_bench(const std::vector<std::string>& paths, const DataFlags& data_flags,
              const ModelFlags& model_flags, int seeds, double test_fraction, int jobs,
              bool no_timing, const std::string& out_path, std::ostream& out) {
    if (seeds < 1) throw UsageError("--seeds must be at least 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("--test-fraction must lie in (0, 1)");
    if (jobs < 1) throw UsageError("--jobs must be at least 1");
    const SvbmConfig base = model_flags.config();
    const auto label = data_flags.label();
    if (!label) throw UsageError("bench needs a label column");

    std::vector<Dataset> datasets;
    for (const auto& p : paths) {
        datasets.push_back(load_csv(p, *label, data_flags.header));
        datasets.back().validate();
    }

    std::vector<BenchCell> cells;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (bool residual : {true, false}) {
            for (double ratio : {0.5, 1.0}) {
                for (int s = 0; s < seeds; ++s) {
                    cells.push_back({d, residual, ratio, model_flags.seed + static_cast<std::uint64_t>(s)});
                }
            }
        }
    }

    const auto run_cell = [&](const BenchCell& cell) {
        const auto start = std::chrono::steady_clock::now();
        const auto [train, test] = stratified_split(datasets[cell.dataset], test_fraction, cell.seed);
        SvbmConfig config = base;
        config.residual_enabled = cell.residual;
        config.sample_ratio = cell.ratio;
        config.seed = cell.seed;
        const auto result = fit(train, config);
        BenchRow row;
        row.test_accuracy = accuracy(predict_ensemble(result.ensemble, test.features), test.labels);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return row;
    };

    // Cells run in waves of `jobs`; rows are merged back in grid order.
    std::vector<BenchRow> rows(cells.size());
    for (std::size_t begin = 0; begin < cells.size(); begin += static_cast<std::size_t>(jobs)) {
        const std::size_t end = std::min(cells.size(), begin + static_cast<std::size_t>(jobs));
        std::vector<std::future<BenchRow>> wave;
        for (std::size_t c = begin; c < end; ++c) {
            wave.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                      run_cell, std::cref(cells[c])));
        }
        for (std::size_t c = begin; c < end; ++c) rows[c] = wave[c - begin].get();
    }

    std::string csv = "dataset,config,seed,test_accuracy,wall_time_s\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        csv += fs::path(paths[cell.dataset]).stem().string() + ',';
        csv += std::string("residual=") + (cell.residual ? "on" : "off") + ";ratio=" + format_real(cell.ratio) + ',';
        csv += std::to_string(cell.seed) + ',' + format_real(rows[c].test_accuracy) + ',';
        csv += (no_timing ? std::string("-") : format_real(rows[c].seconds)) + '\n';
    }
    write_file_atomic(out_path, csv);
    out << "wrote " << cells.size() << " rows to " << out_path << '\n';
    return kOk;
}

}  // namespace

int report_error(std::exception_ptr error, std::ostream& err) {
    try {
        std::rethrow_exception(error);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const TrainingError& e) {
        err << "training error: " << e.what() << '\n';
        return kTrainingError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kOutputFailure;
    } catch (...) {
        err << "error: unknown failure\n";
        return kOutputFailure;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Support Vector Boosting Machine: boosted RBF-SVM ensembles with residual sample weights",
                 "svbm"};
    app.require_subcommand(1);

    DataFlags train_data;
    ModelFlags train_model;
    std::string train_out = "model.svbm";
    std::string trace_dir;
    auto* train = app.add_subcommand("train", "Fit an ensemble and write the model and trace exports");
    train_data.add_to(*train, "last");
    train_model.add_to(*train, true);
    train->add_option("--out", train_out, "Model output path")->capture_default_str();
    train->add_option("--trace-dir", trace_dir, "Directory for trace CSVs (default: next to the model)");

    DataFlags predict_data;
    std::string predict_model;
    std::string predict_out;
    auto* predict = app.add_subcommand("predict", "Predict one class name per input row");
    predict_data.add_to(*predict, "none");
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("--out", predict_out, "Output path (default: standard output)");

    DataFlags eval_data;
    std::string eval_model;
    std::string confusion_out = "confusion.csv";
    auto* evaluate = app.add_subcommand("evaluate", "Accuracy and confusion matrix on labeled data");
    eval_data.add_to(*evaluate, "last");
    evaluate->add_option("--model", eval_model, "Model file")->required();
    evaluate->add_option("--confusion-out", confusion_out, "Confusion matrix CSV path")->capture_default_str();

    std::vector<std::string> bench_paths;
    DataFlags bench_data;
    ModelFlags bench_model;
    int bench_seeds = 3;
    double test_fraction = 0.3;
    int jobs = 1;
    bool no_timing = false;
    std::string bench_out = "bench_results.csv";
    auto* bench = app.add_subcommand("bench", "Residual on/off x ratio {0.5, 1.0} x seeds grid");
    bench->add_option("--data", bench_paths, "Input CSV files")->required();
    bench->add_option("--label-column", bench_data.label_column, "Label column index or 'last'")
        ->capture_default_str();
    bench->add_flag("--header", bench_data.header, "First row is a header");
    bench_model.add_to(*bench, false);
    bench->add_option("--seeds", bench_seeds, "Number of seeds, counting up from --seed")->capture_default_str();
    bench->add_option("--test-fraction", test_fraction, "Held-out fraction per class")->capture_default_str();
    bench->add_option("--jobs", jobs, "Grid cells run concurrently")->capture_default_str();
    bench->add_flag("--no-timing", no_timing, "Write '-' instead of wall time");
    bench->add_option("--out", bench_out, "Results CSV path")->capture_default_str();

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("svbm");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (*train) return cmd_train(train_data, train_model, train_out, trace_dir, out);
        if (*predict) return cmd_predict(predict_data, predict_model, predict_out, out);
        if (*evaluate) return cmd_evaluate(eval_data, eval_model, confusion_out, out);
        if (*bench) {
            return cmd_bench(bench_paths, bench_data, bench_model, bench_seeds, test_fraction, jobs,
                             no_timing, bench_out, out);
        }
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
    return kUsageError;
}

}  // namespace svbm::cli
