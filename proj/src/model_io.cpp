#include "svbm/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svbm/errors.hpp"
#include "svbm/metrics.hpp"

namespace svbm {
namespace {

using json = nlohmann::ordered_json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto values = rows[r].get<std::vector<double>>();
        if (values.size() != cols) throw DataError("support vector has wrong dimension");
        std::copy(values.begin(), values.end(), m.row(r).begin());
    }
    return m;
}

const char* mode_name(SubsampleMode mode) {
    return mode == SubsampleMode::randomized ? "randomized" : "structured";
}

SubsampleMode mode_from_name(const std::string& name) {
    if (name == "structured") return SubsampleMode::structured;
    if (name == "randomized") return SubsampleMode::randomized;
    throw DataError("unknown subsample mode '" + name + "'");
}

json config_to_json(const SvbmConfig& c) {
    json svm = {{"cost", c.svm.cost},
                {"tolerance", c.svm.tolerance},
                {"max_passes", c.svm.max_passes},
                {"gamma", c.svm.kernel ? json(c.svm.kernel->gamma) : json("auto")}};
    return {{"n_classifiers", c.n_classifiers},
            {"sample_ratio", c.sample_ratio},
            {"beta0", c.beta0},
            {"residual_enabled", c.residual_enabled},
            {"seed", c.seed},
            {"learning_rate", c.learning_rate},
            {"standardize", c.standardize},
            {"subsample_mode", mode_name(c.subsample_mode)},
            {"svm", svm}};
}

SvbmConfig config_from_json(const json& j) {
    SvbmConfig c;
    c.n_classifiers = j.at("n_classifiers").get<int>();
    c.sample_ratio = j.at("sample_ratio").get<double>();
    c.beta0 = j.at("beta0").get<double>();
    c.residual_enabled = j.at("residual_enabled").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.standardize = j.at("standardize").get<bool>();
    c.subsample_mode = mode_from_name(j.at("subsample_mode").get<std::string>());
    const auto& svm = j.at("svm");
    c.svm.cost = svm.at("cost").get<double>();
    c.svm.tolerance = svm.at("tolerance").get<double>();
    c.svm.max_passes = svm.at("max_passes").get<int>();
    const auto& gamma = svm.at("gamma");
    if (gamma.is_number()) {
        c.svm.kernel = KernelSpec{gamma.get<double>()};
    } else if (gamma != "auto") {
        throw DataError("gamma must be a number or \"auto\"");
    }
    return c;
}

json svm_to_json(const BinarySvmModel& m) {
    return {{"gamma", m.kernel.gamma},
            {"bias", m.bias},
            {"converged", m.converged},
            {"dual_coefficients", m.dual_coefficients},
            {"support_vectors", matrix_to_json(m.support_vectors)}};
}

BinarySvmModel svm_from_json(const json& j, std::size_t dims) {
    BinarySvmModel m;
    m.kernel.gamma = j.at("gamma").get<double>();
    m.kernel.validate();
    m.bias = j.at("bias").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
    m.support_vectors = matrix_from_json(j.at("support_vectors"), dims);
    if (m.dual_coefficients.size() != m.support_vectors.rows() || m.dual_coefficients.empty()) {
        throw DataError("support vector and coefficient counts differ");
    }
    return m;
}

}  // namespace

std::string serialize_model(const ModelArtifact& artifact) {
    const auto& e = artifact.ensemble;
    json learners = json::array();
    for (std::size_t t = 0; t < e.learners.size(); ++t) {
        const auto& learner = e.learners[t];
        json columns = json::array();
        for (const auto& col : learner.learners) columns.push_back(col ? svm_to_json(*col) : json(nullptr));
        std::vector<int> entries(learner.code.entries().begin(), learner.code.entries().end());
        learners.push_back({{"alpha", e.alphas[t]},
                            {"code", {{"scheme", learner.code.scheme()},
                                      {"classes", learner.code.classes()},
                                      {"columns", learner.code.columns()},
                                      {"entries", entries}}},
                            {"svms", columns}});
    }
    json doc = {{"format", "svbm-model"},
                {"format_version", artifact.format_version},
                {"class_names", artifact.class_names},
                {"num_classes", e.num_classes},
                {"config", config_to_json(e.config)},
                {"scaler", {{"means", e.scaler.means}, {"std_devs", e.scaler.std_devs}}},
                {"learners", learners}};
    return doc.dump(1) + "\n";
}

ModelArtifact parse_model(std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "svbm-model") throw DataError("not an SVBM model file");
        ModelArtifact a;
        a.format_version = doc.at("format_version").get<int>();
        if (a.format_version != kModelFormatVersion) {
            throw DataError("unsupported model format version " + std::to_string(a.format_version));
        }
        a.class_names = doc.at("class_names").get<std::vector<std::string>>();
        auto& e = a.ensemble;
        e.num_classes = doc.at("num_classes").get<int>();
        if (e.num_classes < 2 || static_cast<std::size_t>(e.num_classes) != a.class_names.size()) {
            throw DataError("class count does not match class names");
        }
        e.config = config_from_json(doc.at("config"));
        e.scaler.means = doc.at("scaler").at("means").get<std::vector<double>>();
        e.scaler.std_devs = doc.at("scaler").at("std_devs").get<std::vector<double>>();
        if (e.scaler.means.size() != e.scaler.std_devs.size() || e.scaler.means.empty()) {
            throw DataError("scaler is malformed");
        }
        const std::size_t dims = e.scaler.dims();
        for (const auto& lj : doc.at("learners")) {
            const auto& code = lj.at("code");
            std::vector<std::int8_t> entries;
            for (int v : code.at("entries").get<std::vector<int>>()) entries.push_back(static_cast<std::int8_t>(v));
            EcocModel learner{CodeMatrix(code.at("classes").get<int>(), code.at("columns").get<int>(),
                                         std::move(entries), code.at("scheme").get<std::string>()),
                              {}};
            if (learner.code.classes() != e.num_classes) throw DataError("learner class count mismatch");
            const auto& svms = lj.at("svms");
            if (svms.size() != static_cast<std::size_t>(learner.code.columns())) {
                throw DataError("learner column count mismatch");
            }
            for (const auto& sj : svms) {
                if (sj.is_null()) {
                    learner.learners.emplace_back(std::nullopt);
                } else {
                    learner.learners.emplace_back(svm_from_json(sj, dims));
                }
            }
            const double alpha = lj.at("alpha").get<double>();
            if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DataError("learner alpha must be positive");
            e.alphas.push_back(alpha);
            e.learners.push_back(std::move(learner));
        }
        if (e.learners.empty()) throw DataError("model has no learners");
        return a;
    } catch (const nlohmann::json::exception& err) {
        throw DataError(std::string("malformed model file: ") + err.what());
    } catch (const std::invalid_argument& err) {
        throw DataError(std::string("malformed model file: ") + err.what());
    }
}

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(artifact));
}

ModelArtifact load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace svbm
