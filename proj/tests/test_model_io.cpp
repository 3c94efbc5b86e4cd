#include <doctest.h>

#include <random>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "svbm/errors.hpp"
#include "svbm/model_io.hpp"

using namespace svbm;

namespace {

ModelArtifact trained_artifact(bool auto_gamma_setting) {
    const auto data = svbm::testing::with_label_noise(svbm::testing::three_blobs(20, 1.1, 14), 0.1, 1);
    SvbmConfig cfg;
    cfg.n_classifiers = 4;
    cfg.seed = 99;
    cfg.subsample_mode = SubsampleMode::randomized;
    if (!auto_gamma_setting) cfg.svm.kernel = KernelSpec{0.7};
    auto res = fit(data, cfg);
    return ModelArtifact{kModelFormatVersion, std::move(res.ensemble), data.class_names};
}

}  // namespace

TEST_CASE("saved models predict identically after loading") {
    for (bool auto_gamma_setting : {true, false}) {
        const auto artifact = trained_artifact(auto_gamma_setting);
        const auto path = svbm::testing::scratch_dir("model_io") / "m.svbm";
        save_model(artifact, path);
        const auto loaded = load_model(path);

        CHECK(loaded.class_names == artifact.class_names);
        CHECK(loaded.ensemble.config == artifact.ensemble.config);
        CHECK(loaded.ensemble.alphas == artifact.ensemble.alphas);
        CHECK(loaded.ensemble.scaler.means == artifact.ensemble.scaler.means);
        CHECK(loaded.ensemble.scaler.std_devs == artifact.ensemble.scaler.std_devs);
        CHECK(serialize_model(loaded) == serialize_model(artifact));

        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        Matrix probes(100, 2);
        for (std::size_t i = 0; i < 100; ++i) {
            probes(i, 0) = u(rng);
            probes(i, 1) = u(rng);
        }
        CHECK(predict_ensemble(loaded.ensemble, probes) == predict_ensemble(artifact.ensemble, probes));

        // Raw column scores agree bit for bit, not just the argmax.
        const auto x = apply_standardizer(probes, artifact.ensemble.scaler);
        for (std::size_t t = 0; t < artifact.ensemble.learners.size(); ++t) {
            for (std::size_t i = 0; i < 100; ++i) {
                CHECK(ecoc_column_values(loaded.ensemble.learners[t], x.row(i)) ==
                      ecoc_column_values(artifact.ensemble.learners[t], x.row(i)));
            }
        }
    }
}

TEST_CASE("model file shape") {
    const auto doc = nlohmann::json::parse(serialize_model(trained_artifact(true)));
    CHECK(doc.at("format") == "svbm-model");
    CHECK(doc.at("format_version") == kModelFormatVersion);
    CHECK(doc.at("num_classes") == 3);
    CHECK(doc.at("config").at("svm").at("gamma") == "auto");
    CHECK(doc.at("learners").size() == 4);
}

TEST_CASE("malformed model files are data errors") {
    const auto good = serialize_model(trained_artifact(false));
    CHECK_THROWS_AS(parse_model("not json"), DataError);
    CHECK_THROWS_AS(parse_model("{}"), DataError);
    CHECK_THROWS_AS(parse_model(good.substr(0, good.size() / 2)), DataError);

    auto doc = nlohmann::json::parse(good);
    auto mutate = [&](auto&& fn) {
        auto copy = doc;
        fn(copy);
        return copy.dump();
    };
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["format"] = "other"; })), DataError);
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["format_version"] = 99; })), DataError);
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["class_names"].erase(0); })), DataError);
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["learners"] = nlohmann::json::array(); })), DataError);
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["learners"][0]["alpha"] = -1.0; })), DataError);
    CHECK_THROWS_AS(parse_model(mutate([](auto& j) { j["config"]["svm"]["gamma"] = "fast"; })), DataError);

    CHECK_THROWS_AS(load_model(svbm::testing::scratch_dir("model_io_missing") / "absent.svbm"), DataError);
}
