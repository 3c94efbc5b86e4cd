#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "svbm/data_io.hpp"
#include "svbm/errors.hpp"

using namespace svbm;
using svbm::testing::scratch_dir;
using svbm::testing::write_text;

TEST_CASE("load_csv encodes labels lexicographically and keeps row order") {
    const auto dir = scratch_dir("data_io_encode");
    write_text(dir / "abc.csv", "1.0,b\n2.0,a\n3.0,b\n");
    const auto data = load_csv(dir / "abc.csv", LabelColumn::last(), false);
    CHECK(data.class_names == std::vector<std::string>{"a", "b"});
    CHECK(data.labels == std::vector<int>{1, 0, 1});
    CHECK(data.features(2, 0) == 3.0);
}

TEST_CASE("load_csv on a 4x2 numeric file with label last") {
    const auto dir = scratch_dir("data_io_4x2");
    write_text(dir / "f.csv", "x,label\n0.5,1\n-1.5,0\n2e3,1\n+4,0\n");
    const auto data = load_csv(dir / "f.csv", LabelColumn::last(), true);
    CHECK(data.size() == 4);
    CHECK(data.dims() == 1);
    CHECK(data.features(2, 0) == 2000.0);
    CHECK(data.features(3, 0) == 4.0);
    CHECK(data.class_names == std::vector<std::string>{"0", "1"});
}

TEST_CASE("label column can be chosen by index") {
    const auto dir = scratch_dir("data_io_index");
    write_text(dir / "f.csv", "yes,1,2\nno,3,4\n");
    const auto data = load_csv(dir / "f.csv", LabelColumn::at(0), false);
    CHECK(data.dims() == 2);
    CHECK(data.features(1, 1) == 4.0);
    CHECK(data.labels == std::vector<int>{1, 0});
}

TEST_CASE("load_csv error paths") {
    const auto dir = scratch_dir("data_io_errors");
    write_text(dir / "one.csv", "1,a\n2,a\n");
    CHECK_THROWS_WITH_AS(load_csv(dir / "one.csv", LabelColumn::last(), false), "fewer than 2 classes",
                         DataError);

    write_text(dir / "bad.csv", "1,a\nx,b\n");
    try {
        load_csv(dir / "bad.csv", LabelColumn::last(), false);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 0") != std::string::npos);
    }

    write_text(dir / "ragged.csv", "1,2,a\n3,b\n");
    CHECK_THROWS_AS(load_csv(dir / "ragged.csv", LabelColumn::last(), false), DataError);
    CHECK_THROWS_AS(load_csv(dir / "missing.csv", LabelColumn::last(), false), DataError);

    write_text(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_feature_csv(dir / "empty.csv", false), DataError);

    write_text(dir / "nan.csv", "nan,a\n1,b\n");
    CHECK_THROWS_AS(load_csv(dir / "nan.csv", LabelColumn::last(), false), DataError);

    CHECK_THROWS_AS(LabelColumn::parse("first"), std::invalid_argument);
    CHECK(LabelColumn::parse("3").index == 3u);
}

TEST_CASE("csv round trip preserves N, d and encoding") {
    const auto dir = scratch_dir("data_io_roundtrip");
    const auto data = svbm::testing::three_blobs(7, 0.5, 3);
    write_csv(data, dir / "out.csv");
    const auto back = load_csv(dir / "out.csv", LabelColumn::last(), false);
    CHECK(back.size() == data.size());
    CHECK(back.dims() == data.dims());
    CHECK(back.labels == data.labels);
    CHECK(back.class_names == data.class_names);
    CHECK(back.features == data.features);
}

TEST_CASE("fit_standardizer uses population statistics") {
    Dataset d;
    d.features = Matrix(2, 2, std::vector<double>{1.0, 5.0, 3.0, 5.0});
    d.labels = {0, 1};
    d.class_names = {"a", "b"};
    const auto p = fit_standardizer(d);
    CHECK(p.means[0] == 2.0);
    CHECK(p.std_devs[0] == 1.0);
    CHECK(p.means[1] == 5.0);
    CHECK(p.std_devs[1] == 1.0);  // zero-variance fallback

    const auto s = apply_standardizer(d, p);
    CHECK(s.features(0, 0) == -1.0);
    CHECK(s.features(1, 0) == 1.0);
    CHECK(s.labels == d.labels);

    const auto same = apply_standardizer(d, ScalerParams::identity(2));
    CHECK(same.features == d.features);

    CHECK_THROWS_AS(apply_standardizer(d, ScalerParams::identity(3)), DataError);
}

TEST_CASE("standardized columns have zero mean and unit deviation") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto data = svbm::testing::make_blobs({{10.0, -3.0, 0.0}, {14.0, 5.0, 0.0}}, 25, 2.0 * seed, seed);
        for (std::size_t i = 0; i < data.size(); ++i) data.features(i, 2) = 7.0;  // constant column
        const auto s = apply_standardizer(data, fit_standardizer(data));
        const auto again = fit_standardizer(s);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(again.means[j]) < 1e-9);
            CHECK(std::abs(again.std_devs[j] - 1.0) < 1e-9);
        }
        CHECK(again.std_devs[2] == 1.0);
    }
}

TEST_CASE("stratified_split is proportional, deterministic and partitions rows") {
    const auto data = svbm::testing::two_blobs(10, 1.0, 4);
    const auto [train, test] = stratified_split(data, 0.5, 99);
    CHECK(train.size() == 10);
    CHECK(test.size() == 10);
    CHECK(std::count(test.labels.begin(), test.labels.end(), 0) == 5);

    const auto a = stratified_split_indices(data, 0.5, 99);
    const auto b = stratified_split_indices(data, 0.5, 99);
    CHECK(a == b);
    const auto c = stratified_split_indices(data, 0.5, 100);
    CHECK(a.second != c.second);

    std::vector<std::size_t> all = a.first;
    all.insert(all.end(), a.second.begin(), a.second.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
}

TEST_CASE("split rounding: 0.3 of 10 sends 3 rows to test") {
    // round(0.3 * n) for n = 1..20, enumerated by hand.
    const int expected[] = {0, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5, 5, 5, 5, 6, 6};
    CHECK(expected[9] == 3);
    const auto data = svbm::testing::two_blobs(10, 1.0, 5);
    const auto [train, test] = stratified_split(data, 0.3, 1);
    CHECK(std::count(test.labels.begin(), test.labels.end(), 0) == 3);
    CHECK(std::count(train.labels.begin(), train.labels.end(), 0) == 7);

    for (std::size_t n = 2; n <= 20; ++n) {
        const auto d = svbm::testing::two_blobs(n, 1.0, n);
        const auto [tr, te] = stratified_split_indices(d, 0.3, 3);
        const auto want = std::clamp<std::size_t>(static_cast<std::size_t>(expected[n - 1]), 1, n - 1);
        CHECK(te.size() == 2 * want);
    }
}

TEST_CASE("stratified_split rejects classes with a single sample") {
    Dataset d;
    d.features = Matrix(3, 1, std::vector<double>{1, 2, 3});
    d.labels = {0, 0, 1};
    d.class_names = {"a", "b"};
    CHECK_THROWS_AS(stratified_split(d, 0.5, 1), DataError);
    CHECK_THROWS_AS(stratified_split(d, 1.0, 1), std::invalid_argument);
}
