#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "svbm/data_io.hpp"

namespace svbm::testing {

/// Isotropic Gaussian blobs, `per_class` points around each center. Class k is
/// named "c<k>" so lexicographic encoding keeps the center order for K <= 10.
inline Dataset make_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_class,
                          double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    const std::size_t d = centers.front().size();
    Dataset data;
    data.features = Matrix(centers.size() * per_class, d);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        data.class_names.push_back("c" + std::to_string(k));
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = k * per_class + i;
            for (std::size_t j = 0; j < d; ++j) data.features(r, j) = centers[k][j] + noise(rng);
            data.labels.push_back(static_cast<int>(k));
        }
    }
    return data;
}

/// Flips the label of a `fraction` of rows to a different class.
inline Dataset with_label_noise(Dataset data, double fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int K = data.num_classes();
    for (auto& y : data.labels) {
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < fraction) {
            y = (y + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(K - 1))) % K;
        }
    }
    return data;
}

inline Dataset two_blobs(std::size_t per_class, double spread, std::uint64_t seed) {
    return make_blobs({{-2.0, -2.0}, {2.0, 2.0}}, per_class, spread, seed);
}

inline Dataset three_blobs(std::size_t per_class, double spread, std::uint64_t seed) {
    return make_blobs({{-2.5, -2.0}, {2.5, -2.0}, {0.0, 2.5}}, per_class, spread, seed);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("svbm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace svbm::testing
