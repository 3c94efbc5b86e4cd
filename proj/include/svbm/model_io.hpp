#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "svbm/boosting.hpp"

namespace svbm {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to reproduce predictions: the fitted ensemble, its
/// configuration and scaler, and the original label strings.
struct ModelArtifact {
    int format_version = kModelFormatVersion;
    SvbmEnsemble ensemble;
    std::vector<std::string> class_names;
};

/// Versioned JSON text; reals use shortest round-trip formatting so a parsed
/// model predicts bit-identically to the saved one.
std::string serialize_model(const ModelArtifact& artifact);
ModelArtifact parse_model(std::string_view text);

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace svbm
