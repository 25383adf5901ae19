#pragma once

#include <filesystem>

#include "levlab/config.hpp"

namespace levlab {

struct ArtifactEntry {
    std::string file;    // path relative to the output directory
    std::string sha256;
};

struct ResultBundle {
    std::string schema_version = "v1";
    std::string inputs;  // effective config JSON
    std::vector<ArtifactEntry> artifacts;
};

/// Execute the configured experiment end to end and write all artifacts plus a
/// result.json manifest into the output directory.
ResultBundle run(const RunConfig& config);

std::string result_bundle_to_json(const ResultBundle& b);

}  // namespace levlab
