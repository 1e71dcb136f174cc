#pragma once

#include <array>
#include <string>
#include <vector>

#include "escape4d/core.hpp"

namespace escape4d {

struct GenConfig {
    std::uint64_t seed = 2024;
    int scenes_per_family = 11;
    /// Per-family mean object-count targets, order D1,D2,D3,D2M,D3M,D2T.
    std::array<double, 6> target_object_counts{13.82, 13.73, 16.91, 17.09, 17.45, 14.82};
    double room_width = 10.0;
    double room_depth = 10.0;
    double min_object_spacing = 1.0;  // > 2 * agent radius
};

struct SuiteEntry {
    std::string id;
    Family family = Family::D1;
    std::uint64_t seed = 0;
    int object_count = 0;
    std::string file;  // relative path, filled when the suite is written
};

struct SuiteManifest {
    std::uint64_t seed = 0;
    std::vector<SuiteEntry> entries;
};

/// Deterministic in (family, seed). Places the door on a uniformly chosen
/// side, installs the family's prop machinery, fills out decoys by
/// rejection sampling, and always passes validate_scene.
/// Throws std::runtime_error on placement failure (seed reported).
SceneSpec generate_scene(Family family, std::uint64_t seed, const GenConfig& config = {});

struct Suite {
    std::vector<SceneSpec> scenes;
    SuiteManifest manifest;
};

/// 11 scenes per family (66 total with defaults).
Suite generate_suite(const GenConfig& config = {});

/// Writes one scene file per scene plus manifest.json into `dir`.
void write_suite(const Suite& suite, const std::string& dir);

SuiteManifest load_manifest(const std::string& path);
std::string manifest_to_json(const SuiteManifest& manifest);

}  // namespace escape4d
