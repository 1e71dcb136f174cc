#pragma once

#include <optional>
#include <string>
#include <vector>

#include "escape4d/geometry.hpp"

namespace escape4d {

enum class Family { D1, D2, D3, D2M, D3M, D2T };

const char* family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);
std::vector<Family> all_families();

/// Base difficulty (1..3) of a family; variants inherit their base.
int base_difficulty(Family f);
/// Step limit by base difficulty: 50 / 65 / 80.
int step_limit_for(Family f);

enum class ObjectKind { Door, Box, Recorder, Distractor, Key, WallDisplay, Decoy };
const char* object_kind_name(ObjectKind k);
std::optional<ObjectKind> object_kind_from_name(const std::string& name);

enum class AudioCategory { Ambient, TriggerClue, TriggerMisleading };
const char* audio_category_name(AudioCategory c);
std::optional<AudioCategory> audio_category_from_name(const std::string& name);

struct AudioSourceSpec {
    AudioCategory category = AudioCategory::Ambient;
    double audible_radius = 1.0;  // meters, > 0
    std::string transcript;
    double play_duration = 0.0;  // seconds; trigger categories only
};

enum class LockKind { None, NeedsKey, NeedsPassword };

struct Lock {
    LockKind kind = LockKind::None;
    std::string key_item;  // NeedsKey
    std::string password;  // NeedsPassword, digit string
};

struct GameObject {
    std::string id;
    ObjectKind kind = ObjectKind::Decoy;
    Vec2 position;
    bool interactable = false;
    Lock lock;
    std::vector<std::string> contents;  // item ids
    std::optional<AudioSourceSpec> audio;
};

enum class ExitSide { N, E, S, W };
const char* exit_side_name(ExitSide s);
std::optional<ExitSide> exit_side_from_name(const std::string& name);

struct RoomGeometry {
    double width = 10.0;
    double depth = 10.0;
    std::vector<Segment> walls;  // interior, axis-aligned
    Vec2 exit_point;             // on the boundary
    ExitSide exit_side = ExitSide::N;
};

enum class RevealKind { Visual, Auditory, Timed };
const char* reveal_kind_name(RevealKind r);
std::optional<RevealKind> reveal_kind_from_name(const std::string& name);

struct PropHop {
    RevealKind reveal = RevealKind::Visual;
    std::string gate;    // object/item/clue id that unlocks this hop
    std::string yields;  // item id or clue text
};

struct PropChainSpec {
    std::vector<PropHop> hops;  // 0/1/2 hops for difficulty 1/2/3
};

struct ItemSpec {
    std::string id;
    std::string name;
    std::string description;
    bool is_key = false;
};

struct TransientClueSpec {
    std::string display_object;  // WallDisplay id
    double window_duration = 20.0;
};

struct SceneSpec {
    std::string id;
    Family family = Family::D1;
    RoomGeometry geometry;
    std::vector<GameObject> objects;
    PropChainSpec prop_chain;
    std::optional<TransientClueSpec> transient_clue;
    std::vector<ItemSpec> items;
    int step_limit = 50;
    std::uint64_t seed = 0;

    /// Grabbable prop-chain objects (door plus visual-hop props); the
    /// denominator of the prop-gain metric.
    int prop_count = 1;

    const GameObject* find_object(const std::string& id) const;
    const ItemSpec* find_item(const std::string& id) const;
    const GameObject* door() const;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every SceneSpec invariant plus prop-chain solvability (each
/// gate's prerequisite is obtainable and the door unlock is reachable).
/// Violations are data, not failures.
ValidationReport validate_scene(const SceneSpec& scene);

// Scene file format: JSON mirroring the field names above (docs/scene_schema.md).
std::string scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const std::string& text);
void save_scene(const SceneSpec& scene, const std::string& path);
SceneSpec load_scene(const std::string& path);

}  // namespace escape4d
