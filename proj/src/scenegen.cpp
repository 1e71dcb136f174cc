#include "escape4d/scenegen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "escape4d/engine.hpp"
#include "escape4d/rng.hpp"

namespace escape4d {

using nlohmann::json;

namespace {

constexpr int kMaxPlacementTries = 2000;
constexpr double kObjectMargin = 0.8;      // distance from room boundary
constexpr double kWallClearance = 0.7;     // objects keep clear of interior walls
constexpr double kDistractorMinDist = 3.0; // from the true recorder
constexpr double kTriggerAudioRadius = 6.0;

const std::vector<std::string>& decoy_catalog() {
    static const std::vector<std::string> names = {
        "chair", "table", "plant", "lamp",  "painting", "rug",    "shelf",
        "vase",  "clock", "mirror", "sofa", "cabinet",  "stool",  "bookpile"};
    return names;
}

std::string four_digits(Rng& rng) {
    std::string s;
    for (int i = 0; i < 4; ++i) s += static_cast<char>('0' + rng.uniform_int(0, 9));
    return s;
}

int family_index(Family f) {
    switch (f) {
        case Family::D1: return 0;
        case Family::D2: return 1;
        case Family::D3: return 2;
        case Family::D2M: return 3;
        case Family::D3M: return 4;
        case Family::D2T: return 5;
    }
    return 0;
}

struct Placer {
    const GenConfig& config;
    const RoomGeometry& geometry;
    std::vector<Vec2> taken;
    Rng& rng;
    std::uint64_t scene_seed;

    bool clear_of_walls(const Vec2& p) const {
        for (const auto& w : geometry.walls)
            if (point_segment_distance(p, w) < kWallClearance) return false;
        return true;
    }

    Vec2 place(double min_exit_dist = 1.0) {
        for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
            Vec2 p{rng.uniform(kObjectMargin, geometry.width - kObjectMargin),
                   rng.uniform(kObjectMargin, geometry.depth - kObjectMargin)};
            if (distance(p, geometry.exit_point) < min_exit_dist) continue;
            if (!clear_of_walls(p)) continue;
            bool ok = true;
            for (const auto& q : taken)
                if (distance(p, q) < config.min_object_spacing) ok = false;
            if (!ok) continue;
            taken.push_back(p);
            return p;
        }
        throw std::runtime_error("scene generation: placement failed (seed " +
                                 std::to_string(scene_seed) + ")");
    }
};

RoomGeometry make_geometry(const GenConfig& config, Rng& rng) {
    RoomGeometry g;
    g.width = config.room_width;
    g.depth = config.room_depth;

    ExitSide sides[4] = {ExitSide::N, ExitSide::E, ExitSide::S, ExitSide::W};
    g.exit_side = sides[rng.uniform_int(0, 3)];
    double along = rng.uniform(0.25, 0.75);
    switch (g.exit_side) {
        case ExitSide::N: g.exit_point = {g.width * along, g.depth}; break;
        case ExitSide::S: g.exit_point = {g.width * along, 0.0}; break;
        case ExitSide::E: g.exit_point = {g.width, g.depth * along}; break;
        case ExitSide::W: g.exit_point = {0.0, g.depth * along}; break;
    }

    // One short interior wall for line-of-sight variety, kept away from the
    // start position (room center) and the exit.
    Vec2 center{g.width / 2.0, g.depth / 2.0};
    for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
        double len = rng.uniform(2.0, 4.0);
        bool horizontal = rng.bernoulli(0.5);
        Vec2 a{rng.uniform(1.0, g.width - 1.0 - (horizontal ? len : 0.0)),
               rng.uniform(1.0, g.depth - 1.0 - (horizontal ? 0.0 : len))};
        Vec2 b = horizontal ? Vec2{a.x + len, a.y} : Vec2{a.x, a.y + len};
        Segment wall{a, b};
        if (point_segment_distance(center, wall) < 1.5) continue;
        if (point_segment_distance(g.exit_point, wall) < 2.0) continue;
        g.walls.push_back(wall);
        break;
    }
    return g;
}

int sample_object_count(double target, Rng& rng) {
    int base = static_cast<int>(std::floor(target));
    double frac = target - base;
    int count = base + (rng.bernoulli(frac) ? 1 : 0) + rng.uniform_int(-1, 1);
    return std::max(count, 8);
}

}  // namespace

SceneSpec generate_scene(Family family, std::uint64_t seed, const GenConfig& config) {
    Rng rng(seed ^ 0xE5C4D1A2B3968770ULL);

    SceneSpec scene;
    scene.family = family;
    scene.seed = seed;
    scene.step_limit = step_limit_for(family);
    scene.geometry = make_geometry(config, rng);

    std::ostringstream sid;
    sid << family_name(family) << "_" << seed;
    scene.id = sid.str();

    Placer placer{config, scene.geometry, {}, rng, seed};
    int total_objects = sample_object_count(
        config.target_object_counts[static_cast<std::size_t>(family_index(family))], rng);

    // Door sits at the exit point on the boundary.
    GameObject door;
    door.id = "door";
    door.kind = ObjectKind::Door;
    door.position = scene.geometry.exit_point;
    door.interactable = true;
    AudioSourceSpec wind;
    wind.category = AudioCategory::Ambient;
    wind.audible_radius = std::hypot(scene.geometry.width, scene.geometry.depth);
    wind.transcript = "wind blowing outside the exit";
    door.audio = wind;

    std::string door_password = four_digits(rng);
    std::string box_password = four_digits(rng);
    std::string bad_digits;
    do {
        bad_digits = four_digits(rng);
    } while (bad_digits == door_password || bad_digits == box_password);

    int machinery = 1;  // door
    bool has_recorder = family != Family::D1;
    bool has_box = family == Family::D3 || family == Family::D3M;
    bool has_distractor = family == Family::D2M || family == Family::D3M;
    bool has_display = family == Family::D2T;
    machinery += (has_recorder ? 1 : 0) + (has_box ? 1 : 0) + (has_distractor ? 1 : 0) +
                 (has_display ? 1 : 0);

    if (family == Family::D1) {
        scene.prop_count = 1;
    } else if (has_box) {
        door.lock = {LockKind::NeedsKey, "key_door", ""};
        scene.prop_count = 2;  // box + door
        scene.items.push_back({"key_door", "brass key",
                               "A small brass key. It looks like it fits the exit door.",
                               true});
    } else {
        door.lock = {LockKind::NeedsPassword, "", door_password};
        scene.prop_count = 1;
    }
    scene.objects.push_back(door);

    Vec2 recorder_pos;
    if (has_recorder) {
        GameObject rec;
        rec.id = "recorder";
        rec.kind = ObjectKind::Recorder;
        rec.position = recorder_pos = placer.place(2.0);
        rec.interactable = true;
        AudioSourceSpec a;
        a.category = AudioCategory::TriggerClue;
        a.audible_radius = kTriggerAudioRadius;
        a.play_duration = kTriggerPlayDuration;
        if (has_display)
            a.transcript =
                "Listen carefully: the door password will appear on the wall display "
                "for a short time after this message.";
        else if (has_box)
            a.transcript = "The box password is " + box_password + ".";
        else
            a.transcript = "The door password is " + door_password + ".";
        rec.audio = a;
        scene.objects.push_back(rec);
    }

    if (has_box) {
        GameObject box;
        box.id = "box";
        box.kind = ObjectKind::Box;
        box.position = placer.place(2.0);
        box.interactable = true;
        box.lock = {LockKind::NeedsPassword, "", box_password};
        box.contents = {"key_door"};
        scene.objects.push_back(box);
    }

    if (has_distractor) {
        GameObject dis;
        dis.id = "distractor";
        dis.kind = ObjectKind::Distractor;
        for (int attempt = 0;; ++attempt) {
            dis.position = placer.place(2.0);
            if (distance(dis.position, recorder_pos) >= kDistractorMinDist) break;
            placer.taken.pop_back();
            if (attempt > kMaxPlacementTries)
                throw std::runtime_error("scene generation: distractor placement failed (seed " +
                                         std::to_string(seed) + ")");
        }
        dis.interactable = true;
        AudioSourceSpec a;
        a.category = AudioCategory::TriggerMisleading;
        a.audible_radius = kTriggerAudioRadius;
        a.play_duration = kTriggerPlayDuration;
        a.transcript = (has_box ? "The box password is " : "The door password is ") +
                       bad_digits + ".";
        dis.audio = a;
        scene.objects.push_back(dis);
    }

    if (has_display) {
        GameObject display;
        display.id = "wall_display";
        display.kind = ObjectKind::WallDisplay;
        display.position = placer.place(2.0);
        display.interactable = false;
        scene.objects.push_back(display);
        scene.transient_clue = TransientClueSpec{"wall_display", 20.0};
    }

    // Decoys fill the remaining object budget.
    const auto& catalog = decoy_catalog();
    for (int i = machinery; i < total_objects; ++i) {
        GameObject decoy;
        const std::string& name = catalog[rng.below(catalog.size())];
        decoy.id = "decoy_" + name + "_" + std::to_string(i);
        decoy.kind = ObjectKind::Decoy;
        decoy.position = placer.place(1.0);
        decoy.interactable = false;
        scene.objects.push_back(decoy);
    }

    // Prop chain mirrors the family machinery.
    if (family == Family::D2 || family == Family::D2M)
        scene.prop_chain.hops = {{RevealKind::Auditory, "recorder", "door password"}};
    else if (family == Family::D2T)
        scene.prop_chain.hops = {{RevealKind::Timed, "recorder", "door password"}};
    else if (has_box)
        scene.prop_chain.hops = {{RevealKind::Auditory, "recorder", "box password"},
                                 {RevealKind::Visual, "box", "key_door"}};

    ValidationReport report = validate_scene(scene);
    if (!report.ok()) {
        std::string msg = "generated scene failed validation (seed " + std::to_string(seed) + "):";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw std::runtime_error(msg);
    }
    return scene;
}

Suite generate_suite(const GenConfig& config) {
    Suite suite;
    suite.manifest.seed = config.seed;
    for (Family family : all_families()) {
        for (int i = 0; i < config.scenes_per_family; ++i) {
            std::uint64_t scene_seed =
                Rng::substream(config.seed, (static_cast<std::uint64_t>(family_index(family)) << 32) |
                                                static_cast<std::uint64_t>(i))
                    .next_u64();
            SceneSpec scene = generate_scene(family, scene_seed, config);
            std::ostringstream sid;
            sid << family_name(family) << "_"
                << (i < 10 ? "0" : "") << i;
            scene.id = sid.str();
            SuiteEntry entry;
            entry.id = scene.id;
            entry.family = family;
            entry.seed = scene_seed;
            entry.object_count = static_cast<int>(scene.objects.size());
            entry.file = scene.id + ".json";
            suite.manifest.entries.push_back(entry);
            suite.scenes.push_back(std::move(scene));
        }
    }
    return suite;
}

std::string manifest_to_json(const SuiteManifest& manifest) {
    json j;
    j["seed"] = manifest.seed;
    json entries = json::array();
    for (const auto& e : manifest.entries)
        entries.push_back({{"id", e.id},
                           {"family", family_name(e.family)},
                           {"seed", e.seed},
                           {"object_count", e.object_count},
                           {"file", e.file}});
    j["scenes"] = entries;
    return j.dump(2) + "\n";
}

void write_suite(const Suite& suite, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < suite.scenes.size(); ++i)
        save_scene(suite.scenes[i], dir + "/" + suite.manifest.entries[i].file);
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << manifest_to_json(suite.manifest);
}

SuiteManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read manifest: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str());
    SuiteManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& je : j.at("scenes")) {
        SuiteEntry e;
        e.id = je.at("id").get<std::string>();
        auto fam = family_from_name(je.at("family").get<std::string>());
        if (!fam) throw std::runtime_error("unknown family in manifest");
        e.family = *fam;
        e.seed = je.at("seed").get<std::uint64_t>();
        e.object_count = je.at("object_count").get<int>();
        e.file = je.at("file").get<std::string>();
        m.entries.push_back(std::move(e));
    }
    return m;
}

}  // namespace escape4d
