#include "escape4d/core.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace escape4d {

using nlohmann::json;

namespace {

struct NameEntry {
    const char* name;
};

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::D1: return "D1";
        case Family::D2: return "D2";
        case Family::D3: return "D3";
        case Family::D2M: return "D2M";
        case Family::D3M: return "D3M";
        case Family::D2T: return "D2T";
    }
    return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
    for (Family f : all_families())
        if (name == family_name(f)) return f;
    return std::nullopt;
}

std::vector<Family> all_families() {
    return {Family::D1, Family::D2, Family::D3, Family::D2M, Family::D3M, Family::D2T};
}

int base_difficulty(Family f) {
    switch (f) {
        case Family::D1: return 1;
        case Family::D2:
        case Family::D2M:
        case Family::D2T: return 2;
        case Family::D3:
        case Family::D3M: return 3;
    }
    return 1;
}

int step_limit_for(Family f) {
    switch (base_difficulty(f)) {
        case 1: return 50;
        case 2: return 65;
        default: return 80;
    }
}

const char* object_kind_name(ObjectKind k) {
    switch (k) {
        case ObjectKind::Door: return "Door";
        case ObjectKind::Box: return "Box";
        case ObjectKind::Recorder: return "Recorder";
        case ObjectKind::Distractor: return "Distractor";
        case ObjectKind::Key: return "Key";
        case ObjectKind::WallDisplay: return "WallDisplay";
        case ObjectKind::Decoy: return "Decoy";
    }
    return "?";
}

std::optional<ObjectKind> object_kind_from_name(const std::string& name) {
    for (ObjectKind k : {ObjectKind::Door, ObjectKind::Box, ObjectKind::Recorder,
                         ObjectKind::Distractor, ObjectKind::Key, ObjectKind::WallDisplay,
                         ObjectKind::Decoy})
        if (name == object_kind_name(k)) return k;
    return std::nullopt;
}

const char* audio_category_name(AudioCategory c) {
    switch (c) {
        case AudioCategory::Ambient: return "Ambient";
        case AudioCategory::TriggerClue: return "TriggerClue";
        case AudioCategory::TriggerMisleading: return "TriggerMisleading";
    }
    return "?";
}

std::optional<AudioCategory> audio_category_from_name(const std::string& name) {
    for (AudioCategory c :
         {AudioCategory::Ambient, AudioCategory::TriggerClue, AudioCategory::TriggerMisleading})
        if (name == audio_category_name(c)) return c;
    return std::nullopt;
}

const char* exit_side_name(ExitSide s) {
    switch (s) {
        case ExitSide::N: return "N";
        case ExitSide::E: return "E";
        case ExitSide::S: return "S";
        case ExitSide::W: return "W";
    }
    return "?";
}

std::optional<ExitSide> exit_side_from_name(const std::string& name) {
    for (ExitSide s : {ExitSide::N, ExitSide::E, ExitSide::S, ExitSide::W})
        if (name == exit_side_name(s)) return s;
    return std::nullopt;
}

const char* reveal_kind_name(RevealKind r) {
    switch (r) {
        case RevealKind::Visual: return "Visual";
        case RevealKind::Auditory: return "Auditory";
        case RevealKind::Timed: return "Timed";
    }
    return "?";
}

std::optional<RevealKind> reveal_kind_from_name(const std::string& name) {
    for (RevealKind r : {RevealKind::Visual, RevealKind::Auditory, RevealKind::Timed})
        if (name == reveal_kind_name(r)) return r;
    return std::nullopt;
}

const GameObject* SceneSpec::find_object(const std::string& oid) const {
    for (const auto& o : objects)
        if (o.id == oid) return &o;
    return nullptr;
}

const ItemSpec* SceneSpec::find_item(const std::string& iid) const {
    for (const auto& it : items)
        if (it.id == iid) return &it;
    return nullptr;
}

const GameObject* SceneSpec::door() const {
    for (const auto& o : objects)
        if (o.kind == ObjectKind::Door) return &o;
    return nullptr;
}

namespace {

bool inside_room(const Vec2& p, const RoomGeometry& g) {
    return p.x >= 0.0 && p.x <= g.width && p.y >= 0.0 && p.y <= g.depth;
}

bool on_boundary(const Vec2& p, const RoomGeometry& g) {
    const double eps = 1e-9;
    bool on_x = std::abs(p.x) < eps || std::abs(p.x - g.width) < eps;
    bool on_y = std::abs(p.y) < eps || std::abs(p.y - g.depth) < eps;
    return (on_x && p.y >= -eps && p.y <= g.depth + eps) ||
           (on_y && p.x >= -eps && p.x <= g.width + eps);
}

bool is_misleading_family(Family f) { return f == Family::D2M || f == Family::D3M; }

}  // namespace

ValidationReport validate_scene(const SceneSpec& scene) {
    ValidationReport report;
    auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

    const RoomGeometry& g = scene.geometry;
    if (g.width <= 0.0 || g.depth <= 0.0) fail("room dimensions must be positive");
    if (!on_boundary(g.exit_point, g)) fail("exit must lie on the room boundary");
    for (const auto& w : g.walls)
        if (!inside_room(w.a, g) || !inside_room(w.b, g)) fail("wall outside room bounds");

    int doors = 0, distractors = 0, displays = 0, misleading_sources = 0;
    std::set<std::string> object_ids;
    for (const auto& o : scene.objects) {
        if (!object_ids.insert(o.id).second) fail("duplicate object id: " + o.id);
        if (!inside_room(o.position, g)) fail("object outside bounds: " + o.id);
        if (o.kind == ObjectKind::Door) ++doors;
        if (o.kind == ObjectKind::Distractor) ++distractors;
        if (o.kind == ObjectKind::WallDisplay) ++displays;
        if (o.audio) {
            if (o.audio->audible_radius <= 0.0) fail("non-positive audible radius: " + o.id);
            if (o.audio->category == AudioCategory::TriggerMisleading) ++misleading_sources;
        }
    }
    if (doors != 1) fail("scene must contain exactly one Door");

    std::set<std::string> item_ids;
    for (const auto& it : scene.items)
        if (!item_ids.insert(it.id).second) fail("duplicate item id: " + it.id);

    if (is_misleading_family(scene.family)) {
        if (distractors == 0) fail("family requires distractor");
        if (misleading_sources != 1) fail("misleading family requires exactly one TriggerMisleading source");
    } else {
        if (distractors > 0) fail("distractor only allowed in misleading families");
        if (misleading_sources > 0) fail("TriggerMisleading source only allowed in misleading families");
    }
    if (scene.family == Family::D2T) {
        if (!scene.transient_clue) fail("D2T requires a transient clue");
        if (displays == 0) fail("D2T requires a WallDisplay");
        if (scene.transient_clue &&
            !scene.find_object(scene.transient_clue->display_object))
            fail("transient clue references unknown display object");
    } else {
        if (displays > 0) fail("WallDisplay only allowed in the D2T family");
        if (scene.transient_clue) fail("transient clue only allowed in the D2T family");
    }

    if (scene.step_limit != step_limit_for(scene.family))
        fail("step limit does not match family difficulty");

    int expected_hops = base_difficulty(scene.family) - 1;
    if (static_cast<int>(scene.prop_chain.hops.size()) != expected_hops)
        fail("prop chain hop count does not match difficulty");

    // Solvability: fixpoint over obtainable items and learnable passwords.
    const GameObject* door = scene.door();
    if (door) {
        std::set<std::string> bag;
        std::set<std::string> passwords;
        for (const auto& o : scene.objects) {
            if (o.kind == ObjectKind::Key && o.interactable) bag.insert(o.contents.begin(), o.contents.end());
            if (o.audio && o.audio->category == AudioCategory::TriggerClue &&
                o.interactable)
                passwords.insert(o.audio->transcript);
        }
        bool clue_gives_password =
            scene.transient_clue.has_value() && !passwords.empty();

        auto password_known = [&](const std::string& pw) {
            if (clue_gives_password && door->lock.kind == LockKind::NeedsPassword &&
                pw == door->lock.password)
                return true;
            for (const auto& t : passwords)
                if (t.find(pw) != std::string::npos) return true;
            return false;
        };
        auto lock_open = [&](const Lock& lock) {
            switch (lock.kind) {
                case LockKind::None: return true;
                case LockKind::NeedsKey: return bag.count(lock.key_item) > 0;
                case LockKind::NeedsPassword: return password_known(lock.password);
            }
            return false;
        };

        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& o : scene.objects) {
                if (o.kind != ObjectKind::Box || !o.interactable) continue;
                if (!lock_open(o.lock)) continue;
                for (const auto& c : o.contents)
                    if (bag.insert(c).second) changed = true;
            }
        }
        if (!lock_open(door->lock))
            fail("cyclic prop chain: door unlock not obtainable");
    }

    return report;
}

// ---------------------------------------------------------------------------
// JSON serialization. Field names mirror the struct fields bit-exactly; the
// schema is documented in docs/scene_schema.md.

namespace {

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); }

json lock_to_json(const Lock& l) {
    json j;
    switch (l.kind) {
        case LockKind::None: j["kind"] = "None"; break;
        case LockKind::NeedsKey:
            j["kind"] = "NeedsKey";
            j["key_item"] = l.key_item;
            break;
        case LockKind::NeedsPassword:
            j["kind"] = "NeedsPassword";
            j["password"] = l.password;
            break;
    }
    return j;
}

Lock lock_from_json(const json& j) {
    Lock l;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "None") {
        l.kind = LockKind::None;
    } else if (kind == "NeedsKey") {
        l.kind = LockKind::NeedsKey;
        l.key_item = j.at("key_item").get<std::string>();
    } else if (kind == "NeedsPassword") {
        l.kind = LockKind::NeedsPassword;
        l.password = j.at("password").get<std::string>();
    } else {
        throw std::runtime_error("unknown lock kind: " + kind);
    }
    return l;
}

}  // namespace

std::string scene_to_json(const SceneSpec& scene) {
    json j;
    j["id"] = scene.id;
    j["family"] = family_name(scene.family);

    json geo;
    geo["width"] = scene.geometry.width;
    geo["depth"] = scene.geometry.depth;
    json walls = json::array();
    for (const auto& w : scene.geometry.walls)
        walls.push_back({{"a", vec2_to_json(w.a)}, {"b", vec2_to_json(w.b)}});
    geo["walls"] = walls;
    geo["exit"] = {{"point", vec2_to_json(scene.geometry.exit_point)},
                   {"side", exit_side_name(scene.geometry.exit_side)}};
    j["geometry"] = geo;

    json objects = json::array();
    for (const auto& o : scene.objects) {
        json jo;
        jo["id"] = o.id;
        jo["kind"] = object_kind_name(o.kind);
        jo["position"] = vec2_to_json(o.position);
        jo["interactable"] = o.interactable;
        jo["lock"] = lock_to_json(o.lock);
        jo["contents"] = o.contents;
        if (o.audio) {
            json ja;
            ja["category"] = audio_category_name(o.audio->category);
            ja["audible_radius"] = o.audio->audible_radius;
            ja["transcript"] = o.audio->transcript;
            ja["play_duration"] = o.audio->play_duration;
            jo["audio"] = ja;
        }
        objects.push_back(jo);
    }
    j["objects"] = objects;

    json hops = json::array();
    for (const auto& h : scene.prop_chain.hops)
        hops.push_back({{"reveal", reveal_kind_name(h.reveal)},
                        {"gate", h.gate},
                        {"yields", h.yields}});
    j["prop_chain"] = {{"hops", hops}};

    if (scene.transient_clue)
        j["transient_clue"] = {{"display_object", scene.transient_clue->display_object},
                               {"window_duration", scene.transient_clue->window_duration}};

    json items = json::array();
    for (const auto& it : scene.items)
        items.push_back({{"id", it.id},
                         {"name", it.name},
                         {"description", it.description},
                         {"kind", it.is_key ? "Key" : "Note"}});
    j["items"] = items;

    j["step_limit"] = scene.step_limit;
    j["seed"] = scene.seed;
    j["prop_count"] = scene.prop_count;
    return j.dump(2) + "\n";
}

SceneSpec scene_from_json(const std::string& text) {
    json j = json::parse(text);
    SceneSpec s;
    s.id = j.at("id").get<std::string>();
    auto fam = family_from_name(j.at("family").get<std::string>());
    if (!fam) throw std::runtime_error("unknown family");
    s.family = *fam;

    const json& geo = j.at("geometry");
    s.geometry.width = geo.at("width").get<double>();
    s.geometry.depth = geo.at("depth").get<double>();
    for (const auto& w : geo.at("walls"))
        s.geometry.walls.push_back({vec2_from_json(w.at("a")), vec2_from_json(w.at("b"))});
    s.geometry.exit_point = vec2_from_json(geo.at("exit").at("point"));
    auto side = exit_side_from_name(geo.at("exit").at("side").get<std::string>());
    if (!side) throw std::runtime_error("unknown exit side");
    s.geometry.exit_side = *side;

    for (const auto& jo : j.at("objects")) {
        GameObject o;
        o.id = jo.at("id").get<std::string>();
        auto kind = object_kind_from_name(jo.at("kind").get<std::string>());
        if (!kind) throw std::runtime_error("unknown object kind");
        o.kind = *kind;
        o.position = vec2_from_json(jo.at("position"));
        o.interactable = jo.at("interactable").get<bool>();
        o.lock = lock_from_json(jo.at("lock"));
        o.contents = jo.at("contents").get<std::vector<std::string>>();
        if (jo.contains("audio")) {
            AudioSourceSpec a;
            auto cat = audio_category_from_name(jo.at("audio").at("category").get<std::string>());
            if (!cat) throw std::runtime_error("unknown audio category");
            a.category = *cat;
            a.audible_radius = jo.at("audio").at("audible_radius").get<double>();
            a.transcript = jo.at("audio").at("transcript").get<std::string>();
            a.play_duration = jo.at("audio").at("play_duration").get<double>();
            o.audio = a;
        }
        s.objects.push_back(std::move(o));
    }

    for (const auto& h : j.at("prop_chain").at("hops")) {
        PropHop hop;
        auto r = reveal_kind_from_name(h.at("reveal").get<std::string>());
        if (!r) throw std::runtime_error("unknown reveal kind");
        hop.reveal = *r;
        hop.gate = h.at("gate").get<std::string>();
        hop.yields = h.at("yields").get<std::string>();
        s.prop_chain.hops.push_back(std::move(hop));
    }

    if (j.contains("transient_clue")) {
        TransientClueSpec t;
        t.display_object = j.at("transient_clue").at("display_object").get<std::string>();
        t.window_duration = j.at("transient_clue").at("window_duration").get<double>();
        s.transient_clue = t;
    }

    for (const auto& ji : j.at("items")) {
        ItemSpec it;
        it.id = ji.at("id").get<std::string>();
        it.name = ji.at("name").get<std::string>();
        it.description = ji.at("description").get<std::string>();
        it.is_key = ji.at("kind").get<std::string>() == "Key";
        s.items.push_back(std::move(it));
    }

    s.step_limit = j.at("step_limit").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.prop_count = j.at("prop_count").get<int>();
    return s;
}

void save_scene(const SceneSpec& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write scene file: " + path);
    out << scene_to_json(scene);
}

SceneSpec load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

}  // namespace escape4d
