#include "escape4d/protocol.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace escape4d {

using nlohmann::json;

namespace {

double as_number(const json& j, const char* field) {
    if (j.is_number()) return j.get<double>();
    throw std::runtime_error(std::string("field '") + field + "' is not a number");
}

}  // namespace

DecodeResult decode_action(const std::string& text) {
    DecodeResult res;
    res.raw = text;

    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        // Models often wrap the payload in code fences or prose; salvage the
        // outermost {...} span before giving up.
        auto lo = text.find('{');
        auto hi = text.rfind('}');
        if (lo != std::string::npos && hi != std::string::npos && hi > lo)
            j = json::parse(text.substr(lo, hi - lo + 1), nullptr, false);
    }
    if (j.is_discarded() || !j.is_object()) {
        res.error = "not a JSON object";
        return res;
    }

    ActionRequest a;
    try {
        for (const auto& [key, value] : j.items()) {
            if (value.is_null()) continue;
            if (key == "move_forward") {
                a.move_forward = as_number(value, "move_forward");
            } else if (key == "rotate_right") {
                a.rotate_right = as_number(value, "rotate_right");
            } else if (key == "rotate_down") {
                a.rotate_down = as_number(value, "rotate_down");
            } else if (key == "jump") {
                a.jump = value.get<bool>();
            } else if (key == "look_at") {
                if (!value.is_array() || value.size() != 2)
                    throw std::runtime_error("look_at must be [x, y]");
                a.look_at = {{as_number(value.at(0), "look_at.x"),
                              as_number(value.at(1), "look_at.y")}};
            } else if (key == "grab") {
                a.grab = value.get<bool>();
            } else if (key == "trigger") {
                a.trigger = value.get<bool>();
            } else if (key == "interactions") {
                if (!value.is_object()) throw std::runtime_error("interactions must be a dict");
                Interactions inter;
                for (const auto& [ik, iv] : value.items()) {
                    if (iv.is_null()) continue;
                    if (ik == "use_item_id")
                        inter.use_item_id = iv.get<std::string>();
                    else if (ik == "input")
                        inter.input = iv.get<std::string>();
                    else
                        res.warnings.push_back("unknown interactions field ignored: " + ik);
                }
                if (!inter.use_item_id.empty() || !inter.input.empty()) a.interactions = inter;
            } else if (key == "read") {
                std::string r = value.get<std::string>();
                if (!r.empty()) a.read = r;
            } else if (key == "rationale") {
                a.rationale = value.get<std::string>();
            } else {
                res.warnings.push_back("unknown field ignored: " + key);
            }
        }
    } catch (const std::exception& e) {
        res.error = e.what();
        return res;
    }

    a.clamp_ranges();
    res.action = std::move(a);
    res.ok = true;
    return res;
}

namespace {

json action_to_json(const ActionRequest& a) {
    json j;
    j["move_forward"] = a.move_forward;
    j["rotate_right"] = a.rotate_right;
    j["rotate_down"] = a.rotate_down;
    j["jump"] = a.jump;
    if (a.look_at)
        j["look_at"] = {(*a.look_at)[0], (*a.look_at)[1]};
    else
        j["look_at"] = nullptr;
    j["grab"] = a.grab;
    j["trigger"] = a.trigger;
    if (a.interactions)
        j["interactions"] = {{"use_item_id", a.interactions->use_item_id},
                             {"input", a.interactions->input}};
    else
        j["interactions"] = nullptr;
    j["read"] = a.read ? json(*a.read) : json(nullptr);
    j["rationale"] = a.rationale;
    return j;
}

ActionRequest action_from_json(const json& j) {
    ActionRequest a;
    a.move_forward = j.at("move_forward").get<double>();
    a.rotate_right = j.at("rotate_right").get<double>();
    a.rotate_down = j.at("rotate_down").get<double>();
    a.jump = j.at("jump").get<bool>();
    if (!j.at("look_at").is_null())
        a.look_at = {{j.at("look_at").at(0).get<double>(), j.at("look_at").at(1).get<double>()}};
    a.grab = j.at("grab").get<bool>();
    a.trigger = j.at("trigger").get<bool>();
    if (!j.at("interactions").is_null()) {
        Interactions inter;
        inter.use_item_id = j.at("interactions").at("use_item_id").get<std::string>();
        inter.input = j.at("interactions").at("input").get<std::string>();
        a.interactions = inter;
    }
    if (!j.at("read").is_null()) a.read = j.at("read").get<std::string>();
    a.rationale = j.at("rationale").get<std::string>();
    return a;
}

json observation_to_json(const Observation& obs) {
    json j;
    json visible = json::array();
    for (const auto& v : obs.visible)
        visible.push_back({{"id", v.id},
                           {"kind", v.kind},
                           {"image_coords", {v.image_coords[0], v.image_coords[1]}},
                           {"distance", v.distance}});
    j["visible"] = visible;
    j["center_object"] = obs.center_object ? json(*obs.center_object) : json(nullptr);
    j["interaction_result"] = obs.interaction_result;
    json ambient = json::array();
    for (const auto& a : obs.ambient)
        ambient.push_back({{"loudness", a.loudness}, {"bearing", a.bearing}});
    j["ambient"] = ambient;
    j["transcripts"] = obs.transcripts;
    j["bag_desc"] = obs.bag_desc;
    j["steps_remaining"] = obs.steps_remaining;
    return j;
}

Observation observation_from_json(const json& j) {
    Observation obs;
    for (const auto& jv : j.at("visible")) {
        VisibleObject v;
        v.id = jv.at("id").get<std::string>();
        v.kind = jv.at("kind").get<std::string>();
        v.image_coords = {jv.at("image_coords").at(0).get<double>(),
                          jv.at("image_coords").at(1).get<double>()};
        v.distance = jv.at("distance").get<double>();
        obs.visible.push_back(std::move(v));
    }
    if (!j.at("center_object").is_null())
        obs.center_object = j.at("center_object").get<std::string>();
    obs.interaction_result = j.at("interaction_result").get<std::string>();
    for (const auto& ja : j.at("ambient"))
        obs.ambient.push_back({ja.at("loudness").get<double>(), ja.at("bearing").get<double>()});
    obs.transcripts = j.at("transcripts").get<std::vector<std::string>>();
    obs.bag_desc = j.at("bag_desc").get<std::string>();
    obs.steps_remaining = j.at("steps_remaining").get<int>();
    return obs;
}

}  // namespace

std::string encode_observation(const Observation& obs) { return observation_to_json(obs).dump(); }

Observation decode_observation(const std::string& text) {
    return observation_from_json(json::parse(text));
}

std::string encode_action(const ActionRequest& action) { return action_to_json(action).dump(); }

std::string log_to_jsonl(const TrajectoryLog& log) {
    std::ostringstream out;
    json header;
    header["scene_id"] = log.scene_id;
    header["seed"] = log.seed;
    header["escaped"] = log.escaped;
    header["steps_recorded"] = log.steps_recorded;
    header["t_found"] = log.t_found ? json(*log.t_found) : json(nullptr);
    header["distractor_triggered"] = log.distractor_triggered;
    header["misguided"] = log.misguided;
    out << header.dump() << "\n";
    for (const auto& r : log.records) {
        json j;
        j["step_index"] = r.step_index;
        j["clock_before"] = r.clock_before;
        j["clock_after"] = r.clock_after;
        j["pose_after"] = {{"position", {r.pose_after.position.x, r.pose_after.position.y}},
                           {"yaw", r.pose_after.yaw},
                           {"pitch", r.pose_after.pitch}};
        j["action"] = action_to_json(r.action);
        json events = json::array();
        for (const auto& e : r.events)
            events.push_back({{"kind", event_kind_name(e.kind)}, {"detail", e.detail}});
        j["events"] = events;
        j["audio_active"] = r.audio_active;
        out << j.dump() << "\n";
    }
    return out.str();
}

TrajectoryLog log_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty log");
    json header = json::parse(line);
    TrajectoryLog log;
    log.scene_id = header.at("scene_id").get<std::string>();
    log.seed = header.at("seed").get<std::uint64_t>();
    log.escaped = header.at("escaped").get<bool>();
    log.steps_recorded = header.at("steps_recorded").get<int>();
    if (!header.at("t_found").is_null()) log.t_found = header.at("t_found").get<double>();
    log.distractor_triggered = header.at("distractor_triggered").get<bool>();
    log.misguided = header.at("misguided").get<bool>();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        StepRecord r;
        r.step_index = j.at("step_index").get<int>();
        r.clock_before = j.at("clock_before").get<double>();
        r.clock_after = j.at("clock_after").get<double>();
        r.pose_after.position = {j.at("pose_after").at("position").at(0).get<double>(),
                                 j.at("pose_after").at("position").at(1).get<double>()};
        r.pose_after.yaw = j.at("pose_after").at("yaw").get<double>();
        r.pose_after.pitch = j.at("pose_after").at("pitch").get<double>();
        r.action = action_from_json(j.at("action"));
        for (const auto& je : j.at("events")) {
            auto kind = event_kind_from_name(je.at("kind").get<std::string>());
            if (!kind) throw std::runtime_error("unknown event kind in log");
            r.events.push_back({*kind, je.at("detail").get<std::string>()});
        }
        r.audio_active = j.at("audio_active").get<bool>();
        log.records.push_back(std::move(r));
    }
    return log;
}

void save_log(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write log file: " + path);
    out << log_to_jsonl(log);
}

TrajectoryLog load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read log file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return log_from_jsonl(ss.str());
}

// ---------------------------------------------------------------------------
// Prompt templates

namespace {

const char* kActionSchema = R"({
       "move_forward": float,
       "rotate_right": float,
       "rotate_down": float,
       "jump": bool,
       "look_at": [x: float, y: float],
       "grab": bool,
       "trigger": bool,
       "interactions": {
           "use_item_id": str,
           "input": str
       },
       "read": str,
       "rationale": str
   })";

}  // namespace

std::string system_prompt_template() {
    std::string schema = kActionSchema;
    return
        "You find yourself locked inside a room, and your ultimate goal is to escape "
        "the room. i.e. the room escape game.\n\n"
        "You can explore the room, interact with objects, inspect items, and resolve "
        "puzzles. You can adopt the following actions to explore the room and interact "
        "with objects:\n\n"
        "- move_forward: float, ranged between [-10, 10]. This is the number of meters "
        "you want to move forward (negative value means moving backward).\n"
        "- rotate_right: float, ranged between [-180, 180]. This is the number of "
        "degrees you want to turn right (negative value means turn left).\n"
        "- rotate_down: float, ranged between [-90, 90]. This is the angle you want to "
        "adjust your view vertically. Positive value means looking downward, while a "
        "negative value means looking upward. Angle 0 means looking straight ahead.\n"
        "- jump: bool, whether you want to jump (can be used together with moving "
        "forward), e.g., True represents the action \"to jump\".\n"
        "- look_at: list[x: foat, y: float], the range of x and y is [0, 1]. This "
        "parameter is the coordinates of the point in the image you want to look at. "
        "For reference, the coordinates of the upper left corner of the scene are "
        "(0, 0) and the coordinates of the lower right corner are (1, 1). Also to "
        "mention that there are on clues on the ceiling.\n"
        "- grab: bool, whether you require to interact with the object located exactly "
        "at the center of the scene (marked by a red dot). e.g., to grab the key or to "
        "interact with (or open) a box at the center of the scene, set grab=True. The "
        "red dot assists in locating the object you require to interact with. You "
        "might need to adjust the view or move closer to ensure the red dot is on "
        "your target object, through the rotate_right, rotate_down, and move_forward "
        "actions. To successfully grab an object, you should center the object via "
        "the red dot and be in a certain distance to it. If the grabbing fails, try "
        "move closer towards the object. If it fails multiple times at the same "
        "position, you should be aware that not all objects are interactable, do not "
        "get stucked in uninteractable position.\n"
        "- trigger: bool, whether you want to attempt to trigger the sound of a "
        "sound-emitting object (e.g., recorder/radiogram/musicbox) at the center of "
        "the scene. This ONLY works when you are close enough and facing it; "
        "otherwise it will fail and you should move closer / adjust your view.\n"
        "- interactions : dict:{\"use_item_id\": str, this is the item_id you require "
        "to view or use (when used together with grab=True, it means to use this item "
        "to interact with the target object you want to grab, e.g. using item_id of "
        "the key to open the door in the scene), \"input\": str, this is the message "
        "you want to input when interacting with the center object}.\n"
        "- read: str, this is the item_id that you want to get detailed information "
        "from your bag.\n"
        "- rationale: str, represents the rationale of your action. This should "
        "explain your decision-making process and help the agent understand your "
        "thinking process.\n\n"
        "You need to return data in the following format of JSON_string to interact "
        "with the scene:\n" +
        schema +
        "\n\n"
        "All of the above operations are optional. If no value is passed in, the "
        "interactive operation will not be performed.\n\n"
        "You must follow the above instructions and don't say anything else except "
        "for the JSON_string of operations.\n";
}

std::string step_prompt_template() {
    std::string schema = kActionSchema;
    return
        "{interaction_result}\n"
        "===\n"
        "The items in your bag usable include:\n"
        "{bag_desc}\n"
        "===\n"
        "Please determine the next action(s) that could help you observe the room or "
        "obtain useful tools or clues.\n"
        "If you find yourself stuck in a corner, try turn around by passing "
        "rotate_right.\n"
        "You need to return data in the following format of JSON_string to interact "
        "with the scene and don't say anything else:\n" +
        schema + "\n";
}

std::string consistency_prompt_template() {
    return
        "You are a reasoning consistency evaluator for a multimodal agent benchmark. "
        "Your task is to determine whether the agent's intention (described in the "
        "\"rationale\") matches the actual interaction result (described in the "
        "\"response\").\n\n"
        "Specifically, you are given:\n"
        "- The agent's rationale for why it attempted an interaction, describing its "
        "goal or belief about the current environment.\n"
        "- The response from the environment after the interaction, which includes "
        "the actual result (e.g., what item was interacted with and what was "
        "obtained).\n\n"
        "Your goal is to determine whether the object the agent intended to interact "
        "with matches the object that was actually interacted with according to the "
        "response.\n\n"
        "If the agent tried to interact with object A (e.g., a microwave), but the "
        "response shows interaction with object B (e.g., a box), and B was not the "
        "intended target, this is considered an inconsistent interaction (i.e., "
        "accidental success or misaligned action).\n\n"
        "Special Cases: if the response is \"Escaped successfully!\", you should "
        "check whether the agent's rationale explicitly or implicitly indicates the "
        "intention to escape (e.g., trying to open the door to leave). In another "
        "special case, if the agent is trying to adjust its view to align with the "
        "door, and it has triggered the information of the door, this is considered "
        "consistent. If not, treat it as inconsistent.\n\n"
        "You must give your feedback in the following JSON-string format and DON'T "
        "say anything else:\n"
        "{\n"
        "    \"Consistency\": 1 | 0\n"
        "}\n\n"
        "Where:\n"
        "- 1 means the rationale and interaction are consistent (i.e., aligned).\n"
        "- 0 means the interaction appears to be accidental, mismatched, or "
        "unintended.\n\n"
        "Respond only with Consistency: 1 or Consistency: 0.\n\n"
        "---\n\n"
        "Example 1:\n"
        "rationale: Moving closer to the microwave to try interacting with it one "
        "last time using '1264'. If this doesn't work, I'll need to explore other "
        "areas.\n"
        "response: You used the correct password to unlock the box... You did not "
        "interact with any objects in the last step.\n"
        "Expected output: Consistency: 0\n\n"
        "Example 2:\n"
        "rationale: I'll try using the key I just picked up on the door. Let's see if "
        "I can escape now.\n"
        "response: Escaped successfully!\n"
        "Expected output: Consistency: 1\n\n"
        "Example 3:\n"
        "rationale: I want to check if the small box has any useful items inside.\n"
        "response: You opened the box and found a screwdriver.\n"
        "Expected output: Consistency: 1\n\n"
        "Please score the following interaction:\n"
        "rationale: {rationale}\n"
        "response(s): {response}\n";
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c != '{') {
            out += c;
            ++i;
            continue;
        }
        std::size_t close = tmpl.find('}', i + 1);
        std::string inner =
            close == std::string::npos ? "" : tmpl.substr(i + 1, close - i - 1);
        // Only simple identifier spans are placeholders; JSON braces in the
        // schema blocks pass through untouched.
        bool is_placeholder = !inner.empty();
        for (char ic : inner)
            if (!(std::isalnum(static_cast<unsigned char>(ic)) || ic == '_'))
                is_placeholder = false;
        if (!is_placeholder) {
            out += c;
            ++i;
            continue;
        }
        auto it = values.find(inner);
        if (it == values.end())
            throw std::runtime_error("unknown placeholder: {" + inner + "}");
        out += it->second;
        i = close + 1;
    }
    return out;
}

std::string render_system_prompt() { return system_prompt_template(); }

std::string render_step_prompt(const Observation& obs) {
    return render_template(step_prompt_template(),
                           {{"interaction_result", obs.interaction_result},
                            {"bag_desc", obs.bag_desc}});
}

std::string render_consistency_prompt(const std::string& rationale, const std::string& response) {
    return render_template(consistency_prompt_template(),
                           {{"rationale", rationale}, {"response", response}});
}

}  // namespace escape4d
