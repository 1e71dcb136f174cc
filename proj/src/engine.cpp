#include "escape4d/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace escape4d {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::GrabSuccess: return "grab_success";
        case EventKind::GrabFail: return "grab_fail";
        case EventKind::TriggerSuccess: return "trigger_success";
        case EventKind::TriggerFail: return "trigger_fail";
        case EventKind::ClueShown: return "clue_shown";
        case EventKind::Escape: return "escape";
        case EventKind::Misguided: return "misguided";
        case EventKind::DecodeError: return "decode_error";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_name(const std::string& name) {
    for (EventKind k : {EventKind::GrabSuccess, EventKind::GrabFail, EventKind::TriggerSuccess,
                        EventKind::TriggerFail, EventKind::ClueShown, EventKind::Escape,
                        EventKind::Misguided, EventKind::DecodeError})
        if (name == event_kind_name(k)) return k;
    return std::nullopt;
}

void ActionRequest::clamp_ranges() {
    move_forward = clamp(move_forward, -10.0, 10.0);
    rotate_right = clamp(rotate_right, -180.0, 180.0);
    rotate_down = clamp(rotate_down, -90.0, 90.0);
    if (look_at) {
        (*look_at)[0] = clamp((*look_at)[0], 0.0, 1.0);
        (*look_at)[1] = clamp((*look_at)[1], 0.0, 1.0);
    }
}

namespace {

// look_at overrides the rotate fields; the equivalent rotation maps image
// coordinates back to angular offsets within the view frustum.
void effective_rotation(const ActionRequest& a, double& dyaw, double& dpitch) {
    if (a.look_at) {
        dyaw = ((*a.look_at)[0] - 0.5) * kFovHorizontal;
        dpitch = ((*a.look_at)[1] - 0.5) * kFovVertical;
    } else {
        dyaw = a.rotate_right;
        dpitch = a.rotate_down;
    }
}

}  // namespace

double action_time_cost(const ActionRequest& action) {
    ActionRequest a = action;
    a.clamp_ranges();
    double dyaw = 0.0, dpitch = 0.0;
    effective_rotation(a, dyaw, dpitch);
    double cost = std::abs(a.move_forward) / kForwardSpeed +
                  (std::abs(dyaw) + std::abs(dpitch)) / kRotationSpeed;
    if (a.has_interaction_cost()) cost += kInteractCost;
    return cost;
}

double loudness_at(const AudioSourceSpec& source, const Vec2& source_pos, const Vec2& listener) {
    double d = distance(source_pos, listener);
    return std::max(0.0, 1.0 - d / source.audible_radius);
}

WorldState WorldState::initial(const SceneSpec& scene) {
    WorldState s;
    s.scene = &scene;
    s.agent.position = {scene.geometry.width / 2.0, scene.geometry.depth / 2.0};
    s.agent.yaw = 0.0;
    s.agent.pitch = 0.0;
    for (const auto& o : scene.objects) {
        ObjectState os;
        os.locked = o.lock.kind != LockKind::None;
        s.object_states[o.id] = os;
    }
    return s;
}

namespace {

double view_distance(const RoomGeometry& g) { return std::hypot(g.width, g.depth); }

bool line_of_sight(const WorldState& state, const Vec2& target) {
    Segment ray{state.agent.position, target};
    for (const auto& w : state.scene->geometry.walls)
        if (segments_intersect(ray, w)) return false;
    return true;
}

struct ViewGeometry {
    bool visible = false;
    double dyaw = 0.0;    // signed horizontal offset from view center
    double dpitch = 0.0;  // signed vertical offset (down positive)
    double dist = 0.0;
};

// Objects sit at eye level; pitch only shifts them vertically in the image.
ViewGeometry view_geometry(const WorldState& state, const GameObject& obj) {
    ViewGeometry v;
    v.dist = distance(state.agent.position, obj.position);
    v.dyaw = angle_diff(yaw_towards(state.agent.position, obj.position), state.agent.yaw);
    v.dpitch = -state.agent.pitch;
    v.visible = v.dist <= view_distance(state.scene->geometry) &&
                std::abs(v.dyaw) <= kFovHorizontal / 2.0 &&
                std::abs(v.dpitch) <= kFovVertical / 2.0 &&
                line_of_sight(state, obj.position);
    return v;
}

bool source_playing(const WorldState& state, const std::string& id) {
    for (const auto& p : state.playing_audio)
        if (p.source_id == id && p.ends_at > state.clock) return true;
    return false;
}

std::string distractor_digits(const SceneSpec& scene) {
    for (const auto& o : scene.objects)
        if (o.audio && o.audio->category == AudioCategory::TriggerMisleading) {
            std::string digits;
            for (char c : o.audio->transcript)
                if (c >= '0' && c <= '9') digits += c;
            return digits;
        }
    return {};
}

std::string door_password(const SceneSpec& scene) {
    const GameObject* d = scene.door();
    return d && d->lock.kind == LockKind::NeedsPassword ? d->lock.password : std::string{};
}

void expire_clue_window(WorldState& state) {
    if (state.clue_window.phase == ClueWindowPhase::Active && state.clock > state.clue_window.end)
        state.clue_window.phase = ClueWindowPhase::Expired;
}

std::string bag_description(const WorldState& state) {
    if (state.bag.empty()) return "(empty)";
    std::ostringstream out;
    for (std::size_t i = 0; i < state.bag.size(); ++i) {
        const ItemSpec* it = state.scene->find_item(state.bag[i]);
        if (i) out << ", ";
        out << state.bag[i];
        if (it) out << " (" << it->name << ")";
    }
    return out.str();
}

}  // namespace

Observation observe(WorldState& state) {
    expire_clue_window(state);
    Observation obs;
    obs.steps_remaining = state.scene->step_limit - state.step_index;
    obs.bag_desc = bag_description(state);

    double best_center = std::numeric_limits<double>::infinity();
    for (const auto& o : state.scene->objects) {
        const ObjectState& os = state.object_states.at(o.id);
        if (os.consumed) continue;
        ViewGeometry v = view_geometry(state, o);
        if (!v.visible) continue;
        VisibleObject vo;
        vo.id = o.id;
        vo.kind = object_kind_name(o.kind);
        vo.image_coords = {0.5 + v.dyaw / kFovHorizontal, 0.5 + v.dpitch / kFovVertical};
        vo.distance = v.dist;
        obs.visible.push_back(vo);

        // nearest object within the centering cone wins the red dot
        double center_off = std::max(std::abs(v.dyaw), std::abs(v.dpitch));
        if (center_off < kGrabCenterDeg && (!obs.center_object || v.dist < best_center)) {
            obs.center_object = o.id;
            best_center = v.dist;
        }

        // Transient clue text shows on a visible WallDisplay only while the
        // window is active; first sighting pins t_found.
        if (o.kind == ObjectKind::WallDisplay && state.scene->transient_clue &&
            state.scene->transient_clue->display_object == o.id &&
            state.clue_window.phase == ClueWindowPhase::Active) {
            obs.transcripts.push_back("The wall display shows: " + door_password(*state.scene));
            if (!state.t_found) {
                state.t_found = state.clock - state.clue_window.start;
                state.clue_sighting_pending = true;
            }
        }
    }

    for (const auto& o : state.scene->objects) {
        if (!o.audio) continue;
        bool audible = false;
        if (o.audio->category == AudioCategory::Ambient) {
            audible = !state.suppress_ambient;
        } else {
            audible = source_playing(state, o.id);
            if (audible) obs.transcripts.push_back(o.audio->transcript);
        }
        if (!audible) continue;
        double l = loudness_at(*o.audio, o.position, state.agent.position);
        if (l <= 0.0) continue;
        AmbientReading r;
        r.loudness = l;
        r.bearing = angle_diff(yaw_towards(state.agent.position, o.position), state.agent.yaw);
        obs.ambient.push_back(r);
    }
    return obs;
}

bool position_clear(const SceneSpec& scene, const Vec2& p) {
    const RoomGeometry& g = scene.geometry;
    if (p.x < kAgentRadius || p.x > g.width - kAgentRadius || p.y < kAgentRadius ||
        p.y > g.depth - kAgentRadius)
        return false;
    for (const auto& w : g.walls)
        if (point_segment_distance(p, w) < kAgentRadius) return false;
    return true;
}

bool segment_clear_of_walls(const SceneSpec& scene, const Vec2& a, const Vec2& b) {
    Segment ray{a, b};
    for (const auto& w : scene.geometry.walls)
        if (segments_intersect(ray, w)) return false;
    return true;
}

namespace {

// Advance along the ray in fine fixed increments and stop before the first
// invalid position. Deterministic; 5 mm resolution.
Vec2 clamped_move(const WorldState& state, const Vec2& start, double yaw, double dist) {
    if (dist == 0.0) return start;
    const double step = 0.005;
    Vec2 dir = heading(yaw);
    double sign = dist < 0.0 ? -1.0 : 1.0;
    double total = std::abs(dist);
    int n = std::max(1, static_cast<int>(std::ceil(total / step)));
    double ok = 0.0;
    for (int i = 1; i <= n; ++i) {
        double tt = std::min(total, total * i / n);
        Vec2 p = start + dir * (sign * tt);
        if (!position_clear(*state.scene, p)) break;
        ok = tt;
    }
    return start + dir * (sign * ok);
}

struct CenterInfo {
    const GameObject* object = nullptr;
    ViewGeometry view;
};

CenterInfo center_object(const WorldState& state) {
    CenterInfo best;
    for (const auto& o : state.scene->objects) {
        if (state.object_states.at(o.id).consumed) continue;
        ViewGeometry v = view_geometry(state, o);
        if (!v.visible) continue;
        if (std::max(std::abs(v.dyaw), std::abs(v.dpitch)) >= kGrabCenterDeg) continue;
        if (!best.object || v.dist < best.view.dist) {
            best.object = &o;
            best.view = v;
        }
    }
    return best;
}

bool in_bag(const WorldState& state, const std::string& item) {
    return std::find(state.bag.begin(), state.bag.end(), item) != state.bag.end();
}

bool lock_satisfied(const WorldState& state, const Lock& lock, const ActionRequest& action,
                    std::string& why_not) {
    switch (lock.kind) {
        case LockKind::None:
            return true;
        case LockKind::NeedsKey: {
            std::string item = action.interactions ? action.interactions->use_item_id : "";
            if (item.empty()) {
                why_not = "It is locked. You need the right key.";
                return false;
            }
            if (!in_bag(state, item)) {
                why_not = "You do not have item '" + item + "' in your bag.";
                return false;
            }
            if (item != lock.key_item) {
                why_not = "The " + item + " does not fit this lock.";
                return false;
            }
            return true;
        }
        case LockKind::NeedsPassword: {
            std::string input = action.interactions ? action.interactions->input : "";
            if (input.empty()) {
                why_not = "It is locked with a password pad.";
                return false;
            }
            if (input != lock.password) {
                why_not = "Wrong password.";
                return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace

StepRecord apply_action(WorldState& state, ActionRequest action, Observation* obs_out) {
    if (state.escaped) throw std::logic_error("episode already finished: agent escaped");
    if (state.step_index >= state.scene->step_limit)
        throw std::logic_error("episode already finished: step limit reached");

    StepRecord rec;
    rec.step_index = state.step_index;
    rec.clock_before = state.clock;
    std::string result;

    if (action.decode_error) {
        // forgiving loop: unparsable agent output becomes a no-op step
        rec.events.push_back({EventKind::DecodeError, *action.decode_error});
        action = ActionRequest{};
        result = "Your last reply could not be parsed as an action. ";
    }
    action.clamp_ranges();
    rec.action = action;

    // 1. rotation (look_at overrides the rotate fields)
    double dyaw = 0.0, dpitch = 0.0;
    effective_rotation(action, dyaw, dpitch);
    state.agent.yaw = wrap_yaw(state.agent.yaw + dyaw);
    state.agent.pitch = clamp(state.agent.pitch + dpitch, -90.0, 90.0);

    // 2. translation, clamped at walls and bounds
    state.agent.position =
        clamped_move(state, state.agent.position, state.agent.yaw, action.move_forward);

    double new_clock = state.clock + action_time_cost(action);

    // 3. grab resolution
    if (action.grab) {
        CenterInfo c = center_object(state);
        if (!c.object) {
            result += "Grab failed: no object at the center of your view. ";
            rec.events.push_back({EventKind::GrabFail, ""});
        } else if (c.view.dist > kGrabRange) {
            result += "Grab failed: " + c.object->id + " is too far away. ";
            rec.events.push_back({EventKind::GrabFail, c.object->id});
        } else if (!c.object->interactable) {
            result += "Grab failed: the " + c.object->id + " is not interactable. ";
            rec.events.push_back({EventKind::GrabFail, c.object->id});
        } else {
            ObjectState& os = state.object_states.at(c.object->id);
            std::string why_not;
            switch (c.object->kind) {
                case ObjectKind::Door:
                    if (lock_satisfied(state, c.object->lock, action, why_not)) {
                        state.escaped = true;
                        result += "Escaped successfully!";
                        rec.events.push_back({EventKind::GrabSuccess, c.object->id});
                        rec.events.push_back({EventKind::Escape, c.object->id});
                    } else {
                        result += "The door will not open. " + why_not + " ";
                        rec.events.push_back({EventKind::GrabFail, c.object->id});
                    }
                    break;
                case ObjectKind::Box:
                    if (os.opened) {
                        result += "The " + c.object->id + " is already open and empty. ";
                        rec.events.push_back({EventKind::GrabFail, c.object->id});
                    } else if (lock_satisfied(state, c.object->lock, action, why_not)) {
                        os.opened = true;
                        os.locked = false;
                        std::string found;
                        for (const auto& item : c.object->contents) {
                            state.bag.push_back(item);
                            if (!found.empty()) found += ", ";
                            found += item;
                        }
                        if (c.object->lock.kind == LockKind::NeedsPassword)
                            result += "You used the correct password to unlock the " +
                                      c.object->id + ". ";
                        result += "You opened the " + c.object->id + " and found: " +
                                  (found.empty() ? "nothing" : found) + ". ";
                        rec.events.push_back({EventKind::GrabSuccess, c.object->id});
                    } else {
                        result += "Cannot open the " + c.object->id + ". " + why_not + " ";
                        rec.events.push_back({EventKind::GrabFail, c.object->id});
                    }
                    break;
                case ObjectKind::Key: {
                    os.consumed = true;
                    std::string got;
                    for (const auto& item : c.object->contents) {
                        state.bag.push_back(item);
                        if (!got.empty()) got += ", ";
                        got += item;
                    }
                    result += "You picked up: " + got + ". ";
                    rec.events.push_back({EventKind::GrabSuccess, c.object->id});
                    break;
                }
                default:
                    result += "Nothing happens when you grab the " + c.object->id + ". ";
                    rec.events.push_back({EventKind::GrabFail, c.object->id});
                    break;
            }
        }
    }

    // 4. trigger resolution
    if (action.trigger && !state.escaped) {
        CenterInfo c = center_object(state);
        const GameObject* obj = c.object;
        bool sound_emitting = obj && obj->audio &&
                              obj->audio->category != AudioCategory::Ambient;
        if (!obj) {
            result += "Trigger failed: no object at the center of your view. ";
            rec.events.push_back({EventKind::TriggerFail, ""});
        } else if (!sound_emitting) {
            result += "Trigger failed: the " + obj->id + " does not emit sound. ";
            rec.events.push_back({EventKind::TriggerFail, obj->id});
        } else if (c.view.dist > kTriggerRange ||
                   std::abs(c.view.dyaw) > kTriggerFacingDeg) {
            result += "Trigger failed: move closer to the " + obj->id +
                      " and face it directly. ";
            rec.events.push_back({EventKind::TriggerFail, obj->id});
        } else {
            ObjectState& os = state.object_states.at(obj->id);
            os.triggered = true;
            state.playing_audio.push_back(
                {obj->id, new_clock, new_clock + obj->audio->play_duration});
            result += "The " + obj->id + " starts playing. ";
            rec.events.push_back({EventKind::TriggerSuccess, obj->id});
            if (obj->audio->category == AudioCategory::TriggerMisleading) {
                state.distractor_triggered = true;
                if (!state.distractor_trigger_step)
                    state.distractor_trigger_step = rec.step_index;
            } else if (state.scene->transient_clue &&
                       state.clue_window.phase == ClueWindowPhase::Inactive) {
                state.clue_window.phase = ClueWindowPhase::Active;
                state.clue_window.start = new_clock;
                state.clue_window.end =
                    new_clock + state.scene->transient_clue->window_duration;
            }
        }
    }

    // 5. read item description
    if (action.read) {
        const ItemSpec* it = state.scene->find_item(*action.read);
        if (it && in_bag(state, *action.read))
            result += it->name + ": " + it->description + " ";
        else
            result += "You do not have item '" + *action.read + "'. ";
    }

    // Misguidance: distractor digits submitted within the window after the
    // distractor was triggered.
    if (action.interactions && !action.interactions->input.empty() &&
        state.distractor_trigger_step) {
        std::string digits = distractor_digits(*state.scene);
        if (!digits.empty() && action.interactions->input == digits &&
            rec.step_index <= *state.distractor_trigger_step + kMisguidanceWindowSteps) {
            if (!state.misguided) rec.events.push_back({EventKind::Misguided, ""});
            state.misguided = true;
        }
    }

    // audio_active: trigger-category playback overlapping [clock_before, clock_after).
    // A playback started by this very action begins at clock_after and counts
    // from the next step on.
    rec.audio_active = false;
    for (const auto& p : state.playing_audio)
        if (p.starts_at < new_clock && p.ends_at > rec.clock_before) rec.audio_active = true;

    state.clock = new_clock;
    state.step_index += 1;
    expire_clue_window(state);

    state.agent.normalize();
    rec.clock_after = state.clock;
    rec.pose_after = state.agent;

    Observation post = observe(state);
    post.interaction_result = result;
    if (state.clue_sighting_pending) {
        rec.events.push_back({EventKind::ClueShown, ""});
        state.clue_sighting_pending = false;
    }
    if (obs_out) *obs_out = std::move(post);
    return rec;
}

TrajectoryLog run_episode(const SceneSpec& scene, const PolicyFn& policy, std::uint64_t seed,
                          const EpisodeOptions& options) {
    WorldState state = WorldState::initial(scene);
    state.suppress_ambient = options.no_audio;

    TrajectoryLog log;
    log.scene_id = scene.id;
    log.seed = seed;

    Observation obs = observe(state);
    while (!state.escaped && state.step_index < scene.step_limit) {
        ActionRequest action = policy(obs, state);
        StepRecord rec = apply_action(state, action, &obs);
        log.records.push_back(std::move(rec));
    }

    log.escaped = state.escaped;
    log.steps_recorded =
        state.escaped ? static_cast<int>(log.records.size()) : scene.step_limit + 1;
    log.t_found = state.t_found;
    log.distractor_triggered = state.distractor_triggered;
    log.misguided = state.misguided;
    return log;
}

}  // namespace escape4d
