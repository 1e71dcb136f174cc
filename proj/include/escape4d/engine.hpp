#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "escape4d/core.hpp"

namespace escape4d {

// Interaction thresholds and view constants. Interactions are gated on
// proximity and orientation; these constants define the engine's contract.
inline constexpr double kAgentRadius = 0.3;      // m
inline constexpr double kGrabRange = 2.0;        // m
inline constexpr double kGrabCenterDeg = 5.0;    // center_object threshold
inline constexpr double kTriggerRange = 3.0;     // m
inline constexpr double kTriggerFacingDeg = 10.0;
inline constexpr double kFovHorizontal = 90.0;   // degrees
inline constexpr double kFovVertical = 60.0;     // degrees
inline constexpr double kForwardSpeed = 2.0;     // m/s
inline constexpr double kRotationSpeed = 60.0;   // deg/s
inline constexpr double kInteractCost = 0.5;     // s, grab/trigger fixed cost
inline constexpr double kTriggerPlayDuration = 5.0;  // s, default playback
inline constexpr int kMisguidanceWindowSteps = 3;

struct Interactions {
    std::string use_item_id;
    std::string input;
};

struct ActionRequest {
    double move_forward = 0.0;                // [-10, 10] m
    double rotate_right = 0.0;                // [-180, 180] deg
    double rotate_down = 0.0;                 // [-90, 90] deg
    bool jump = false;                        // logged, no gameplay effect
    std::optional<std::array<double, 2>> look_at;  // [x, y] in [0,1]^2
    bool grab = false;
    bool trigger = false;
    std::optional<Interactions> interactions;
    std::optional<std::string> read;
    std::string rationale;

    /// Set by transports when the agent's reply could not be parsed; the
    /// engine then records a no-op step with a decode_error event. Not part
    /// of the wire format.
    std::optional<std::string> decode_error;

    /// Clamps all numeric fields to their documented ranges.
    void clamp_ranges();
    bool has_interaction_cost() const { return grab || trigger || interactions.has_value(); }
};

/// Simulated-time cost of one action under the fixed speed table
/// (2.0 m/s forward, 60 deg/s rotation, 0.5 s grab/trigger).
double action_time_cost(const ActionRequest& action);

/// Linear attenuation: 1 - d/R, floored at zero beyond the audible radius.
double loudness_at(const AudioSourceSpec& source, const Vec2& source_pos, const Vec2& listener);

/// True when a point keeps the agent radius clear of bounds and walls.
bool position_clear(const SceneSpec& scene, const Vec2& p);

/// True when the straight segment a-b crosses no interior wall.
bool segment_clear_of_walls(const SceneSpec& scene, const Vec2& a, const Vec2& b);

struct VisibleObject {
    std::string id;
    std::string kind;
    std::array<double, 2> image_coords{0.5, 0.5};
    double distance = 0.0;
};

struct AmbientReading {
    double loudness = 0.0;   // [0, 1]
    double bearing = 0.0;    // degrees relative to view center, [-180, 180)
};

struct Observation {
    std::vector<VisibleObject> visible;
    std::optional<std::string> center_object;
    std::string interaction_result;
    std::vector<AmbientReading> ambient;
    std::vector<std::string> transcripts;
    std::string bag_desc;
    int steps_remaining = 0;
};

enum class EventKind {
    GrabSuccess,
    GrabFail,
    TriggerSuccess,
    TriggerFail,
    ClueShown,
    Escape,
    Misguided,
    DecodeError,
};
const char* event_kind_name(EventKind k);
std::optional<EventKind> event_kind_from_name(const std::string& name);

struct StepEvent {
    EventKind kind;
    std::string detail;  // e.g. the object id involved
};

struct StepRecord {
    int step_index = 0;
    double clock_before = 0.0;
    double clock_after = 0.0;
    Pose pose_after;
    ActionRequest action;
    std::vector<StepEvent> events;
    bool audio_active = false;  // trigger-category playback overlapped this step
};

struct TrajectoryLog {
    std::string scene_id;
    std::uint64_t seed = 0;
    bool escaped = false;
    int steps_recorded = 0;  // record count if escaped, else step_limit + 1
    std::vector<StepRecord> records;
    std::optional<double> t_found;  // seconds from transient-window start
    bool distractor_triggered = false;
    bool misguided = false;
};

enum class ClueWindowPhase { Inactive, Active, Expired };

struct ClueWindow {
    ClueWindowPhase phase = ClueWindowPhase::Inactive;
    double start = 0.0;
    double end = 0.0;
};

struct ObjectState {
    bool opened = false;
    bool locked = false;
    bool triggered = false;
    bool consumed = false;
};

struct PlayingAudio {
    std::string source_id;
    double starts_at = 0.0;
    double ends_at = 0.0;
};

/// Per-episode mutable state. Confined to one episode runner; scenes are
/// shared immutably.
struct WorldState {
    const SceneSpec* scene = nullptr;
    Pose agent;
    std::vector<std::string> bag;  // item ids
    std::map<std::string, ObjectState> object_states;
    ClueWindow clue_window;
    std::vector<PlayingAudio> playing_audio;
    double clock = 0.0;
    int step_index = 0;
    bool escaped = false;
    std::optional<double> t_found;
    bool distractor_triggered = false;
    std::optional<int> distractor_trigger_step;
    bool misguided = false;
    bool suppress_ambient = false;  // no-audio ablation variant
    bool clue_sighting_pending = false;  // observe() just pinned t_found

    static WorldState initial(const SceneSpec& scene);
};

/// Computes the symbolic observation for the current state. Sighting the
/// transient clue while its window is active sets t_found as a side effect.
Observation observe(WorldState& state);

/// Applies one protocol action: look_at/rotate, then move (wall-clamped),
/// then grab, trigger and read resolution, then clock advance.
/// Throws std::logic_error if the episode already ended.
StepRecord apply_action(WorldState& state, ActionRequest action, Observation* obs_out = nullptr);

/// Policy callable: observation in, action out. Builtin scripted policies
/// additionally receive the world state (privileged access).
using PolicyFn = std::function<ActionRequest(const Observation&, const WorldState&)>;

struct EpisodeOptions {
    bool no_audio = false;  // suppress ambient sources (silent ablation)
};

/// Runs observe -> policy -> apply_action until escape or the step limit.
/// Identical (scene, policy script, seed) inputs give bit-identical logs.
TrajectoryLog run_episode(const SceneSpec& scene, const PolicyFn& policy, std::uint64_t seed,
                          const EpisodeOptions& options = {});

}  // namespace escape4d
