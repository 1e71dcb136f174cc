#pragma once

#include <string>
#include <vector>

#include "escape4d/engine.hpp"

namespace escape4d {

/// Null baseline: always-empty actions. Never escapes.
PolicyFn make_noop_policy();

/// Uniform rotation in [-90, 90], forward move in [0, 3]; grabs with
/// probability 0.3 whenever a center object exists.
PolicyFn make_random_policy(std::uint64_t seed);

/// Loudness hill-climber: moves forward while the ambient reading grows,
/// otherwise turns; falls back to a seeded random walk at zero loudness;
/// grabs the door once it is near and centered.
PolicyFn make_greedy_audio_policy(std::uint64_t seed);

/// Full-knowledge solvability witness. Executes the prop chain in order via
/// grid A* (0.25 m, 8-connected), issuing minimal rotate/move/grab/trigger
/// actions. Throws std::runtime_error if planning fails.
PolicyFn make_oracle_policy(const SceneSpec& scene);

/// Replays the action sequence of a prior log verbatim, then no-ops.
PolicyFn make_replay_policy(const TrajectoryLog& log);

/// Builtin policy by name: noop | random | greedy | oracle.
PolicyFn make_builtin_policy(const std::string& name, const SceneSpec& scene, std::uint64_t seed);
bool is_builtin_policy(const std::string& name);

struct ExternalAgentOptions {
    double step_timeout_seconds = 120.0;  // wall clock per step
};

/// Bridge to an external agent process: observations go to its stdin as
/// newline-delimited protocol messages, actions come back on its stdout.
/// A timeout or decode failure is recorded as a no-op step with a
/// decode_error event and the episode continues.
class ExternalAgent {
   public:
    ExternalAgent(const std::string& command, const ExternalAgentOptions& options = {});
    ~ExternalAgent();
    ExternalAgent(const ExternalAgent&) = delete;
    ExternalAgent& operator=(const ExternalAgent&) = delete;

    PolicyFn policy();

   private:
    struct Impl;
    Impl* impl_;
};

}  // namespace escape4d
