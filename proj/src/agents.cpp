#include "escape4d/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <queue>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "escape4d/protocol.hpp"
#include "escape4d/rng.hpp"

namespace escape4d {

PolicyFn make_noop_policy() {
    return [](const Observation&, const WorldState&) { return ActionRequest{}; };
}

PolicyFn make_random_policy(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](const Observation& obs, const WorldState&) {
        ActionRequest a;
        a.rotate_right = rng->uniform(-90.0, 90.0);
        a.move_forward = rng->uniform(0.0, 3.0);
        if (obs.center_object && rng->bernoulli(0.3)) a.grab = true;
        return a;
    };
}

namespace {

double max_loudness(const Observation& obs) {
    double l = 0.0;
    for (const auto& a : obs.ambient) l = std::max(l, a.loudness);
    return l;
}

const VisibleObject* find_visible(const Observation& obs, const std::string& kind) {
    for (const auto& v : obs.visible)
        if (v.kind == kind) return &v;
    return nullptr;
}

struct GreedyState {
    Rng rng;
    double last_loudness = -1.0;
    int since_probe = 0;
    explicit GreedyState(std::uint64_t seed) : rng(seed) {}
};

}  // namespace

PolicyFn make_greedy_audio_policy(std::uint64_t seed) {
    auto st = std::make_shared<GreedyState>(seed);
    return [st](const Observation& obs, const WorldState&) {
        ActionRequest a;

        // Door in reach: center it and grab in one composite action.
        if (const VisibleObject* door = find_visible(obs, "Door");
            door && door->distance <= 2.2) {
            a.rotate_right = (door->image_coords[0] - 0.5) * kFovHorizontal;
            a.grab = true;
            a.move_forward = std::max(0.0, door->distance - 1.0);
            st->last_loudness = -1.0;
            return a;
        }

        double loud = max_loudness(obs);
        if (loud <= 0.0) {
            // silent room: seeded random walk
            a.rotate_right = st->rng.uniform(-120.0, 120.0);
            a.move_forward = st->rng.uniform(0.5, 2.5);
            st->last_loudness = -1.0;
            return a;
        }

        // Hill climb on the loudest reading: steer onto its bearing and push
        // forward; when the signal stops growing (wall, overshoot), jitter
        // the heading to probe around the obstacle.
        const AmbientReading* best = &obs.ambient.front();
        for (const auto& r : obs.ambient)
            if (r.loudness > best->loudness) best = &r;
        bool improving = st->last_loudness < 0.0 || loud > st->last_loudness + 1e-9;
        if (improving) {
            a.rotate_right = clamp(best->bearing, -180.0, 180.0);
            a.move_forward = 1.5;
            st->since_probe = 0;
        } else {
            st->since_probe += 1;
            a.rotate_right =
                clamp(best->bearing + st->rng.uniform(-70.0, 70.0), -180.0, 180.0);
            a.move_forward = st->rng.uniform(0.8, 2.2);
        }
        st->last_loudness = loud;
        return a;
    };
}

// ---------------------------------------------------------------------------
// Oracle: grid A* over the scene plus a fixed goal script per family.

namespace {

constexpr double kGridRes = 0.25;
constexpr double kGoalStandoff = 1.5;  // interaction standpoint radius

struct OracleGoal {
    enum class Kind { Trigger, Grab, Sight } kind = Kind::Grab;
    std::string target;
    std::optional<Interactions> interactions;
};

struct Planner {
    const SceneSpec& scene;
    int nx, ny;

    explicit Planner(const SceneSpec& s)
        : scene(s),
          nx(static_cast<int>(s.geometry.width / kGridRes)),
          ny(static_cast<int>(s.geometry.depth / kGridRes)) {}

    Vec2 cell_center(int ix, int iy) const {
        return {(ix + 0.5) * kGridRes, (iy + 0.5) * kGridRes};
    }
    bool cell_clear(int ix, int iy) const {
        return ix >= 0 && iy >= 0 && ix < nx && iy < ny &&
               position_clear(scene, cell_center(ix, iy));
    }

    bool walkable_segment(const Vec2& a, const Vec2& b) const {
        // Same 5 mm resolution as the engine's movement clamp; a coarser
        // check can pass where the clamp stops (thin corner pinches).
        double len = distance(a, b);
        int steps = std::max(1, static_cast<int>(std::ceil(len / 0.005)));
        for (int i = 0; i <= steps; ++i) {
            double t = static_cast<double>(i) / steps;
            if (!position_clear(scene, a + (b - a) * t)) return false;
        }
        return true;
    }

    /// The red dot must land on `target` when facing it from `pos`: no other
    /// non-consumed object closer inside the 5-degree cone with line of sight.
    bool center_wins(const Vec2& pos, const GameObject& target) const {
        double facing = yaw_towards(pos, target.position);
        double target_dist = distance(pos, target.position);
        if (!segment_clear_of_walls(scene, pos, target.position)) return false;
        for (const auto& o : scene.objects) {
            if (o.id == target.id) continue;
            double d = distance(pos, o.position);
            if (d >= target_dist) continue;
            if (std::abs(angle_diff(yaw_towards(pos, o.position), facing)) >= kGrabCenterDeg)
                continue;
            if (segment_clear_of_walls(scene, pos, o.position)) return false;
        }
        return true;
    }

    bool is_goal_cell(const Vec2& p, const GameObject& target, OracleGoal::Kind kind) const {
        double d = distance(p, target.position);
        if (kind == OracleGoal::Kind::Sight)
            return d >= 0.8 && d <= 2.5 && segment_clear_of_walls(scene, p, target.position);
        if (d > kGoalStandoff || d < 0.5) return false;
        return center_wins(p, target);
    }

    /// Multi-goal A*, 8-connected without corner cutting. Returns waypoint
    /// centers from start to a goal cell, or empty on failure.
    std::vector<Vec2> plan(const Vec2& start, const GameObject& target,
                           OracleGoal::Kind kind) const {
        auto idx = [&](int ix, int iy) { return iy * nx + ix; };
        int six = clamp(static_cast<int>(start.x / kGridRes), 0, nx - 1);
        int siy = clamp(static_cast<int>(start.y / kGridRes), 0, ny - 1);
        if (!cell_clear(six, siy)) {
            // nudge to the nearest clear cell
            double best = 1e18;
            int bx = -1, by = -1;
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix)
                    if (cell_clear(ix, iy)) {
                        double d = distance(start, cell_center(ix, iy));
                        if (d < best) best = d, bx = ix, by = iy;
                    }
            if (bx < 0) return {};
            six = bx, siy = by;
        }

        std::vector<double> dist_map(static_cast<std::size_t>(nx) * ny, 1e18);
        std::vector<int> parent(static_cast<std::size_t>(nx) * ny, -1);
        using Node = std::pair<double, int>;
        std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
        dist_map[idx(six, siy)] = 0.0;
        open.push({0.0, idx(six, siy)});

        int found = -1;
        while (!open.empty()) {
            auto [d, cur] = open.top();
            open.pop();
            if (d > dist_map[cur] + 1e-12) continue;
            int cx = cur % nx, cy = cur / nx;
            if (is_goal_cell(cell_center(cx, cy), target, kind)) {
                found = cur;
                break;
            }
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int tx = cx + dx, ty = cy + dy;
                    if (!cell_clear(tx, ty)) continue;
                    if (dx != 0 && dy != 0 && (!cell_clear(cx + dx, cy) || !cell_clear(cx, cy + dy)))
                        continue;
                    double w = (dx != 0 && dy != 0) ? M_SQRT2 : 1.0;
                    int t = idx(tx, ty);
                    if (dist_map[cur] + w < dist_map[t] - 1e-12) {
                        dist_map[t] = dist_map[cur] + w;
                        parent[t] = cur;
                        open.push({dist_map[t], t});
                    }
                }
        }
        if (found < 0) return {};
        std::vector<Vec2> path;
        for (int c = found; c >= 0; c = parent[c]) {
            path.push_back(cell_center(c % nx, c / nx));
            if (parent[c] < 0) break;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

struct OracleState {
    const SceneSpec& scene;
    Planner planner;
    std::vector<OracleGoal> goals;
    std::vector<Vec2> path;
    std::size_t goal_index = 0;

    explicit OracleState(const SceneSpec& s) : scene(s), planner(s) { build_goals(); }

    void build_goals() {
        const GameObject* door = scene.door();
        if (!door) throw std::runtime_error("oracle: scene has no door");
        bool has_recorder = scene.find_object("recorder") != nullptr;
        bool has_box = scene.find_object("box") != nullptr;

        if (has_recorder) goals.push_back({OracleGoal::Kind::Trigger, "recorder", std::nullopt});
        if (scene.transient_clue)
            goals.push_back(
                {OracleGoal::Kind::Sight, scene.transient_clue->display_object, std::nullopt});
        if (has_box) {
            const GameObject* box = scene.find_object("box");
            Interactions open_box;
            open_box.input = box->lock.password;
            goals.push_back({OracleGoal::Kind::Grab, "box", open_box});
        }
        OracleGoal door_goal{OracleGoal::Kind::Grab, door->id, std::nullopt};
        if (door->lock.kind == LockKind::NeedsPassword) {
            Interactions i;
            i.input = door->lock.password;
            door_goal.interactions = i;
        } else if (door->lock.kind == LockKind::NeedsKey) {
            Interactions i;
            i.use_item_id = door->lock.key_item;
            door_goal.interactions = i;
        }
        goals.push_back(door_goal);
    }

    bool goal_done(const OracleGoal& g, const WorldState& state) const {
        switch (g.kind) {
            case OracleGoal::Kind::Trigger:
                return state.object_states.at(g.target).triggered;
            case OracleGoal::Kind::Sight:
                return state.t_found.has_value();
            case OracleGoal::Kind::Grab: {
                const GameObject* obj = scene.find_object(g.target);
                if (obj->kind == ObjectKind::Door) return state.escaped;
                return state.object_states.at(g.target).opened ||
                       state.object_states.at(g.target).consumed;
            }
        }
        return false;
    }

    ActionRequest act(const WorldState& state) {
        while (goal_index < goals.size() && goal_done(goals[goal_index], state)) {
            ++goal_index;
            path.clear();
        }
        if (goal_index >= goals.size()) return ActionRequest{};
        const OracleGoal& goal = goals[goal_index];
        const GameObject* target = scene.find_object(goal.target);
        if (!target) throw std::runtime_error("oracle: unknown goal target " + goal.target);

        const Vec2 pos = state.agent.position;
        bool in_position =
            goal.kind == OracleGoal::Kind::Sight
                ? planner.is_goal_cell(pos, *target, goal.kind)
                : (distance(pos, target->position) <= kGoalStandoff + 1e-9 &&
                   planner.center_wins(pos, *target));

        if (in_position) {
            ActionRequest a;
            a.rotate_right = angle_diff(yaw_towards(pos, target->position), state.agent.yaw);
            a.rotate_down = -state.agent.pitch;  // level the view
            switch (goal.kind) {
                case OracleGoal::Kind::Trigger: a.trigger = true; break;
                case OracleGoal::Kind::Grab:
                    a.grab = true;
                    a.interactions = goal.interactions;
                    break;
                case OracleGoal::Kind::Sight:
                    break;  // facing the display is enough; observe() does the rest
            }
            a.rationale = "executing prop chain step " + std::to_string(goal_index + 1);
            return a;
        }

        if (path.empty() || distance(path.back(), target->position) > 3.0) {
            path = planner.plan(pos, *target, goal.kind);
            if (path.empty())
                throw std::runtime_error("oracle: no path to " + goal.target + " in scene " +
                                         scene.id);
        }

        // Drop waypoints already reached, then steer to the furthest waypoint
        // reachable along a straight clear segment.
        while (!path.empty() && distance(pos, path.front()) < 0.15) path.erase(path.begin());
        if (path.empty()) {
            // standing on the goal cell but not in interaction position:
            // replan from scratch next step
            path = planner.plan(pos, *target, goal.kind);
        }
        auto pick_waypoint = [&](std::size_t& best) {
            bool found = false;
            for (std::size_t i = 0; i < path.size(); ++i)
                if (planner.walkable_segment(pos, path[i])) {
                    best = i;
                    found = true;
                }
            return found;
        };
        std::size_t best = 0;
        if (!pick_waypoint(best)) {
            // No waypoint is straight-walkable from here (the agent drifted
            // off the planned line, e.g. after a clamped move near a corner):
            // replan from the current position.
            path = planner.plan(pos, *target, goal.kind);
            if (!pick_waypoint(best)) {
                // Still pinned against an obstacle; back off towards the room
                // center to regain clearance, then replan next step.
                path.clear();
                Vec2 center{scene.geometry.width / 2.0, scene.geometry.depth / 2.0};
                ActionRequest a;
                a.rotate_right = angle_diff(yaw_towards(pos, center), state.agent.yaw);
                a.rotate_down = -state.agent.pitch;
                a.move_forward = 0.5;
                a.rationale = "backing off an obstacle near " + goal.target;
                return a;
            }
        }
        Vec2 wp = path.empty() ? pos : path[best];

        ActionRequest a;
        a.rotate_right = angle_diff(yaw_towards(pos, wp), state.agent.yaw);
        a.rotate_down = -state.agent.pitch;
        a.move_forward = std::min(distance(pos, wp), 10.0);
        a.rationale = "moving towards " + goal.target;
        return a;
    }
};

}  // namespace

PolicyFn make_oracle_policy(const SceneSpec& scene) {
    auto st = std::make_shared<OracleState>(scene);
    return [st](const Observation&, const WorldState& state) { return st->act(state); };
}

PolicyFn make_replay_policy(const TrajectoryLog& log) {
    auto actions = std::make_shared<std::vector<ActionRequest>>();
    for (const auto& r : log.records) actions->push_back(r.action);
    auto next = std::make_shared<std::size_t>(0);
    return [actions, next](const Observation&, const WorldState&) {
        if (*next >= actions->size()) return ActionRequest{};
        return (*actions)[(*next)++];
    };
}

bool is_builtin_policy(const std::string& name) {
    return name == "noop" || name == "random" || name == "greedy" || name == "oracle";
}

PolicyFn make_builtin_policy(const std::string& name, const SceneSpec& scene,
                             std::uint64_t seed) {
    if (name == "noop") return make_noop_policy();
    if (name == "random") return make_random_policy(seed);
    if (name == "greedy") return make_greedy_audio_policy(seed);
    if (name == "oracle") return make_oracle_policy(scene);
    throw std::runtime_error("unknown builtin policy: " + name);
}

// ---------------------------------------------------------------------------
// External agent bridge (POSIX pipes)

struct ExternalAgent::Impl {
    pid_t pid = -1;
    int to_child = -1;
    int from_child = -1;
    std::string buffer;
    ExternalAgentOptions options;

    explicit Impl(const std::string& command, const ExternalAgentOptions& opts)
        : options(opts) {
        int in_pipe[2], out_pipe[2];
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
            throw std::runtime_error("external agent: pipe() failed");
        pid = fork();
        if (pid < 0) throw std::runtime_error("external agent: fork() failed");
        if (pid == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child = in_pipe[1];
        from_child = out_pipe[0];
    }

    ~Impl() {
        if (to_child >= 0) close(to_child);
        if (from_child >= 0) close(from_child);
        if (pid > 0) {
            kill(pid, SIGTERM);
            int status = 0;
            waitpid(pid, &status, 0);
        }
    }

    bool write_line(const std::string& line) {
        std::string msg = line + "\n";
        std::size_t off = 0;
        while (off < msg.size()) {
            ssize_t n = write(to_child, msg.data() + off, msg.size() - off);
            if (n <= 0) return false;
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    /// Reads one line within the step timeout; empty optional on timeout/EOF.
    std::optional<std::string> read_line() {
        const int timeout_ms = static_cast<int>(options.step_timeout_seconds * 1000.0);
        for (;;) {
            auto nl = buffer.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{from_child, POLLIN, 0};
            int r = poll(&pfd, 1, timeout_ms);
            if (r <= 0) return std::nullopt;
            char chunk[4096];
            ssize_t n = read(from_child, chunk, sizeof(chunk));
            if (n <= 0) return std::nullopt;
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

ExternalAgent::ExternalAgent(const std::string& command, const ExternalAgentOptions& options)
    : impl_(new Impl(command, options)) {}

ExternalAgent::~ExternalAgent() { delete impl_; }

PolicyFn ExternalAgent::policy() {
    Impl* impl = impl_;
    return [impl](const Observation& obs, const WorldState&) {
        ActionRequest noop;
        if (!impl->write_line(encode_observation(obs))) {
            noop.decode_error = "agent process pipe closed";
            return noop;
        }
        std::optional<std::string> line = impl->read_line();
        if (!line) {
            noop.decode_error = "agent step timeout";
            return noop;
        }
        DecodeResult res = decode_action(*line);
        if (!res.ok) {
            noop.decode_error = "unparsable action: " + res.raw;
            return noop;
        }
        return res.action;
    };
}

}  // namespace escape4d
