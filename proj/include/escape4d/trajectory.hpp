#pragma once

#include <array>
#include <optional>
#include <vector>

#include "escape4d/engine.hpp"
#include "escape4d/geometry.hpp"

namespace escape4d {

inline constexpr int kDefaultGridB = 16;
inline constexpr int kCurvePoints = 101;
inline constexpr double kExitThreshold = 1.5;  // m, survival analysis

struct AlignedTrajectory {
    std::vector<Vec2> points;       // exit-aligned frame, exit side mapped to +y
    std::vector<double> timestamps; // seconds (clock_after per step)
    std::vector<bool> audio_active;
};

struct DensityGrid {
    int b = 0;                     // cells per side
    std::vector<double> mass;      // b*b, row-major (row 0 = min y), sums to 1
    std::vector<double> log_map;   // log(1 + raw count) per cell
    std::vector<int> counts;

    double& at(int row, int col) { return mass[static_cast<std::size_t>(row) * b + col]; }
    double at(int row, int col) const { return mass[static_cast<std::size_t>(row) * b + col]; }
};

struct PathMetrics {
    int steps = 0;
    double time = 0.0;      // seconds
    double path_len = 0.0;  // meters
    int turn = 0;           // displacement reversals
    double frechet = 0.0;   // vs the start->exit beeline
    double min_dist = 0.0;  // min distance to exit
    double path_eff = 0.0;  // L_min / L_actual
    double prog_eff = 0.0;  // (D0 - Dend) / path_len
    double mono = 0.0;      // fraction of distance-reducing steps
};

struct DistanceCurve {
    std::array<double, kCurvePoints> values{};  // D over normalized progress
    double auc = 0.0;                           // trapezoid rule
};

struct Hii {
    double raw = 0.0;
    double norm = 0.0;
};

/// Rotation about the room center by the multiple of 90 degrees mapping
/// `exit_side` to north: N identity, E +90 CCW, S 180, W -90.
std::vector<Vec2> align_points(const std::vector<Vec2>& points, ExitSide exit_side,
                               Vec2 room_center);

/// Trajectory extraction from a log: start pose plus one post-action point
/// per recorded step, aligned so the exit side is the top edge.
AlignedTrajectory align_to_exit(const SceneSpec& scene, const TrajectoryLog& log);

/// B x B occupancy over the room extent (aligned frame). Points clamp onto
/// the boundary cells. Throws std::invalid_argument on an empty trajectory
/// or B < 2.
DensityGrid density(const std::vector<Vec2>& points, int b, double width, double depth);
DensityGrid density(const AlignedTrajectory& traj, const SceneSpec& scene,
                    int b = kDefaultGridB);

Hii hii(const DensityGrid& grid);

/// Discrete Frechet distance (dynamic program over monotone couplings).
double frechet(const std::vector<Vec2>& p, const std::vector<Vec2>& q);

/// Exhaustive-coupling reference, exponential; for cross-checks only.
double frechet_exhaustive(const std::vector<Vec2>& p, const std::vector<Vec2>& q);

PathMetrics path_metrics(const std::vector<Vec2>& points, const std::vector<double>& timestamps,
                         Vec2 exit);
PathMetrics path_metrics(const AlignedTrajectory& traj, const SceneSpec& scene);

DistanceCurve distance_curve(const std::vector<Vec2>& points, Vec2 exit);

/// S(t) on the shared 101-point grid: fraction of runs not yet within tau
/// of the exit by normalized time t. Once within, a run stays "reached".
std::array<double, kCurvePoints> survival_curve(const std::vector<DistanceCurve>& runs,
                                                double tau = kExitThreshold);

struct AudioSegments {
    std::vector<Vec2> audio;      // points of steps with playback overlap
    std::vector<Vec2> non_audio;
};

AudioSegments audio_segments(const AlignedTrajectory& traj);

/// Exit position mapped into the aligned frame (top edge midpoint).
Vec2 aligned_exit(const SceneSpec& scene);

}  // namespace escape4d
