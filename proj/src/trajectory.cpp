#include "escape4d/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace escape4d {

namespace {

Vec2 rotate_quarter(Vec2 p, ExitSide side) {
    switch (side) {
        case ExitSide::N: return p;
        case ExitSide::E: return {-p.y, p.x};   // +90 CCW
        case ExitSide::S: return {-p.x, -p.y};  // 180
        case ExitSide::W: return {p.y, -p.x};   // -90
    }
    return p;
}

bool swaps_extent(ExitSide side) { return side == ExitSide::E || side == ExitSide::W; }

}  // namespace

std::vector<Vec2> align_points(const std::vector<Vec2>& points, ExitSide exit_side,
                               Vec2 room_center) {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const Vec2& p : points)
        out.push_back(room_center + rotate_quarter(p - room_center, exit_side));
    return out;
}

AlignedTrajectory align_to_exit(const SceneSpec& scene, const TrajectoryLog& log) {
    const RoomGeometry& g = scene.geometry;
    Vec2 center{g.width / 2.0, g.depth / 2.0};
    double w2 = (swaps_extent(g.exit_side) ? g.depth : g.width) / 2.0;
    double d2 = (swaps_extent(g.exit_side) ? g.width : g.depth) / 2.0;

    AlignedTrajectory traj;
    traj.points.reserve(log.records.size() + 1);
    traj.timestamps.reserve(log.records.size() + 1);
    traj.audio_active.reserve(log.records.size() + 1);

    auto push = [&](Vec2 p, double t, bool audio) {
        Vec2 r = rotate_quarter(p - center, g.exit_side);
        traj.points.push_back({w2 + r.x, d2 + r.y});
        traj.timestamps.push_back(t);
        traj.audio_active.push_back(audio);
    };
    push(center, 0.0, false);  // spawn point
    for (const StepRecord& r : log.records)
        push(r.pose_after.position, r.clock_after, r.audio_active);
    return traj;
}

Vec2 aligned_exit(const SceneSpec& scene) {
    const RoomGeometry& g = scene.geometry;
    Vec2 center{g.width / 2.0, g.depth / 2.0};
    double w2 = (swaps_extent(g.exit_side) ? g.depth : g.width) / 2.0;
    double d2 = (swaps_extent(g.exit_side) ? g.width : g.depth) / 2.0;
    Vec2 r = rotate_quarter(scene.geometry.exit_point - center, g.exit_side);
    return {w2 + r.x, d2 + r.y};
}

DensityGrid density(const std::vector<Vec2>& points, int b, double width, double depth) {
    if (points.empty()) throw std::invalid_argument("density: empty trajectory");
    if (b < 2) throw std::invalid_argument("density: B must be >= 2");
    DensityGrid grid;
    grid.b = b;
    grid.counts.assign(static_cast<std::size_t>(b) * b, 0);
    grid.mass.assign(grid.counts.size(), 0.0);
    grid.log_map.assign(grid.counts.size(), 0.0);
    for (const Vec2& p : points) {
        int col = std::clamp(static_cast<int>(std::floor(p.x / width * b)), 0, b - 1);
        int row = std::clamp(static_cast<int>(std::floor(p.y / depth * b)), 0, b - 1);
        ++grid.counts[static_cast<std::size_t>(row) * b + col];
    }
    double total = static_cast<double>(points.size());
    for (std::size_t i = 0; i < grid.counts.size(); ++i) {
        grid.mass[i] = grid.counts[i] / total;
        grid.log_map[i] = std::log1p(static_cast<double>(grid.counts[i]));
    }
    return grid;
}

DensityGrid density(const AlignedTrajectory& traj, const SceneSpec& scene, int b) {
    const RoomGeometry& g = scene.geometry;
    double w = swaps_extent(g.exit_side) ? g.depth : g.width;
    double d = swaps_extent(g.exit_side) ? g.width : g.depth;
    return density(traj.points, b, w, d);
}

Hii hii(const DensityGrid& grid) {
    Hii h;
    for (double p : grid.mass) h.raw += p * p;
    double c = static_cast<double>(grid.mass.size());
    h.norm = (h.raw - 1.0 / c) / (1.0 - 1.0 / c);
    return h;
}

double frechet(const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    if (p.empty() || q.empty()) throw std::invalid_argument("frechet: empty polyline");
    std::size_t n = p.size(), m = q.size();
    std::vector<double> prev(m), cur(m);
    for (std::size_t j = 0; j < m; ++j) {
        double d = distance(p[0], q[j]);
        prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double best = prev[j];
            if (j > 0) best = std::min({best, cur[j - 1], prev[j - 1]});
            cur[j] = std::max(best, distance(p[i], q[j]));
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

namespace {

double frechet_rec(const std::vector<Vec2>& p, const std::vector<Vec2>& q, std::size_t i,
                   std::size_t j) {
    double d = distance(p[i], q[j]);
    if (i == 0 && j == 0) return d;
    double best = std::numeric_limits<double>::infinity();
    if (i > 0) best = std::min(best, frechet_rec(p, q, i - 1, j));
    if (j > 0) best = std::min(best, frechet_rec(p, q, i, j - 1));
    if (i > 0 && j > 0) best = std::min(best, frechet_rec(p, q, i - 1, j - 1));
    return std::max(best, d);
}

}  // namespace

double frechet_exhaustive(const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    if (p.empty() || q.empty()) throw std::invalid_argument("frechet: empty polyline");
    return frechet_rec(p, q, p.size() - 1, q.size() - 1);
}

PathMetrics path_metrics(const std::vector<Vec2>& points, const std::vector<double>& timestamps,
                         Vec2 exit) {
    if (points.size() < 2) throw std::invalid_argument("path_metrics: need >= 2 points");
    PathMetrics m;
    m.steps = static_cast<int>(points.size()) - 1;
    if (!timestamps.empty()) m.time = timestamps.back() - timestamps.front();

    double d0 = distance(points.front(), exit);
    m.min_dist = d0;
    int reducing = 0;
    std::vector<Vec2> disp;
    disp.reserve(points.size() - 1);
    double prev_d = d0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        double seg = distance(points[i], points[i - 1]);
        m.path_len += seg;
        disp.push_back(points[i] - points[i - 1]);
        double d = distance(points[i], exit);
        if (prev_d - d > 0) ++reducing;
        m.min_dist = std::min(m.min_dist, d);
        prev_d = d;
    }
    if (m.path_len <= 0.0) throw std::invalid_argument("path_metrics: zero-length path");
    m.mono = static_cast<double>(reducing) / m.steps;
    for (std::size_t i = 1; i < disp.size(); ++i)
        if (dot(disp[i - 1], disp[i]) < 0) ++m.turn;
    m.path_eff = std::min(1.0, d0 / m.path_len);
    m.prog_eff = (d0 - prev_d) / m.path_len;
    // Beeline resampled to the trajectory's point count, so a straight
    // constant-speed walk scores a discrete Frechet distance of zero.
    std::vector<Vec2> beeline;
    beeline.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        double t = static_cast<double>(i) / (points.size() - 1);
        beeline.push_back(points.front() + (exit - points.front()) * t);
    }
    m.frechet = frechet(points, beeline);
    return m;
}

PathMetrics path_metrics(const AlignedTrajectory& traj, const SceneSpec& scene) {
    return path_metrics(traj.points, traj.timestamps, aligned_exit(scene));
}

DistanceCurve distance_curve(const std::vector<Vec2>& points, Vec2 exit) {
    if (points.empty()) throw std::invalid_argument("distance_curve: empty trajectory");
    DistanceCurve curve;
    std::vector<double> d;
    d.reserve(points.size());
    for (const Vec2& p : points) d.push_back(distance(p, exit));
    std::size_t n = d.size();
    for (int k = 0; k < kCurvePoints; ++k) {
        if (n == 1) {
            curve.values[k] = d[0];
            continue;
        }
        double s = static_cast<double>(k) / (kCurvePoints - 1) * (n - 1);
        std::size_t i = std::min(static_cast<std::size_t>(std::floor(s)), n - 2);
        double frac = s - static_cast<double>(i);
        curve.values[k] = d[i] + frac * (d[i + 1] - d[i]);
    }
    for (int k = 1; k < kCurvePoints; ++k)
        curve.auc += (curve.values[k - 1] + curve.values[k]) / 2.0 / (kCurvePoints - 1);
    return curve;
}

std::array<double, kCurvePoints> survival_curve(const std::vector<DistanceCurve>& runs,
                                                double tau) {
    if (runs.empty()) throw std::invalid_argument("survival_curve: no runs");
    std::array<double, kCurvePoints> s{};
    for (const DistanceCurve& run : runs) {
        int first = kCurvePoints;  // never reached
        for (int k = 0; k < kCurvePoints; ++k)
            if (run.values[k] <= tau) {
                first = k;
                break;
            }
        for (int k = 0; k < first && k < kCurvePoints; ++k) s[k] += 1.0;
    }
    for (double& v : s) v /= static_cast<double>(runs.size());
    return s;
}

AudioSegments audio_segments(const AlignedTrajectory& traj) {
    AudioSegments seg;
    for (std::size_t i = 0; i < traj.points.size(); ++i)
        (traj.audio_active[i] ? seg.audio : seg.non_audio).push_back(traj.points[i]);
    return seg;
}

}  // namespace escape4d
