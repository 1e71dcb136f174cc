#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace escape4d {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Wraps an angle in degrees to [0, 360).
inline double wrap_yaw(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

/// Signed smallest difference a-b in degrees, result in [-180, 180).
inline double angle_diff(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d < -180.0) d += 360.0;
    if (d >= 180.0) d -= 360.0;
    return d;
}

template <typename T>
T clamp(T v, T lo, T hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

struct Pose {
    Vec2 position;
    double yaw = 0.0;    // degrees, [0, 360); 0 points along +y
    double pitch = 0.0;  // degrees, [-90, 90]; positive looks down

    /// Normalization is idempotent: yaw wrapped, pitch clamped.
    void normalize() {
        yaw = wrap_yaw(yaw);
        pitch = clamp(pitch, -90.0, 90.0);
    }
};

/// Unit heading vector for a yaw angle. Yaw 0 = +y, yaw 90 = +x (turning right).
inline Vec2 heading(double yaw_deg) {
    double r = yaw_deg * M_PI / 180.0;
    return {std::sin(r), std::cos(r)};
}

/// Yaw angle (same convention as heading()) pointing from `from` to `to`.
inline double yaw_towards(const Vec2& from, const Vec2& to) {
    return wrap_yaw(std::atan2(to.x - from.x, to.y - from.y) * 180.0 / M_PI);
}

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Proper segment intersection test (shared endpoints count as intersecting).
bool segments_intersect(const Segment& s1, const Segment& s2);

/// Shortest distance from point p to segment s.
double point_segment_distance(const Vec2& p, const Segment& s);

}  // namespace escape4d
