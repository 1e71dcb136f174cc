#include "escape4d/geometry.hpp"

#include <algorithm>

namespace escape4d {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

}  // namespace

bool segments_intersect(const Segment& s1, const Segment& s2) {
    double d1 = cross(s2.a, s2.b, s1.a);
    double d2 = cross(s2.a, s2.b, s1.b);
    double d3 = cross(s1.a, s1.b, s2.a);
    double d4 = cross(s1.a, s1.b, s2.b);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(s2.a, s1.a, s2.b)) return true;
    if (d2 == 0 && on_segment(s2.a, s1.b, s2.b)) return true;
    if (d3 == 0 && on_segment(s1.a, s2.a, s1.b)) return true;
    if (d4 == 0 && on_segment(s1.a, s2.b, s1.b)) return true;
    return false;
}

double point_segment_distance(const Vec2& p, const Segment& s) {
    Vec2 d = s.b - s.a;
    double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, s.a);
    double t = clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.a + d * t);
}

}  // namespace escape4d
