#pragma once

#include <cmath>

namespace mmdqn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    bool contains(Vec2 p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    Rect shrunk(double margin) const {
        return {x_min + margin, y_min + margin, x_max - margin, y_max - margin};
    }
    bool empty() const { return x_min > x_max || y_min > y_max; }
};

// Closed-segment intersection test; touching counts as intersecting.
bool segments_intersect(const Segment& s, const Segment& t);

double point_segment_distance(Vec2 p, const Segment& s);

// Distance along a unit-length ray to the segment, or a negative value
// when the ray misses.
double ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s);

// Distance along a unit-length ray to a circle, or negative on miss.
// Origins inside the circle report the far exit point.
double ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius);

// Wraps an angle into [0, 2*pi).
double wrap_angle(double a);

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace mmdqn
