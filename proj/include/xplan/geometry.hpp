#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace xplan {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
    friend Vec2 operator*(double k, Vec2 a) { return {a.x * k, a.y * k}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Maps an angle into (-pi, pi].
double wrap_angle(double angle);

// Piecewise-linear curve parameterized by arc length. Headings are blended
// linearly between vertex tangents so that sampled headings vary smoothly.
class Polyline {
public:
    Polyline() = default;
    explicit Polyline(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return points_; }
    const std::vector<double>& arc_lengths() const { return cumulative_; }
    double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

    // Arc length is clamped to [0, length()].
    Vec2 point_at(double s) const;
    double heading_at(double s) const;
    Vec2 left_normal_at(double s) const { return unit_from_angle(heading_at(s) + kPi / 2.0); }

    // Unsigned curvature estimate at vertex i (turn angle over the mean of
    // the adjacent segment lengths). Endpoints have zero curvature.
    double vertex_curvature(std::size_t i) const;

    struct Projection {
        double s = 0.0;
        double offset = 0.0;  // left positive
        double distance = 0.0;
    };
    Projection project(Vec2 p) const;

    Polyline translated(Vec2 delta) const;

private:
    std::size_t segment_index(double s) const;

    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
    std::vector<double> vertex_headings_;
};

}  // namespace xplan
