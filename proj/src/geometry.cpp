#include "xplan/geometry.hpp"

#include <algorithm>
#include <limits>

namespace xplan {

double wrap_angle(double angle) {
    double a = std::fmod(angle + kPi, 2.0 * kPi);
    if (a <= 0.0) {
        a += 2.0 * kPi;
    }
    return a - kPi;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
    cumulative_.reserve(points_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i > 0) {
            s += distance(points_[i - 1], points_[i]);
        }
        cumulative_.push_back(s);
    }

    const std::size_t n = points_.size();
    vertex_headings_.assign(n, 0.0);
    if (n < 2) {
        return;
    }
    std::vector<double> seg(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec2 d = points_[i + 1] - points_[i];
        seg[i] = std::atan2(d.y, d.x);
    }
    vertex_headings_[0] = seg.front();
    vertex_headings_[n - 1] = seg.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        vertex_headings_[i] = wrap_angle(seg[i - 1] + 0.5 * wrap_angle(seg[i] - seg[i - 1]));
    }
}

std::size_t Polyline::segment_index(double s) const {
    // Last index i with cumulative_[i] <= s, restricted to valid segments.
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    return std::min(i, points_.size() - 2);
}

Vec2 Polyline::point_at(double s) const {
    if (points_.size() == 1) {
        return points_.front();
    }
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_index(s);
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    const double f = seg_len > 0.0 ? (s - cumulative_[i]) / seg_len : 0.0;
    return points_[i] + (points_[i + 1] - points_[i]) * f;
}

double Polyline::heading_at(double s) const {
    if (points_.size() < 2) {
        return 0.0;
    }
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_index(s);
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    const double f = seg_len > 0.0 ? (s - cumulative_[i]) / seg_len : 0.0;
    const double h0 = vertex_headings_[i];
    const double h1 = vertex_headings_[i + 1];
    return wrap_angle(h0 + f * wrap_angle(h1 - h0));
}

double Polyline::vertex_curvature(std::size_t i) const {
    if (i == 0 || i + 1 >= points_.size()) {
        return 0.0;
    }
    const Vec2 a = points_[i] - points_[i - 1];
    const Vec2 b = points_[i + 1] - points_[i];
    const double turn = std::fabs(wrap_angle(std::atan2(b.y, b.x) - std::atan2(a.y, a.x)));
    const double mean_len = 0.5 * (norm(a) + norm(b));
    return mean_len > 0.0 ? turn / mean_len : 0.0;
}

Polyline::Projection Polyline::project(Vec2 p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    if (points_.size() == 1) {
        best.distance = distance(p, points_.front());
        return best;
    }
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        const Vec2 a = points_[i];
        const Vec2 d = points_[i + 1] - a;
        const double len2 = dot(d, d);
        double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 foot = a + d * t;
        const double dist = distance(p, foot);
        if (dist < best.distance - 1e-12) {
            best.distance = dist;
            best.s = cumulative_[i] + t * std::sqrt(len2);
            best.offset = cross(d, p - a) >= 0.0 ? dist : -dist;
        }
    }
    return best;
}

Polyline Polyline::translated(Vec2 delta) const {
    std::vector<Vec2> moved;
    moved.reserve(points_.size());
    for (const Vec2& p : points_) {
        moved.push_back(p + delta);
    }
    return Polyline(std::move(moved));
}

}  // namespace xplan
