#pragma once

// Deployment geometry, Poisson sampling and path loss.

#include <cmath>
#include <cstdint>
#include <vector>

namespace twohop {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 p) noexcept { return {s * p.x, s * p.y}; }
    friend constexpr bool operator==(Point2, Point2) = default;
};

inline double squared_norm(Point2 p) noexcept { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) noexcept { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) noexcept { return norm(a - b); }

// Square [-L, L]^2 with an inner measurement region [-L+m, L-m]^2.
class Window {
public:
    // Throws ParameterError unless L > 0 and 0 <= m < L.
    Window(double half_width, double guard_margin);
    // Guard margin defaults to L/3.
    explicit Window(double half_width);

    double half_width() const noexcept { return half_width_; }
    double guard_margin() const noexcept { return guard_margin_; }
    double area() const noexcept { return 4.0 * half_width_ * half_width_; }
    double measured_area() const noexcept;

    bool contains(Point2 p) const noexcept;
    bool in_measurement_region(Point2 p) const noexcept;

private:
    double half_width_;
    double guard_margin_;
};

// g(d) = d^-alpha, optionally capped at unit gain: min(1, d^-alpha).
class PathLossModel {
public:
    // Throws ParameterError unless alpha > 2 (finite mean interference).
    explicit PathLossModel(double alpha = 4.0, bool bounded = false);

    double alpha() const noexcept { return alpha_; }
    bool bounded() const noexcept { return bounded_; }

    // Gain at distance d >= 0. The unbounded model returns +inf at d = 0.
    double gain(double distance) const;
    // Same, from a squared distance; avoids a sqrt in the hot loops.
    double gain_sq(double squared_distance) const noexcept;

private:
    double alpha_;
    bool bounded_;
};

inline double path_loss(const PathLossModel& model, double distance) { return model.gain(distance); }

struct PppSample {
    std::vector<Point2> points;
    double intensity = 0.0;
    Window window{1.0, 0.0};
};

// Homogeneous PPP on the window: Poisson count, then i.i.d. uniform
// positions. Deterministic in `seed`. Throws ParameterError for negative
// or non-finite intensity.
PppSample sample_ppp(double intensity, const Window& window, std::uint64_t seed);

// Point at distance R from `source` in direction `angle`. Requires R > 0.
Point2 destination_of(Point2 source, double link_distance, double angle);

struct NetworkRealization {
    PppSample sources;
    std::vector<double> dest_angles;  // one per source
    PppSample relays;
    double link_distance = 1.0;
    std::uint64_t fading_seed = 0;

    Point2 destination(std::size_t source_index) const {
        return destination_of(sources.points[source_index], link_distance, dest_angles[source_index]);
    }
};

}  // namespace twohop
