#include "twohop/geometry.hpp"

#include <limits>
#include <random>
#include <string>

#include "twohop/errors.hpp"

namespace twohop {

Window::Window(double half_width, double guard_margin)
    : half_width_(half_width), guard_margin_(guard_margin) {
    if (!(std::isfinite(half_width) && half_width > 0.0))
        throw ParameterError("window half-width must be positive and finite, got " + std::to_string(half_width));
    if (!(guard_margin >= 0.0 && guard_margin < half_width))
        throw ParameterError("guard margin must satisfy 0 <= m < L, got m=" + std::to_string(guard_margin));
}

Window::Window(double half_width) : Window(half_width, half_width / 3.0) {}

double Window::measured_area() const noexcept {
    const double inner = half_width_ - guard_margin_;
    return 4.0 * inner * inner;
}

bool Window::contains(Point2 p) const noexcept {
    return std::abs(p.x) <= half_width_ && std::abs(p.y) <= half_width_;
}

bool Window::in_measurement_region(Point2 p) const noexcept {
    const double inner = half_width_ - guard_margin_;
    return std::abs(p.x) <= inner && std::abs(p.y) <= inner;
}

PathLossModel::PathLossModel(double alpha, bool bounded) : alpha_(alpha), bounded_(bounded) {
    if (!(std::isfinite(alpha) && alpha > 2.0))
        throw ParameterError("path-loss exponent must exceed 2, got " + std::to_string(alpha));
}

double PathLossModel::gain(double distance) const {
    if (!(distance >= 0.0)) throw ParameterError("distance must be non-negative");
    return gain_sq(distance * distance);
}

double PathLossModel::gain_sq(double d2) const noexcept {
    if (d2 == 0.0) return bounded_ ? 1.0 : std::numeric_limits<double>::infinity();
    double g;
    if (alpha_ == 4.0) {
        g = 1.0 / (d2 * d2);
    } else {
        g = std::pow(d2, -0.5 * alpha_);
    }
    return bounded_ && g > 1.0 ? 1.0 : g;
}

PppSample sample_ppp(double intensity, const Window& window, std::uint64_t seed) {
    if (!(std::isfinite(intensity) && intensity >= 0.0))
        throw ParameterError("PPP intensity must be non-negative and finite, got " + std::to_string(intensity));

    PppSample out{{}, intensity, window};
    if (intensity == 0.0) return out;

    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::int64_t> count(intensity * window.area());
    const auto n = count(rng);
    const double L = window.half_width();
    std::uniform_real_distribution<double> coord(-L, L);
    out.points.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = coord(rng);
        const double y = coord(rng);
        out.points.push_back({x, y});
    }
    return out;
}

Point2 destination_of(Point2 source, double link_distance, double angle) {
    if (!(link_distance > 0.0)) throw ParameterError("link distance R must be positive");
    return {source.x + link_distance * std::cos(angle), source.y + link_distance * std::sin(angle)};
}

}  // namespace twohop
