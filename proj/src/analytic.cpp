#include "twohop/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "twohop/errors.hpp"

namespace twohop {
namespace {

constexpr double kPi = std::numbers::pi;
using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Legendre = boost::math::quadrature::gauss<double, 20>;

template <class F>
double integrate(F&& f, double a, double b, double rel_tol, unsigned max_depth = 15) {
    if (!(b > a)) return 0.0;
    return Kronrod::integrate(f, a, b, max_depth, rel_tol);
}

// Fixed composite Gauss-Legendre rule: about `panels` panels per
// segment, fewer on segments shorter than average, at least one on each.
template <class F>
double integrate_panels(F&& f, std::vector<double> breaks, int panels) {
    std::sort(breaks.begin(), breaks.end());
    const double span = breaks.back() - breaks.front();
    const double segments = static_cast<double>(breaks.size() - 1);
    double total = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const double lo = breaks[i - 1];
        const double hi = breaks[i];
        if (!(hi > lo)) continue;
        const int n = std::clamp(static_cast<int>(std::ceil(panels * segments * (hi - lo) / span)), 1, panels);
        const double h = (hi - lo) / n;
        for (int k = 0; k < n; ++k) total += Legendre::integrate(f, lo + k * h, lo + (k + 1) * h);
    }
    return total;
}

// Globally adaptive GK15 over [0, inf): splits whichever piece carries the
// largest error until the summed error is below rel_tol of the total. The
// last piece [max break, inf) is mapped onto (0, 1] by r = split / u.
template <class F>
double integrate_half_line(F&& f, std::vector<double> breaks, double rel_tol, std::size_t max_pieces = 4000) {
    std::sort(breaks.begin(), breaks.end());
    auto tail = [&](double u) { return f(breaks.back() / u) * breaks.back() / (u * u); };
    if (breaks.empty() || breaks.back() <= 0.0) breaks.push_back(1.0);

    struct Piece {
        double lo, hi, value, error;
        bool mapped;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto eval = [&](double lo, double hi, bool mapped) {
        double err = 0.0;
        const double v = mapped ? Kronrod::integrate(tail, lo, hi, 0, 0.0, &err)
                                : Kronrod::integrate(f, lo, hi, 0, 0.0, &err);
        return Piece{lo, hi, v, err, mapped};
    };

    std::vector<Piece> heap;
    double lo = 0.0;
    for (double b : breaks) {
        if (b <= lo) continue;
        heap.push_back(eval(lo, b, false));
        lo = b;
    }
    heap.push_back(eval(0.0, 1.0, true));
    std::make_heap(heap.begin(), heap.end());

    auto totals = [&] {
        double v = 0.0, e = 0.0;
        for (const Piece& p : heap) {
            v += p.value;
            e += p.error;
        }
        return std::pair{v, e};
    };
    auto [value, error] = totals();
    while (error > rel_tol * std::abs(value) && heap.size() < max_pieces) {
        std::pop_heap(heap.begin(), heap.end());
        const Piece worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        value -= worst.value;
        error -= worst.error;
        for (Piece p : {eval(worst.lo, mid, worst.mapped), eval(mid, worst.hi, worst.mapped)}) {
            value += p.value;
            error += p.error;
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
        }
    }
    return totals().first;
}

// Barycentric interpolant on Chebyshev points of the second kind.
class ChebyshevTable {
public:
    template <class F>
    ChebyshevTable(F&& f, double lo, double hi, std::size_t n) : lo_(lo), hi_(hi) {
        nodes_.resize(n);
        values_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = std::cos(kPi * static_cast<double>(j) / static_cast<double>(n - 1));
            nodes_[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            values_[j] = f(nodes_[j]);
        }
    }

    double operator()(double x) const noexcept {
        double num = 0.0;
        double den = 0.0;
        const std::size_t n = nodes_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double diff = x - nodes_[j];
            if (diff == 0.0) return values_[j];
            double w = (j % 2 == 0) ? 1.0 : -1.0;
            if (j == 0 || j + 1 == n) w *= 0.5;
            w /= diff;
            num += w * values_[j];
            den += w;
        }
        return num / den;
    }

private:
    double lo_;
    double hi_;
    std::vector<double> nodes_;
    std::vector<double> values_;
};

void require_finite_nonneg(double v, const char* name) {
    if (!(std::isfinite(v) && v >= 0.0)) throw ParameterError(std::string(name) + " must be finite and >= 0");
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0) || !(pipeline_rel_tol > 0.0)) throw ParameterError("quadrature tolerances must be positive");
    if (!(truncation_fraction > 0.0 && truncation_fraction < 1.0))
        throw ParameterError("truncation fraction must lie in (0, 1)");
    if (radial_nodes < 8 || max_radial_nodes < radial_nodes) throw ParameterError("invalid radial grid size");
    if (max_evaluations == 0) throw ParameterError("evaluation budget must be positive");
}

void AnalyticInputs::validate() const {
    require_finite_nonneg(lambda_s, "lambda_s");
    require_finite_nonneg(lambda_r, "lambda_r");
    if (!(std::isfinite(link_distance) && link_distance > 0.0)) throw ParameterError("R must be positive");
    if (!(std::isfinite(threshold) && threshold > 0.0)) throw ParameterError("T must be positive");
    if (policy.kind() == PolicyKind::CenterBaseline)
        throw ParameterError("policy 'center' has no analytic model; it is simulation-only");
}

double beta(double x_dist, double y_dist, double threshold, const PathLossModel& model) {
    const double gx = model.gain(x_dist);
    const double gy = model.gain(y_dist);
    if (std::isinf(gx)) return 0.0;
    if (std::isinf(gy)) return 1.0;
    return 1.0 / (1.0 + gx / (threshold * gy));
}

double interference_exponent(double s, const PathLossModel& model, double rel_tol) {
    if (!(s >= 0.0)) throw ParameterError("Laplace argument must be non-negative");
    if (s == 0.0) return 0.0;
    if (std::isinf(s)) return std::numeric_limits<double>::infinity();
    auto f = [&](double r) {
        const double g = model.gain_sq(r * r);
        return 2.0 * kPi * r / (1.0 + 1.0 / (s * g));
    };
    // s g(r0) = 1 at r0 for the power law; the bounded model kinks at r = 1
    std::vector<double> breaks{std::pow(s, 1.0 / model.alpha())};
    if (model.bounded()) breaks.push_back(1.0);
    return integrate_half_line(f, breaks, rel_tol);
}

double beta_integral(double d, double threshold, const PathLossModel& model, const QuadratureConfig& quad) {
    if (!(d >= 0.0)) throw ParameterError("distance must be non-negative");
    if (!(threshold > 0.0)) throw ParameterError("T must be positive");
    const double g = model.gain(d);
    if (std::isinf(g)) return 0.0;
    return interference_exponent(threshold / g, model, std::min(quad.rel_tol * 1e-2, 1e-9));
}

double p_success(double d, const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    if (inputs.lambda_s == 0.0) return 1.0;
    return std::exp(-inputs.lambda_s * beta_integral(d, inputs.threshold, inputs.path_loss, quad));
}

double delta_tilde(double d, const AnalyticInputs& in, const QuadratureConfig& quad) {
    if (!(d >= 0.0)) throw ParameterError("distance must be non-negative");
    if (in.lambda_r == 0.0) return 0.0;
    const double T = in.threshold;
    switch (in.policy.kind()) {
        case PolicyKind::AllTransmit:
            return in.lambda_r * p_success(d, in, quad);
        case PolicyKind::RssThinning: {
            const double delta = in.policy.parameter();
            const double g = in.path_loss.gain(d);
            if (std::isinf(g)) return delta == 0.0 ? in.lambda_r : 0.0;
            // E[exp(-delta RSS / (1+T)) 1(SIR > T)] with Rayleigh signal and
            // interference Laplace exponent at s = delta + T / g
            const double s = delta + T / g;
            const double exponent =
                in.lambda_s == 0.0 ? 0.0 : in.lambda_s * interference_exponent(s, in.path_loss, std::min(quad.rel_tol * 1e-2, 1e-9));
            return in.lambda_r * (1.0 + T) * std::exp(-exponent) / (1.0 + T + delta * g);
        }
        case PolicyKind::Sectorized:
            return in.policy.parameter() / kPi * in.lambda_r * p_success(d, in, quad);
        case PolicyKind::DistanceThinning: {
            const double eps = in.policy.parameter();
            const double R = in.link_distance;
            auto w = [&](double nu) {
                const double dist2 = std::max(0.0, d * d + R * R - 2.0 * d * R * std::cos(nu));
                return std::exp(-2.0 * eps * std::sqrt(dist2) / R);
            };
            const double avg = integrate(w, 0.0, kPi, quad.rel_tol) / kPi;
            return in.lambda_r * p_success(d, in, quad) * avg;
        }
        case PolicyKind::CenterBaseline:
            break;
    }
    throw ParameterError("policy 'center' has no analytic model; it is simulation-only");
}

double delta_tilde(Point2 z, const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    return delta_tilde(norm(z), inputs, quad);
}

double truncation_radius(const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    inputs.validate();
    const double start = 0.25 * std::min(1.0, inputs.link_distance);
    double peak = 0.0;
    double r = start;
    double covered = 0.0;
    constexpr double kLimit = 1e6;
    while (true) {
        // refresh the peak over the newly covered stretch
        constexpr int kSamples = 64;
        for (int i = 0; i <= kSamples; ++i)
            peak = std::max(peak, delta_tilde(covered + (r - covered) * i / kSamples, inputs, quad));
        covered = r;
        if (peak == 0.0) return start;
        if (delta_tilde(r, inputs, quad) < quad.truncation_fraction * peak) return r;
        r *= 2.0;
        if (r > kLimit * std::max(1.0, inputs.link_distance))
            throw ParameterError("cluster intensity does not decay (lambda_s = 0 leaves every relay decoding)");
    }
}

ClusterIntensity::ClusterIntensity(const AnalyticInputs& inputs, const QuadratureConfig& quad, std::size_t radial_nodes) {
    if (radial_nodes < 2) throw ParameterError("need at least two radial nodes");
    support_ = truncation_radius(inputs, quad);
    step_ = support_ / static_cast<double>(radial_nodes - 1);
    values_.resize(radial_nodes);
    for (std::size_t i = 0; i < radial_nodes; ++i) values_[i] = delta_tilde(step_ * static_cast<double>(i), inputs, quad);
    const auto kind = inputs.policy.kind();
    if (kind == PolicyKind::Sectorized || kind == PolicyKind::DistanceThinning) {
        first_hop_.resize(radial_nodes);
        for (std::size_t i = 0; i < radial_nodes; ++i)
            first_hop_[i] = inputs.lambda_r * p_success(step_ * static_cast<double>(i), inputs, quad);
    }
    double m = 0.0;
    for (std::size_t i = 1; i < radial_nodes; ++i) {
        const double r0 = step_ * static_cast<double>(i - 1);
        const double r1 = step_ * static_cast<double>(i);
        m += 0.5 * (values_[i - 1] * r0 + values_[i] * r1) * step_;
    }
    mass_ = 2.0 * kPi * m;

    // an interior peak (ring-shaped cluster) is narrow enough to fall between
    // fixed quadrature nodes; keep its location and half-height radii
    const auto peak = static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
    if (peak > 0 && peak + 1 < radial_nodes && values_[peak] > 0.0) {
        const double half = 0.5 * values_[peak];
        std::size_t lo = peak, hi = peak;
        while (lo > 0 && values_[lo] > half) --lo;
        while (hi + 1 < radial_nodes && values_[hi] > half) ++hi;
        for (std::size_t i : {lo, peak, hi}) features_.push_back(step_ * static_cast<double>(i));
    }
}

double ClusterIntensity::interpolate(const std::vector<double>& table, double r) const noexcept {
    if (!(r < support_) || r < 0.0 || table.empty()) return 0.0;
    const double x = r / step_;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= table.size()) return table.back();
    const double t = x - static_cast<double>(i);
    return table[i] + t * (table[i + 1] - table[i]);
}

namespace {

class BudgetGuard {
public:
    explicit BudgetGuard(std::uint64_t budget) : budget_(budget) {}
    void tick() {
        if (++count_ > budget_) throw BudgetExceeded("analytic evaluation budget exhausted", 0.0, 0.0);
    }
    std::uint64_t count() const noexcept { return count_; }

private:
    std::uint64_t budget_;
    std::uint64_t count_ = 0;
};

// Radial reduction of the nested second-hop integrals over one memoized
// cluster-intensity field.
class SecondHop {
public:
    SecondHop(const ClusterIntensity& field, const AnalyticInputs& in, double tol, BudgetGuard* guard)
        : field_(field), in_(in), tol_(tol), guard_(guard) {}

    // A(r, b): integral of D over the circle of radius r about a point at
    // distance b from the cluster centre.
    double circle_mass(double r, double b) const {
        std::vector<double> breaks;
        if (r > 0.0 && b > 0.0) {
            for (double d : field_.feature_radii()) {
                const double c = (d * d - r * r - b * b) / (2.0 * r * b);
                if (std::abs(c) < 1.0) breaks.push_back(std::acos(c));
            }
        }
        return circle_mass_of([&](double d, double) { return field_(d); }, r, b, std::move(breaks));
    }

    // Mass of the tagged source's own cluster on the circle of radius r
    // about its destination, which sits at distance R along the x-axis.
    double own_circle_mass(double r) const {
        const double R = in_.link_distance;
        if (in_.own_cluster == OwnCluster::Isotropic) return circle_mass(r, R);
        switch (in_.policy.kind()) {
            case PolicyKind::Sectorized: {
                const double theta = in_.policy.parameter();
                if (theta >= kPi) return circle_mass_of([&](double d, double) { return field_.first_hop(d); }, r, R, {});
                // breaks where the circle crosses the sector edges
                std::vector<double> breaks;
                const double disc = r * r - R * R * std::sin(theta) * std::sin(theta);
                if (disc >= 0.0) {
                    for (double sign : {-1.0, 1.0}) {
                        const double t = R * std::cos(theta) + sign * std::sqrt(disc);
                        if (t > 0.0) breaks.push_back(std::atan2(t * std::sin(theta), t * std::cos(theta) - R));
                    }
                }
                // relay at destination + r e^{i phi}; psi is its angle seen
                // from the source, relative to the destination direction
                return circle_mass_of(
                    [&](double d, double phi) {
                        const double psi = std::atan2(r * std::sin(phi), R + r * std::cos(phi));
                        return std::abs(psi) < theta ? field_.first_hop(d) : 0.0;
                    },
                    r, R, breaks);
            }
            case PolicyKind::DistanceThinning: {
                // the distance weight is constant on a circle about the destination
                const double w = std::exp(-2.0 * in_.policy.parameter() * r / R);
                return w * circle_mass_of([&](double d, double) { return field_.first_hop(d); }, r, R, {});
            }
            default:
                return circle_mass(r, R);
        }
    }

    // B(a, b): interference functional of a cluster centred at distance b
    // from the receiver, for a desired link of length a.
    double interference(double a, double b) const {
        return radial_interference(a, b, [&](double r) { return circle_mass(r, b); });
    }

    // int beta(a, r) mass(r) r dr over the annulus the cluster can reach.
    template <class Mass>
    double radial_interference(double a, double b, Mass&& mass) const {
        const double rmax = field_.support_radius();
        const double ga = in_.path_loss.gain(a);
        if (std::isinf(ga)) return 0.0;
        const double T = in_.threshold;
        auto f = [&](double r) {
            const double gr = in_.path_loss.gain_sq(r * r);
            const double w = std::isinf(gr) ? 1.0 : 1.0 / (1.0 + ga / (T * gr));
            return w * mass(r) * r;
        };
        const double lo = std::max(0.0, b - rmax);
        const double hi = b + rmax;
        std::vector<double> breaks{lo, hi};
        if (b > lo) breaks.push_back(b);
        const double knee = a * std::pow(T, 1.0 / in_.path_loss.alpha());
        if (knee > lo && knee < hi) breaks.push_back(knee);
        for (double d : field_.feature_radii())
            for (double x : {b - d, b + d})
                if (x > lo && x < hi) breaks.push_back(x);
        return integrate_panels(f, breaks, radial_panels_);
    }

    // 2 pi lambda_s int_0^inf (1 - exp(-B(a, b))) b db.
    double other_clusters(double a) const {
        if (in_.lambda_s == 0.0) return 0.0;
        const double rmax = field_.support_radius();
        auto f = [&](double b) { return 2.0 * kPi * b * -std::expm1(-interference(a, b)); };
        const double reach = a * std::pow(in_.threshold, 1.0 / in_.path_loss.alpha());
        return in_.lambda_s * integrate_half_line(f, {rmax, reach + rmax}, tol_ * 1e-1);
    }

    // Own-cluster interference for a desired link of length a.
    double own_interference(double a) const {
        if (in_.own_cluster == OwnCluster::Isotropic) return interference(a, in_.link_distance);
        return radial_interference(a, in_.link_distance, [&](double r) { return own_circle_mass(r); });
    }

    double p2() const {
        const double R = in_.link_distance;
        const double rmax = field_.support_radius();
        const double lo = std::max(0.0, R - rmax);
        const double hi = R + rmax;
        // smooth in the link length, so tabulate rather than re-integrate
        const ChebyshevTable others([&](double a) { return other_clusters(a); }, lo, hi, chebyshev_nodes_);
        auto f = [&](double a) {
            const double signal = a * own_circle_mass(a);
            if (signal == 0.0) return 0.0;
            return signal * std::exp(-own_interference(a) - std::max(0.0, others(a)));
        };
        // the own-cluster mass kinks where the circle about the destination
        // passes the source or touches a sector edge
        std::vector<double> breaks{hi, R};
        if (in_.policy.kind() == PolicyKind::Sectorized && in_.own_cluster == OwnCluster::Directional) {
            const double theta = in_.policy.parameter();
            if (theta < kPi / 2) breaks.push_back(R * std::sin(theta));
        }
        std::sort(breaks.begin(), breaks.end());
        double total = 0.0;
        double from = lo;
        for (double b : breaks) {
            if (b <= from || b > hi) continue;
            total += integrate(f, from, b, tol_ * 0.5, 12);
            from = b;
        }
        return total;
    }

private:
    // int_0^{2 pi} density(|c + r e^{i phi}|, phi) dphi with |c| = b, using
    // the mirror symmetry of every density here about the centre line.
    // phi = 0 points from the circle's centre away from the cluster centre.
    template <class Density>
    double circle_mass_of(Density&& density, double r, double b, std::vector<double> breaks) const {
        const double rmax = field_.support_radius();
        auto dist = [&](double phi) { return std::sqrt(std::max(0.0, r * r + b * b + 2.0 * r * b * std::cos(phi))); };
        if (b <= 0.0 || r <= 0.0) {
            // degenerate circle: constant distance
            const double d = b <= 0.0 ? r : b;
            if (d >= rmax) return 0.0;
            breaks.insert(breaks.end(), {0.0, kPi});
            auto f = [&](double phi) {
                if (guard_) guard_->tick();
                return density(d, phi);
            };
            return 2.0 * integrate_panels(f, breaks, angular_panels_);
        }
        if (std::abs(r - b) >= rmax) return 0.0;
        const double c = (rmax * rmax - r * r - b * b) / (2.0 * r * b);
        const double phi_min = c >= 1.0 ? 0.0 : std::acos(std::max(-1.0, c));
        std::erase_if(breaks, [&](double x) { return !(x > phi_min && x < kPi); });
        breaks.insert(breaks.end(), {phi_min, kPi});
        auto f = [&](double phi) {
            if (guard_) guard_->tick();
            return density(dist(phi), phi);
        };
        return 2.0 * integrate_panels(f, breaks, angular_panels_);
    }

    const ClusterIntensity& field_;
    const AnalyticInputs& in_;
    double tol_;
    BudgetGuard* guard_;
    int angular_panels_ = 2;
    int radial_panels_ = 3;
    std::size_t chebyshev_nodes_ = 33;
};

}  // namespace

double beta_tilde(double signal_distance, double cluster_distance, const ClusterIntensity& field,
                  const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    return SecondHop(field, inputs, quad.rel_tol * 1e2, nullptr).interference(signal_distance, cluster_distance);
}

double beta_tilde(Point2 z, Point2 xi, const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    inputs.validate();
    if (inputs.lambda_r == 0.0) return 0.0;
    const ClusterIntensity field(inputs, quad, quad.radial_nodes);
    return beta_tilde(norm(z), norm(xi), field, inputs, quad);
}

P2Result p2(const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    inputs.validate();
    quad.validate();
    P2Result out;
    if (inputs.lambda_r == 0.0) return out;

    BudgetGuard guard(quad.max_evaluations);
    double previous = std::numeric_limits<double>::quiet_NaN();
    std::size_t nodes = quad.radial_nodes;
    try {
        while (true) {
            const ClusterIntensity field(inputs, quad, nodes);
            const double value = SecondHop(field, inputs, quad.pipeline_rel_tol, &guard).p2();
            out.grid_nodes = nodes;
            out.evaluations = guard.count();
            if (!std::isnan(previous)) out.error_estimate = std::abs(value - previous);
            out.value = value;
            const bool converged = !std::isnan(previous) &&
                                   out.error_estimate <= quad.pipeline_rel_tol * std::max(std::abs(value), 1e-12);
            if (!quad.refine_grid || converged || nodes * 2 > quad.max_radial_nodes) break;
            previous = value;
            nodes *= 2;
        }
    } catch (const BudgetExceeded&) {
        const double achieved = std::isnan(previous) ? std::numeric_limits<double>::infinity() : out.error_estimate;
        throw BudgetExceeded("P2 evaluation budget of " + std::to_string(quad.max_evaluations) +
                                 " integrand calls exhausted at " + std::to_string(nodes) + " radial nodes",
                             out.value, achieved);
    }

    const double clamped = std::clamp(out.value, 0.0, 1.0);
    if (std::abs(clamped - out.value) > quad.pipeline_rel_tol)
        std::cerr << "warning: P2=" << out.value << " clamped to [0,1]\n";
    out.value = clamped;
    return out;
}

double ps_composed(const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    const double p1 = p_success(inputs.link_distance, inputs, quad);
    return 1.0 - (1.0 - p1) * (1.0 - p2(inputs, quad).value);
}

double mean_cluster_size(const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    inputs.validate();
    if (inputs.lambda_r == 0.0) return 0.0;
    const double rmax = truncation_radius(inputs, quad);
    auto f = [&](double r) { return 2.0 * kPi * r * delta_tilde(r, inputs, quad); };
    return integrate(f, 0.0, rmax, quad.rel_tol);
}

AnalyticEstimate evaluate(const AnalyticInputs& inputs, const QuadratureConfig& quad) {
    inputs.validate();
    AnalyticEstimate e;
    e.p1 = p_success(inputs.link_distance, inputs, quad);
    const P2Result r = p2(inputs, quad);
    e.p2 = r.value;
    e.p2_error_estimate = r.error_estimate;
    e.evaluations = r.evaluations;
    e.ps = 1.0 - (1.0 - e.p1) * (1.0 - e.p2);
    e.mean_cluster_size = mean_cluster_size(inputs, quad);
    return e;
}

}  // namespace twohop
