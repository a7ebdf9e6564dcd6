#pragma once

// Numerical evaluation of the stochastic-geometry success probabilities:
// link success p(d), the per-policy cluster intensity, the interference
// functional of the relay cluster process, P2 and the composed Ps.
//
// Every radially symmetric integral is done in polar coordinates about its
// centre of symmetry. The cluster intensity is isotropic for all four
// policies once averaged over the destination direction, so the nested P2
// integral collapses to radial integrals:
//
//   P2 = int_0^inf a * A(a, R) * exp(-B(a, R) - 2 pi ls int_0^inf (1 - e^{-B(a, b)}) b db) da
//   B(a, b) = int_0^inf beta(a, r) A(r, b) r dr
//   A(r, b) = int_0^{2 pi} D(sqrt(r^2 + b^2 - 2 r b cos phi)) dphi
//
// where D is the cluster intensity, a the relay-destination distance and b
// the distance from the destination to the centre of an interfering cluster.
//
// Other clusters are seen through D averaged over their random destination
// directions. The tagged source's own cluster knows where its destination
// is: with OwnCluster::Directional (default) the sector / distance weight is
// kept relative to the destination, so A(a, R) above becomes the mass of the
// directional intensity on the circle of radius a about the destination.
// OwnCluster::Isotropic uses the averaged D for the own cluster as well.

#include <cstdint>
#include <vector>

#include "twohop/geometry.hpp"
#include "twohop/relay_policy.hpp"

namespace twohop {

struct QuadratureConfig {
    double rel_tol = 1e-6;           // single 1-D / 2-D integrals
    double pipeline_rel_tol = 1e-3;  // nested P2
    double truncation_fraction = 1e-9;  // intensity cut-off relative to its peak
    std::size_t radial_nodes = 256;     // initial grid for the memoized intensity
    std::size_t max_radial_nodes = 4096;
    bool refine_grid = true;  // double the grid until P2 moves by < pipeline_rel_tol
    std::uint64_t max_evaluations = 200'000'000;  // integrand calls in one P2 run

    void validate() const;
};

enum class OwnCluster { Directional, Isotropic };

struct AnalyticInputs {
    double lambda_s = 0.1;
    double lambda_r = 0.0;
    double link_distance = 1.0;
    double threshold = 3.0;
    PathLossModel path_loss{4.0, false};
    SelectionPolicy policy;
    OwnCluster own_cluster = OwnCluster::Directional;

    // Throws ParameterError on invalid values, including CenterBaseline.
    void validate() const;
};

// 1 / (1 + g(x) / (T g(y))).
double beta(double x_dist, double y_dist, double threshold, const PathLossModel& model);

// int_{R^2} s g(|y|) / (1 + s g(|y|)) dy; the Laplace exponent of a unit
// density Rayleigh-faded PPP field at s.
double interference_exponent(double s, const PathLossModel& model, double rel_tol = 1e-9);

// int_{R^2} beta(d, |y|) dy.
double beta_integral(double d, double threshold, const PathLossModel& model, const QuadratureConfig& quad = {});

// exp(-lambda_s * beta_integral(d)); P1 = p_success(R).
double p_success(double d, const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

// Isotropic intensity of the relays a source at the origin activates in the
// second hop, at distance |z| from it. Sectorized and DistanceThinning are
// averaged over the destination direction.
double delta_tilde(double relay_distance, const AnalyticInputs& inputs, const QuadratureConfig& quad = {});
double delta_tilde(Point2 z, const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

// Memoized delta_tilde on a radial grid with linear interpolation; zero
// beyond the truncation radius. For the location-aware policies the
// undirected first-hop intensity lambda_r p(d) is tabulated alongside.
class ClusterIntensity {
public:
    ClusterIntensity(const AnalyticInputs& inputs, const QuadratureConfig& quad, std::size_t radial_nodes);

    double operator()(double r) const noexcept { return interpolate(values_, r); }
    // lambda_r p(d); only tabulated for Sectorized and DistanceThinning.
    double first_hop(double r) const noexcept { return interpolate(first_hop_, r); }
    double support_radius() const noexcept { return support_; }
    std::size_t nodes() const noexcept { return values_.size(); }
    // Mean number of second-hop transmitters per source: int D(z) dz.
    double mass() const noexcept { return mass_; }
    // Radii of an interior peak and its half-height points; empty when D
    // is largest at the origin.
    const std::vector<double>& feature_radii() const noexcept { return features_; }

private:
    double interpolate(const std::vector<double>& table, double r) const noexcept;

    double support_ = 0.0;
    double step_ = 0.0;
    double mass_ = 0.0;
    std::vector<double> values_;
    std::vector<double> first_hop_;
    std::vector<double> features_;
};

// Smallest radius, found by doubling, where delta_tilde falls below
// quad.truncation_fraction of its peak.
double truncation_radius(const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

// beta_tilde(z, xi) = int beta(|z|, |y|) D(|y + xi|) dy.
double beta_tilde(Point2 z, Point2 xi, const AnalyticInputs& inputs, const QuadratureConfig& quad = {});
double beta_tilde(double signal_distance, double cluster_distance, const ClusterIntensity& field,
                  const AnalyticInputs& inputs, const QuadratureConfig& quad);

struct P2Result {
    double value = 0.0;
    double error_estimate = 0.0;  // |difference| between the last two grid levels
    std::uint64_t evaluations = 0;
    std::size_t grid_nodes = 0;
};

// Throws BudgetExceeded when quad.max_evaluations runs out.
P2Result p2(const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

// 1 - (1 - P1)(1 - P2).
double ps_composed(const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

// Mean |N_x| predicted by the cluster intensity.
double mean_cluster_size(const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

struct AnalyticEstimate {
    double p1 = 0.0;
    double p2 = 0.0;
    double ps = 0.0;
    double p2_error_estimate = 0.0;
    double mean_cluster_size = 0.0;
    std::uint64_t evaluations = 0;
};

AnalyticEstimate evaluate(const AnalyticInputs& inputs, const QuadratureConfig& quad = {});

}  // namespace twohop
