#pragma once

#include "wdlab/dynamics.hpp"
#include "wdlab/parallel.hpp"

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wdlab {

template <class M>
concept Metric = requires(const M& m, const Point& x, const Point& y) {
    { m.distance(x, y) } -> std::convertible_to<double>;
};

// all distances multiplied by lambda
class ScaledMetric {
public:
    ScaledMetric(const MetricSpace& space, double lambda) : space_(&space), lambda_(lambda) {}
    double distance(const Point& x, const Point& y) const { return lambda_ * space_->distance(x, y); }
    double lambda() const { return lambda_; }

private:
    const MetricSpace* space_;
    double lambda_;
};

template <Metric M>
double gromov_product(const M& metric, const Point& x, const Point& y, const Point& w) {
    return 0.5 * (metric.distance(x, w) + metric.distance(y, w) - metric.distance(x, y));
}

// min{(x,z)_w, (y,z)_w} - (x,y)_w
template <Metric M>
double four_point_defect(const M& metric, const Point& x, const Point& y, const Point& z, const Point& w) {
    double dxw = metric.distance(x, w), dyw = metric.distance(y, w), dzw = metric.distance(z, w);
    double xy = 0.5 * (dxw + dyw - metric.distance(x, y));
    double xz = 0.5 * (dxw + dzw - metric.distance(x, z));
    double yz = 0.5 * (dyw + dzw - metric.distance(y, z));
    return std::min(xz, yz) - xy;
}

enum class DeltaSamplerKind { BoundaryBiased, FixedDepth };

// points center + (1 - 2^-k) exit(center, u) u; BoundaryBiased draws k uniform on 1..10,
// FixedDepth uses depth_k but draws the same variates so runs at different k share directions
struct DeltaSampler {
    DeltaSamplerKind kind = DeltaSamplerKind::BoundaryBiased;
    int depth_k = 10;
    std::string describe() const;
};

Point draw_sample_point(const MetricSpace& space, const DeltaSampler& sampler, Rng& rng);

struct DeltaEstimate {
    double delta_hat = 0.0; // observed defect, clamped at 0
    std::size_t quadruples = 0;
    std::array<Point, 4> worst; // x, y, z, w
    std::string schedule;
};

template <Metric M>
DeltaEstimate delta_estimate(const MetricSpace& space, const M& metric, const DeltaSampler& sampler,
                             std::size_t quadruples, std::uint64_t seed) {
    if (quadruples < 1) throw Error(ErrorCode::InvalidArgument, "quadruples must be >= 1");
    std::vector<double> defect(quadruples);
    parallel_for(quadruples, [&](std::size_t i) {
        Rng rng = task_rng(seed, i);
        std::array<Point, 4> q;
        for (auto& p : q) p = draw_sample_point(space, sampler, rng);
        defect[i] = four_point_defect(metric, q[0], q[1], q[2], q[3]);
    });
    DeltaEstimate est;
    est.quadruples = quadruples;
    est.schedule = sampler.describe();
    std::size_t arg = quadruples;
    for (std::size_t i = 0; i < quadruples; ++i)
        if (defect[i] > est.delta_hat) {
            est.delta_hat = defect[i];
            arg = i;
        }
    if (arg < quadruples) {
        Rng rng = task_rng(seed, arg);
        for (auto& p : est.worst) p = draw_sample_point(space, sampler, rng);
    }
    return est;
}

inline DeltaEstimate delta_estimate(const MetricSpace& space, const DeltaSampler& sampler, std::size_t quadruples,
                                    std::uint64_t seed) {
    return delta_estimate(space, space, sampler, quadruples, seed);
}

struct OrbitGromovReport {
    std::vector<std::size_t> indices; // monotone escape subsequence
    std::size_t checks = 0;
    std::size_t violations = 0;
    // min over checks of product - bound (>= -slack when the bound holds)
    double worst_margin = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> worst_pair; // (k, phi(i))
    // band_min[i] = min over j > i of (f^phi(i) x0, f^phi(j) x0)_w
    std::vector<double> band_min;
    Orbit orbit;
};

inline constexpr double gromov_slack = 1e-6;

// checks (f^k x0, f^phi(i) x0)_w >= 1/2 d(f^k x0, x0) - d(x0, w) - slack for k <= phi(i);
// throws OrbitNotEscaping unless the orbit classifies Escaping
OrbitGromovReport orbit_gromov_convergence(const MapSpec& map, const MetricSpace& space, const Point& x0, const Point& w,
                                           std::size_t n, double slack = gromov_slack);

struct RayLimitRow {
    double r = 0.0;
    std::vector<std::optional<Point>> u; // per input point; empty when d(w, x_n) < r
    std::vector<std::size_t> skipped;
    // tail_diameter[N] = max over n, m >= N of d(u_n, u_m)
    std::vector<double> tail_diameter;
    // min over n < m, both >= N, of (x_n, x_m)_w, per N
    std::vector<double> tail_product;
};

struct RayLimitReport {
    std::vector<RayLimitRow> rows;
};

RayLimitReport geodesic_ray_limit(const MetricSpace& space, const Point& w, const std::vector<Point>& points,
                                  const std::vector<double>& radii);

// x_n = (1 - 2^-n)(cos t_n, sin t_n), t_n = (-1)^n 2^(-n/2), n = 1..count
std::vector<Point> zigzag_sequence(int count);

struct BusemannProbeReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    std::optional<std::array<Point, 4>> witness; // x, y, x', y'
    double witness_alpha = 0.0;
};

enum class BusemannSampling { Interior, Directed };

// d(z_a, z'_a) <= (1 - a) d(x, x') + a d(y, y') + tol with z_a on [x, y] at a d(x, y).
// Directed sampling puts the segment endpoints on lines parallel to a common face of a polytope chart.
BusemannProbeReport busemann_convexity_probe(const MetricSpace& space, std::size_t trials, std::uint64_t seed,
                                             double tol = 1e-8, BusemannSampling sampling = BusemannSampling::Interior);

} // namespace wdlab
