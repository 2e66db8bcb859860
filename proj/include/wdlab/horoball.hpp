#pragma once

#include "wdlab/maps.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace wdlab {

struct ApproachSchedule {
    int steps = 64;         // K
    double dt = 0.5;        // arclength between evaluations
    int jitter_rays = 8;    // J
    std::uint64_t seed = 0x686f726fULL;
};

struct BusemannEstimate {
    double lo = 0.0; // min of tail values, approximates the liminf
    double hi = 0.0; // max of tail values, approximates the limsup
    ApproachSchedule schedule;
    // evaluations actually used (rays are cut where they meet the near-boundary guard)
    std::size_t evaluations = 0;
    double max_arclength = 0.0;
};

// g(w) = d(y, w) - d(w, z0) along the ray z0 -> xi and J jittered rays. The rays start
// at anchor (default z0) so that estimates for different poles share the same w.
BusemannEstimate busemann_estimate(const MetricSpace& space, const Point& xi, const Point& z0, const Point& y,
                                   const ApproachSchedule& schedule = {},
                                   const std::optional<Point>& anchor = std::nullopt);

inline constexpr double horoball_tol = 1e-3;

// small: hi <= r + tol; big: lo <= r + tol
bool in_small_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r, const Point& y,
                       double tol = horoball_tol, const ApproachSchedule& schedule = {});
bool in_big_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r, const Point& y,
                     double tol = horoball_tol, const ApproachSchedule& schedule = {});

struct HoroballWitness {
    Point point;
    BusemannEstimate estimate;
    // estimate.lo <= -r + 0.01
    bool verified = false;
};

// point at distance r from z0 on the geodesic toward a far point of the ray to xi
HoroballWitness horoball_witness(const MetricSpace& space, const Point& xi, const Point& z0, double r,
                                 const ApproachSchedule& schedule = {});

enum class HoroballKind { Small, Big };

struct HoroballSampler {
    std::size_t wanted = 200;
    std::size_t max_attempts = 10000;
    std::uint64_t seed = 1;
};

// rejection sampling from the norm ball of radius bd(c)/2 around the witness c for max(-r, 0)
std::vector<Point> sample_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r,
                                   HoroballKind kind, const HoroballSampler& sampler, double tol = horoball_tol,
                                   const ApproachSchedule& schedule = {});

struct InvarianceViolation {
    Point sample;
    int power = 0;
    double lo = 0.0;
};

struct InvarianceReport {
    std::size_t samples = 0;
    int max_power = 0;
    std::size_t checks = 0;
    std::vector<InvarianceViolation> violations;
    // largest lo(f^j y) - r seen
    double worst_excess = 0.0;
};

// samples y with hi <= r and checks lo(f^j y) <= r + tol for j = 1..k; throws NoSamplesFound
InvarianceReport invariance_check(const MapSpec& map, const MetricSpace& space, const Point& xi, const Point& z0,
                                  double r, int k, const HoroballSampler& sampler, double tol = horoball_tol,
                                  const ApproachSchedule& schedule = {});

} // namespace wdlab
