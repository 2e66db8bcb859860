#include "wdlab/horoball.hpp"

#include "wdlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdlab {

namespace {

void check_schedule(const ApproachSchedule& s) {
    if (s.steps < 4 || !(s.dt > 0.0) || s.jitter_rays < 0)
        throw Error(ErrorCode::InvalidArgument, "approach schedule needs steps >= 4, dt > 0, jitter_rays >= 0");
}

void require_boundary(const MetricSpace& space, const Point& xi) {
    space.check_dim(xi);
    if (!space.on_boundary(xi)) throw Error(ErrorCode::NotOnBoundary, "horoball center must lie on the boundary");
}

} // namespace

BusemannEstimate busemann_estimate(const MetricSpace& space, const Point& xi, const Point& z0, const Point& y,
                                   const ApproachSchedule& schedule, const std::optional<Point>& anchor) {
    check_schedule(schedule);
    require_boundary(space, xi);
    space.require_interior(z0);
    space.require_interior(y);
    const Point& a = anchor ? *anchor : z0;
    space.require_interior(a);

    std::vector<Point> starts{a};
    Rng rng = task_rng(schedule.seed, 0);
    for (int j = 0; j < schedule.jitter_rays; ++j) {
        Point q = space.sample_interior(rng);
        starts.push_back(a + 0.5 * (q - a));
    }

    BusemannEstimate est;
    est.schedule = schedule;
    est.lo = std::numeric_limits<double>::infinity();
    est.hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        GeodesicRay ray = space.ray_toward(s, xi);
        std::vector<double> g;
        double last_t = 0.0;
        for (int k = 1; k <= schedule.steps; ++k) {
            double t = k * schedule.dt;
            Point w = ray.at(t);
            if (!space.contains(w) || space.boundary_distance(w) < tol::guard) break;
            g.push_back(space.distance(y, w) - space.distance(w, z0));
            last_t = t;
        }
        if (g.empty()) continue;
        est.max_arclength = std::max(est.max_arclength, last_t);
        std::size_t tail = std::max<std::size_t>(1, g.size() / 4);
        for (std::size_t i = g.size() - tail; i < g.size(); ++i) {
            est.lo = std::min(est.lo, g[i]);
            est.hi = std::max(est.hi, g[i]);
        }
        est.evaluations += g.size();
    }
    if (est.evaluations == 0) throw Error(ErrorCode::PointOutsideDomain, "no approach point passed the boundary guard");
    return est;
}

bool in_small_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r, const Point& y, double tol,
                       const ApproachSchedule& schedule) {
    return busemann_estimate(space, xi, z0, y, schedule).hi <= r + tol;
}

bool in_big_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r, const Point& y, double tol,
                     const ApproachSchedule& schedule) {
    return busemann_estimate(space, xi, z0, y, schedule).lo <= r + tol;
}

HoroballWitness horoball_witness(const MetricSpace& space, const Point& xi, const Point& z0, double r,
                                 const ApproachSchedule& schedule) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "witness radius must be >= 0");
    require_boundary(space, xi);
    space.require_interior(z0);
    if (!space.has_geodesics()) throw Error(ErrorCode::Unsupported, "witness needs geodesics");
    HoroballWitness w;
    if (r == 0.0) {
        w.point = z0;
    } else {
        GeodesicRay ray = space.ray_toward(z0, xi);
        const double t_min = r + 10.0;
        double T = std::max(t_min, 30.0);
        Point far = ray.at(T);
        while ((!space.contains(far) || space.boundary_distance(far) < tol::guard) && T > t_min) {
            T = std::max(t_min, T - 2.0);
            far = ray.at(T);
        }
        if (!space.contains(far) || space.boundary_distance(far) < tol::guard)
            throw Error(ErrorCode::ParameterOutOfRange, "radius exceeds the representable arclength toward the center");
        w.point = space.geodesic_point(z0, far, r);
    }
    w.estimate = busemann_estimate(space, xi, z0, w.point, schedule);
    w.verified = w.estimate.lo <= -r + 0.01;
    return w;
}

std::vector<Point> sample_horoball(const MetricSpace& space, const Point& xi, const Point& z0, double r,
                                   HoroballKind kind, const HoroballSampler& sampler, double tol,
                                   const ApproachSchedule& schedule) {
    Point c;
    try {
        c = horoball_witness(space, xi, z0, std::max(-r, 0.0), schedule).point;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParameterOutOfRange) throw;
        return {};
    }
    const double rad = 0.5 * space.boundary_distance(c);
    std::vector<Point> out;
    // batches keep the accepted prefix independent of scheduling
    const std::size_t batch = 256;
    for (std::size_t first = 0; first < sampler.max_attempts && out.size() < sampler.wanted; first += batch) {
        const std::size_t n = std::min(batch, sampler.max_attempts - first);
        std::vector<std::optional<Point>> accepted(n);
        parallel_for(n, [&](std::size_t i) {
            Rng rng = task_rng(sampler.seed, first + i);
            Point dir = space.random_direction(rng);
            double u = std::pow(uniform01(rng), 1.0 / std::max(1, space.chart_dim()));
            Point y = c + rad * u * dir;
            if (!space.contains(y) || space.boundary_distance(y) < tol::guard) return;
            auto est = busemann_estimate(space, xi, z0, y, schedule);
            bool in = kind == HoroballKind::Small ? est.hi <= r : est.lo <= r + tol;
            if (in) accepted[i] = std::move(y);
        });
        for (auto& a : accepted) {
            if (!a) continue;
            out.push_back(std::move(*a));
            if (out.size() == sampler.wanted) break;
        }
    }
    return out;
}

InvarianceReport invariance_check(const MapSpec& map, const MetricSpace& space, const Point& xi, const Point& z0,
                                  double r, int k, const HoroballSampler& sampler, double tol,
                                  const ApproachSchedule& schedule) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "power must be >= 1");
    validate_map(map);
    auto ys = sample_horoball(space, xi, z0, r, HoroballKind::Small, sampler, tol, schedule);
    if (ys.empty()) throw Error(ErrorCode::NoSamplesFound, "no sample landed in the small horoball");
    InvarianceReport rep;
    rep.samples = ys.size();
    rep.max_power = k;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> los(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) {
        Point y = ys[i];
        for (int j = 1; j <= k; ++j) {
            try {
                y = apply_map(map, space, y);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ImageEscapedDomain) throw;
                break;
            }
            // images inside the halt distance are not estimated and not counted
            if (space.boundary_distance(y) < tol::halt) break;
            los[i].push_back(busemann_estimate(space, xi, z0, y, schedule).lo);
        }
    });
    for (std::size_t i = 0; i < ys.size(); ++i)
        for (std::size_t j = 0; j < los[i].size(); ++j) {
            ++rep.checks;
            rep.worst_excess = std::max(rep.worst_excess, los[i][j] - r);
            if (los[i][j] > r + tol) rep.violations.push_back({ys[i], static_cast<int>(j + 1), los[i][j]});
        }
    return rep;
}

} // namespace wdlab
