#include "wdlab/gromov.hpp"

#include <cmath>
#include <limits>

namespace wdlab {

std::string DeltaSampler::describe() const {
    if (kind == DeltaSamplerKind::FixedDepth) return "fixed_depth(k=" + std::to_string(depth_k) + ")";
    return "boundary_biased(k=1..10)";
}

Point draw_sample_point(const MetricSpace& space, const DeltaSampler& sampler, Rng& rng) {
    Point dir = space.random_direction(rng);
    int k = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, 9)(rng));
    if (sampler.kind == DeltaSamplerKind::FixedDepth) k = sampler.depth_k;
    return space.point_at_depth(dir, 1.0 - std::ldexp(1.0, -k));
}

OrbitGromovReport orbit_gromov_convergence(const MapSpec& map, const MetricSpace& space, const Point& x0, const Point& w,
                                           std::size_t n, double slack) {
    space.require_interior(w);
    OrbitGromovReport rep;
    rep.orbit = iterate(map, space, x0, n);
    if (classify_orbit(space, rep.orbit).verdict != OrbitVerdict::Escaping)
        throw Error(ErrorCode::OrbitNotEscaping, "orbit does not classify as escaping");
    const auto& pts = rep.orbit.points;
    rep.indices = monotone_escape_subsequence(rep.orbit);
    const std::size_t L = pts.size();
    std::vector<double> to_w(L), to_x0(L);
    for (std::size_t k = 0; k < L; ++k) {
        to_w[k] = space.distance(pts[k], w);
        to_x0[k] = space.distance(pts[k], x0);
    }
    const double d0w = space.distance(x0, w);
    const auto& idx = rep.indices;
    struct Row {
        std::size_t checks = 0, violations = 0;
        double worst = std::numeric_limits<double>::infinity();
        std::size_t worst_k = 0;
        double band = std::numeric_limits<double>::infinity();
    };
    std::vector<Row> rows(idx.size());
    parallel_for(idx.size(), [&](std::size_t i) {
        const std::size_t p = idx[i];
        Row& row = rows[i];
        for (std::size_t k = 0; k <= p; ++k) {
            double prod = 0.5 * (to_w[k] + to_w[p] - space.distance(pts[k], pts[p]));
            double margin = prod - (0.5 * to_x0[k] - d0w);
            ++row.checks;
            if (margin < -slack) ++row.violations;
            if (margin < row.worst) {
                row.worst = margin;
                row.worst_k = k;
            }
        }
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            const std::size_t q = idx[j];
            row.band = std::min(row.band, 0.5 * (to_w[p] + to_w[q] - space.distance(pts[p], pts[q])));
        }
    });
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rep.checks += rows[i].checks;
        rep.violations += rows[i].violations;
        if (rows[i].worst < rep.worst_margin) {
            rep.worst_margin = rows[i].worst;
            rep.worst_pair = std::make_pair(rows[i].worst_k, idx[i]);
        }
        if (i + 1 < rows.size()) rep.band_min.push_back(rows[i].band);
    }
    return rep;
}

RayLimitReport geodesic_ray_limit(const MetricSpace& space, const Point& w, const std::vector<Point>& points,
                                  const std::vector<double>& radii) {
    space.require_interior(w);
    if (!space.has_geodesics()) throw Error(ErrorCode::Unsupported, "ray limits need geodesics");
    const std::size_t n = points.size();
    std::vector<double> dw(n);
    for (std::size_t i = 0; i < n; ++i) dw[i] = space.distance(w, points[i]);
    RayLimitReport rep;
    for (double r : radii) {
        if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
        RayLimitRow row;
        row.r = r;
        row.u.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (dw[i] < r) {
                row.skipped.push_back(i);
                continue;
            }
            row.u[i] = r == 0.0 ? w : space.geodesic_point(w, points[i], r);
        }
        // suffix maxima over pairs
        row.tail_diameter.assign(n, 0.0);
        row.tail_product.assign(n, std::numeric_limits<double>::infinity());
        std::vector<double> pair_max(n, 0.0), prod_min(n, std::numeric_limits<double>::infinity());
        parallel_for(n, [&](std::size_t a) {
            if (!row.u[a]) return;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!row.u[b]) continue;
                pair_max[a] = std::max(pair_max[a], space.distance(*row.u[a], *row.u[b]));
                prod_min[a] = std::min(prod_min[a], 0.5 * (dw[a] + dw[b] - space.distance(points[a], points[b])));
            }
        });
        double run = 0.0, prun = std::numeric_limits<double>::infinity();
        for (std::size_t a = n; a-- > 0;) {
            run = std::max(run, pair_max[a]);
            prun = std::min(prun, prod_min[a]);
            row.tail_diameter[a] = run;
            row.tail_product[a] = prun;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<Point> zigzag_sequence(int count) {
    std::vector<Point> out;
    for (int k = 1; k <= count; ++k) {
        double t = (k % 2 ? -1.0 : 1.0) * std::pow(2.0, -0.5 * k);
        double rad = 1.0 - std::ldexp(1.0, -k);
        Point p(2);
        p << rad * std::cos(t), rad * std::sin(t);
        out.push_back(p);
    }
    return out;
}

namespace {

// a chart line parallel to a random face of the polytope chart, at a random depth
std::pair<Point, Point> face_parallel_pair(const MetricSpace& space, Rng& rng) {
    const auto& H = space.body().halfspaces();
    const Point c = space.to_chart(space.center());
    std::size_t f = std::uniform_int_distribution<std::size_t>(0, H.size() - 1)(rng);
    const Point& a = H[f].normal;
    double depth = std::ldexp(1.0, -std::uniform_int_distribution<int>(1, 8)(rng));
    Point foot = c + (H[f].offset - a.dot(c)) * a;
    Point base = c + (1.0 - depth) * (foot - c);
    Point t = random_unit(static_cast<int>(a.size()), rng);
    t -= t.dot(a) * a;
    if (!(t.norm() > 1e-9)) t = random_unit(static_cast<int>(a.size()), rng) - a;
    t /= t.norm();
    const ConvexBody& B = space.body();
    double hi = B.exit_param(base, t), lo = B.exit_param(base, -t);
    double s1 = (2.0 * uniform01(rng) - 1.0), s2 = (2.0 * uniform01(rng) - 1.0);
    Point p = base + (s1 > 0 ? s1 * hi : s1 * lo) * 0.95 * t;
    Point q = base + (s2 > 0 ? s2 * hi : s2 * lo) * 0.95 * t;
    return {space.from_chart(p), space.from_chart(q)};
}

} // namespace

BusemannProbeReport busemann_convexity_probe(const MetricSpace& space, std::size_t trials, std::uint64_t seed, double tol,
                                             BusemannSampling sampling) {
    if (!space.has_geodesics()) throw Error(ErrorCode::Unsupported, "probe needs geodesics");
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (sampling == BusemannSampling::Directed && space.body().kind() != BodyKind::Polytope)
        throw Error(ErrorCode::Unsupported, "directed sampling needs a polytope chart");
    struct Trial {
        std::array<Point, 4> pts;
        double alpha = 0.0;
        double excess = -std::numeric_limits<double>::infinity();
        bool counted = false;
    };
    std::vector<Trial> out(trials);
    parallel_for(trials, [&](std::size_t i) {
        Rng rng = task_rng(seed, i);
        Trial& T = out[i];
        if (sampling == BusemannSampling::Directed) {
            auto [x, y] = face_parallel_pair(space, rng);
            auto [x2, y2] = face_parallel_pair(space, rng);
            T.pts = {x, y, x2, y2};
        } else {
            for (auto& p : T.pts) p = space.sample_interior(rng);
        }
        T.alpha = uniform01(rng);
        for (const auto& p : T.pts)
            if (!space.contains(p) || space.boundary_distance(p) < tol::guard) return;
        const auto& [x, y, x2, y2] = T.pts;
        Point z = space.geodesic_point(x, y, T.alpha * space.distance(x, y));
        Point z2 = space.geodesic_point(x2, y2, T.alpha * space.distance(x2, y2));
        T.excess = space.distance(z, z2) - ((1.0 - T.alpha) * space.distance(x, x2) + T.alpha * space.distance(y, y2));
        T.counted = true;
    });
    BusemannProbeReport rep;
    for (const auto& T : out) {
        if (!T.counted) continue;
        ++rep.trials;
        if (T.excess > tol) ++rep.violations;
        if (T.excess > rep.worst_excess) {
            rep.worst_excess = T.excess;
            rep.witness = T.pts;
            rep.witness_alpha = T.alpha;
        }
    }
    return rep;
}

} // namespace wdlab
