#include "wdlab/dynamics.hpp"

#include "wdlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdlab {

const char* to_string(OrbitVerdict v) {
    switch (v) {
    case OrbitVerdict::Bounded: return "Bounded";
    case OrbitVerdict::Escaping: return "Escaping";
    case OrbitVerdict::Undecided: return "Undecided";
    }
    return "Unknown";
}

const char* to_string(HullVerdict v) {
    switch (v) {
    case HullVerdict::Consistent: return "Consistent";
    case HullVerdict::CounterexampleFound: return "CounterexampleFound";
    case HullVerdict::NotApplicable: return "NotApplicable";
    }
    return "Unknown";
}

Orbit iterate(const MapSpec& map, const MetricSpace& space, const Point& x0, std::size_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "iteration count must be positive");
    validate_map(map);
    space.require_interior(x0);
    Orbit o;
    o.start = x0;
    o.base = space.base_point();
    o.points.push_back(x0);
    o.dists.push_back(space.distance(x0, o.base));
    extend(o, map, space, n);
    return o;
}

void extend(Orbit& o, const MapSpec& map, const MetricSpace& space, std::size_t n_total) {
    o.points.reserve(n_total + 1);
    o.dists.reserve(n_total + 1);
    while (!o.halted_at_boundary && o.steps() < n_total) {
        Point y;
        try {
            y = apply_map(map, space, o.points.back());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ImageEscapedDomain) throw;
            o.halted_at_boundary = true;
            break;
        }
        if (space.boundary_distance(y) < tol::halt) {
            o.halted_at_boundary = true;
            break;
        }
        o.dists.push_back(space.distance(y, o.base));
        o.points.push_back(std::move(y));
    }
}

namespace {

Point tail_average(const Orbit& o, std::size_t count) {
    std::size_t m = std::min(count, o.points.size());
    Point avg = Point::Zero(o.points.back().size());
    for (std::size_t i = o.points.size() - m; i < o.points.size(); ++i) avg += o.points[i];
    return avg / static_cast<double>(m);
}

double boundary_residual(const MetricSpace& space, const Point& xi) {
    if (space.kind() == MetricKind::HilbertCone || space.kind() == MetricKind::ThompsonCone)
        return std::abs(xi.minCoeff());
    return std::abs(space.body().residual(xi));
}

} // namespace

OrbitClassification classify_orbit(const MetricSpace& space, const Orbit& o, const Thresholds& th) {
    if (o.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty orbit");
    OrbitClassification c;
    auto& ev = c.evidence;
    const std::size_t L = o.steps();
    ev.steps = L;
    ev.halted = o.halted_at_boundary;
    ev.final_dist = o.dists.back();

    std::vector<double> M(o.dists.size());
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.dists.size(); ++i) M[i] = run = std::max(run, o.dists[i]);
    ev.max_dist = M.back();
    ev.gains = {M[L] - M[L / 2], M[L / 2] - M[L / 4], M[L / 4] - M[L / 8]};
    std::size_t w0 = L + 1 > th.window ? L + 1 - th.window : 0;
    ev.window_max = *std::max_element(o.dists.begin() + static_cast<std::ptrdiff_t>(w0), o.dists.end());
    ev.window_min = *std::min_element(o.dists.begin() + static_cast<std::ptrdiff_t>(w0), o.dists.end());

    Point avg = tail_average(o, th.tail_average);
    auto escaping = [&](const char* rule) {
        c.verdict = OrbitVerdict::Escaping;
        ev.rule = rule;
        c.dw_estimate = space.project_to_boundary(avg);
        c.residual = boundary_residual(space, c.dw_estimate);
    };

    if (o.halted_at_boundary) {
        escaping("halted_at_boundary");
        return c;
    }
    if (L < th.warmup + th.window) {
        ev.rule = "too_short";
        return c;
    }
    bool near = space.boundary_distance(avg) <= th.boundary_tail;
    bool growing = ev.gains[0] >= th.growth_gain && ev.gains[1] >= th.growth_gain && ev.gains[2] >= th.growth_gain;
    if (ev.max_dist >= th.D_escape && near) {
        escaping("distance_threshold");
    } else if (growing && near) {
        escaping("sustained_growth");
    } else if (ev.window_max <= th.R_bound && ev.gains[0] <= th.stall_gain) {
        c.verdict = OrbitVerdict::Bounded;
        c.radius = ev.window_max;
        ev.rule = "bounded_window";
    } else {
        ev.rule = "undecided";
    }
    return c;
}

ClassifiedOrbit classify_with_budget(const MapSpec& map, const MetricSpace& space, const Point& x0, const Thresholds& th) {
    std::size_t n = std::min(th.warmup + th.window, th.n_max);
    ClassifiedOrbit out;
    out.orbit = iterate(map, space, x0, n);
    for (;;) {
        out.classification = classify_orbit(space, out.orbit, th);
        if (out.classification.verdict != OrbitVerdict::Undecided) return out;
        if (n >= th.n_max)
            throw Error(ErrorCode::UndecidedWithinBudget,
                        "orbit is neither bounded nor escaping after " + std::to_string(n) + " steps");
        n = std::min(2 * n, th.n_max);
        extend(out.orbit, map, space, n);
    }
}

std::vector<std::size_t> monotone_escape_subsequence(const std::vector<double>& dists) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dists.size(); ++i)
        if (idx.empty() || dists[i] > dists[idx.back()]) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> monotone_escape_subsequence(const Orbit& orbit) { return monotone_escape_subsequence(orbit.dists); }

std::optional<std::size_t> dichotomy_violation(const Orbit& o, const Thresholds& th, double step_bound) {
    const auto& d = o.dists;
    const std::size_t N = d.size();
    if (N < th.warmup + th.window) return std::nullopt;
    std::vector<double> suffix_max(N + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t i = N; i-- > 0;) suffix_max[i] = std::max(suffix_max[i + 1], d[i]);
    const double limit = th.R_bound + 2.0 * step_bound;
    for (std::size_t s = th.warmup; s + th.window <= N; ++s) {
        double wmin = *std::min_element(d.begin() + static_cast<std::ptrdiff_t>(s),
                                        d.begin() + static_cast<std::ptrdiff_t>(s + th.window));
        if (wmin > th.R_bound) continue;
        if (suffix_max[s + th.window] > limit) {
            for (std::size_t i = s + th.window; i < N; ++i)
                if (d[i] > limit) return i;
        }
        // once some window qualifies, later windows add no new constraint beyond its suffix
        return std::nullopt;
    }
    return std::nullopt;
}

DenjoyWolffResult denjoy_wolff_estimate(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                        std::size_t n, double tol, const Thresholds& th) {
    if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "no starts");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    std::vector<Orbit> orbits(starts.size());
    std::vector<OrbitClassification> cls(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        orbits[i] = iterate(map, space, starts[i], n);
        cls[i] = classify_orbit(space, orbits[i], th);
    });
    std::size_t bounded = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (cls[i].verdict == OrbitVerdict::Undecided)
            throw Error(ErrorCode::UndecidedWithinBudget, "start " + std::to_string(i) + " is undecided after n steps");
        if (cls[i].verdict == OrbitVerdict::Bounded) ++bounded;
    }
    if (bounded > 0)
        throw Error(ErrorCode::MixedVerdicts, std::to_string(bounded) + " of " + std::to_string(starts.size()) +
                                                  " starts have bounded orbits");
    DenjoyWolffResult r;
    Point mean = Point::Zero(space.dim());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        r.per_start.push_back(cls[i].dw_estimate);
        r.finals.push_back(orbits[i].points.back());
        r.steps.push_back(orbits[i].steps());
        mean += cls[i].dw_estimate;
    }
    mean /= static_cast<double>(starts.size());
    r.xi = space.project_to_boundary(mean);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        r.spread = std::max(r.spread, (r.per_start[i] - r.xi).norm());
        r.uniformity = std::max(r.uniformity, (r.finals[i] - r.xi).norm());
    }
    if (r.spread > tol)
        throw Error(ErrorCode::DisagreeingLimits,
                    "per-start boundary estimates differ by " + std::to_string(r.spread) + " > tol");
    return r;
}

std::vector<double> uniformity_profile(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                       const Point& xi, const std::vector<std::size_t>& checkpoints) {
    if (checkpoints.empty()) return {};
    std::size_t n = *std::max_element(checkpoints.begin(), checkpoints.end());
    std::vector<std::vector<double>> per(starts.size(), std::vector<double>(checkpoints.size()));
    parallel_for(starts.size(), [&](std::size_t i) {
        Orbit o = iterate(map, space, starts[i], std::max<std::size_t>(n, 1));
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            std::size_t m = std::min(checkpoints[c], o.steps());
            per[i][c] = (o.points[m] - xi).norm();
        }
    });
    std::vector<double> out(checkpoints.size(), 0.0);
    for (const auto& row : per)
        for (std::size_t c = 0; c < row.size(); ++c) out[c] = std::max(out[c], row[c]);
    return out;
}

AttractorSample attractor_sample(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                 std::size_t n, double eps_acc, std::size_t tail) {
    AttractorSample s;
    s.eps_acc = eps_acc;
    s.limits.resize(starts.size());
    s.verdicts.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        Orbit o = iterate(map, space, starts[i], n);
        s.verdicts[i] = classify_orbit(space, o).verdict;
        std::size_t m = std::min(tail, o.points.size());
        double diam = 0.0;
        for (std::size_t a = o.points.size() - m; a < o.points.size(); ++a)
            for (std::size_t b = a + 1; b < o.points.size(); ++b) diam = std::max(diam, (o.points[a] - o.points[b]).norm());
        if (diam <= eps_acc) s.limits[i] = o.points.back();
    });
    return s;
}

HullReport hull_boundary_check(const AttractorSample& sample, const MetricSpace& space) {
    HullReport r;
    for (std::size_t i = 0; i < sample.limits.size(); ++i) {
        if (sample.verdicts[i] != OrbitVerdict::Escaping || !sample.limits[i]) {
            r.verdict = HullVerdict::NotApplicable;
            r.boundary_points.clear();
            return r;
        }
        r.boundary_points.push_back(space.project_to_boundary(*sample.limits[i]));
    }
    if (r.boundary_points.empty()) return r;
    r.verdict = HullVerdict::Consistent;
    const auto& B = r.boundary_points;
    for (std::size_t i = 0; i < B.size(); ++i)
        for (std::size_t j = i + 1; j < B.size(); ++j) {
            if ((B[i] - B[j]).norm() <= sample.eps_acc) continue;
            if (!space.segment_in_boundary(B[i], B[j])) {
                r.verdict = HullVerdict::CounterexampleFound;
                r.witness = std::make_pair(B[i], B[j]);
                return r;
            }
        }
    return r;
}

std::vector<Point> box_grid(const MetricSpace& space, const Point& lo, const Point& hi, const std::vector<int>& counts) {
    const int m = space.chart_dim();
    if (lo.size() != m || hi.size() != m || static_cast<int>(counts.size()) != m)
        throw Error(ErrorCode::DimensionMismatch, "grid box does not match the chart dimension");
    std::vector<Point> out;
    std::vector<int> idx(m, 0);
    for (;;) {
        Point u(m);
        for (int a = 0; a < m; ++a)
            u[a] = counts[a] == 1 ? 0.5 * (lo[a] + hi[a]) : lo[a] + (hi[a] - lo[a]) * idx[a] / (counts[a] - 1.0);
        Point x = space.from_chart(u);
        if (space.contains(x) && space.boundary_distance(x) >= tol::guard) out.push_back(x);
        int a = 0;
        while (a < m && ++idx[a] == counts[a]) idx[a++] = 0;
        if (a == m) break;
    }
    return out;
}

namespace {

struct GridBest {
    Point x;
    double value = std::numeric_limits<double>::infinity();
};

GridBest grid_search(const MetricSpace& space, const std::vector<Point>& seq, const Point& lo, const Point& hi, int g,
                     std::size_t& evaluated) {
    std::vector<int> counts(static_cast<std::size_t>(lo.size()), g);
    auto grid = box_grid(space, lo, hi, counts);
    std::vector<double> val(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        double v = 0.0;
        for (const auto& s : seq) v = std::max(v, space.distance(grid[i], s));
        val[i] = v;
    });
    evaluated += grid.size();
    GridBest best;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (val[i] < best.value) {
            best.value = val[i];
            best.x = grid[i];
        }
    return best;
}

} // namespace

AsymptoticCenterResult asymptotic_center(const MetricSpace& space, const std::vector<Point>& seq, int per_axis) {
    if (seq.empty()) throw Error(ErrorCode::InvalidArgument, "empty sequence");
    for (const auto& s : seq) space.require_interior(s);
    const int m = space.chart_dim();
    // keep the grid near 2e5 points in higher dimensions
    int g = per_axis;
    while (g > 3 && std::pow(static_cast<double>(g), m) > 2e5) g = (g - 1) / 2 + 1;
    Point lo = space.to_chart(seq[0]), hi = lo;
    for (const auto& s : seq) {
        Point u = space.to_chart(s);
        lo = lo.cwiseMin(u);
        hi = hi.cwiseMax(u);
    }
    Point margin = (0.1 * (hi - lo)).cwiseMax(Point::Constant(m, 0.02));
    lo -= margin;
    hi += margin;
    AsymptoticCenterResult r;
    GridBest coarse = grid_search(space, seq, lo, hi, g, r.evaluated);
    if (!std::isfinite(coarse.value)) throw Error(ErrorCode::InvalidArgument, "search grid misses the domain");
    Point step = (hi - lo) / (g - 1.0);
    Point c = space.to_chart(coarse.x);
    Point lo2 = c - step, hi2 = c + step;
    GridBest fine = grid_search(space, seq, lo2, hi2, g, r.evaluated);
    GridBest best = fine.value <= coarse.value ? fine : coarse;
    r.center = best.x;
    r.radius = best.value;
    r.spacing = ((hi2 - lo2) / (g - 1.0)).maxCoeff();
    return r;
}

AsymptoticCenterResult orbit_asymptotic_center(const MapSpec& map, const MetricSpace& space, const Point& x0,
                                               std::size_t n, std::size_t window, const Thresholds& th) {
    Orbit o = iterate(map, space, x0, n);
    auto cls = classify_orbit(space, o, th);
    if (cls.verdict == OrbitVerdict::Escaping) throw Error(ErrorCode::SequenceUnbounded, "orbit escapes to the boundary");
    std::size_t m = std::min(window, o.points.size());
    std::vector<Point> tail(o.points.end() - static_cast<std::ptrdiff_t>(m), o.points.end());
    return asymptotic_center(space, tail);
}

} // namespace wdlab
