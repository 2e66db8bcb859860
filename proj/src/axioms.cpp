#include "wdlab/axioms.hpp"

#include "wdlab/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdlab {

const char* to_string(AxiomVerdict v) {
    return v == AxiomVerdict::Refuted ? "Refuted" : "SupportedWithinBudget";
}

const char* to_string(A3Verdict v) { return v == A3Verdict::Consistent ? "Consistent" : "ContradictionFound"; }

ApproachSequence approach_sequence(const MetricSpace& space, const Point& xi, const Point& u, int k_max) {
    space.check_dim(xi);
    space.check_dim(u);
    if (!space.on_boundary(xi)) throw Error(ErrorCode::NotOnBoundary, "approach target must lie on the boundary");
    if (!(u.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "approach direction must be nonzero");
    if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be positive");
    ApproachSequence seq;
    seq.target = xi;
    Point dir = u / u.norm();
    for (int k = 1; k <= k_max; ++k) {
        Point x = xi + std::ldexp(1.0, -k) * dir;
        if (space.contains(x) && space.boundary_distance(x) >= tol::guard) seq.points.push_back(std::move(x));
    }
    return seq;
}

ApproachSequence radial_sequence(const MetricSpace& space, const Point& xi, int k_max) {
    return approach_sequence(space, xi, space.center() - xi, k_max);
}

void validate_sequence(const MetricSpace& space, const ApproachSequence& seq) {
    if (!space.on_boundary(seq.target)) throw Error(ErrorCode::InvalidArgument, "sequence target is not on the boundary");
    if (seq.points.size() < 2) throw Error(ErrorCode::InvalidArgument, "approach sequence needs at least two points");
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : seq.points) {
        if (!space.contains(p)) throw Error(ErrorCode::InvalidArgument, "approach sequence leaves the domain");
        double r = (p - seq.target).norm();
        if (!(r < prev)) throw Error(ErrorCode::InvalidArgument, "approach sequence does not strictly approach its target");
        prev = r;
    }
}

namespace {

struct Ladder {
    std::vector<double> crossed;
    std::vector<double> beyond;
    bool supported = false;
    int decided_at = 0;
    double final_value = 0.0;
};

// crossing fixed levels; unreached levels count as beyond precision when growth was still
// steady at the end of the (precision-truncated) schedule
Ladder run_ladder(const std::vector<double>& v, const std::vector<double>& levels) {
    Ladder L;
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v) top = std::max(top, x);
    L.final_value = v.empty() ? top : v.back();
    for (double level : levels)
        if (top >= level) L.crossed.push_back(level);
    if (L.crossed.size() == levels.size()) {
        L.supported = true;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (v[k] >= levels.back()) {
                L.decided_at = static_cast<int>(k);
                break;
            }
        return L;
    }
    bool growing = v.size() > static_cast<std::size_t>(ladder_growth_window);
    for (std::size_t k = v.size() - std::min<std::size_t>(v.size(), ladder_growth_window); growing && k < v.size(); ++k)
        if (k == 0 || v[k] - v[k - 1] < ladder_min_gain) growing = false;
    L.decided_at = static_cast<int>(v.size()) - 1;
    if (growing) {
        L.supported = true;
        for (double level : levels)
            if (top < level) L.beyond.push_back(level);
    }
    return L;
}

Point inward(const MetricSpace& space, const Point& xi) { return space.center() - xi; }

// tangent basis of the hyperplane normal . x = 0
Matrix tangent_basis(const Point& normal) {
    Eigen::JacobiSVD<Matrix> svd(normal.transpose(), Eigen::ComputeFullV);
    return svd.matrixV().rightCols(normal.size() - 1);
}

} // namespace

AxiomReport check_axiom1(const MetricSpace& space, const std::vector<ApproachSequence>& sequences, const Point& w) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "no approach sequences");
    space.require_interior(w);
    AxiomReport rep;
    rep.axiom = "axiom1";
    rep.levels = axiom1_levels;
    rep.margin = std::numeric_limits<double>::infinity();
    std::vector<double> crossed_all = axiom1_levels;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto& seq = sequences[i];
        validate_sequence(space, seq);
        ++rep.trials;
        std::vector<double> v;
        for (const auto& p : seq.points) v.push_back(space.distance(p, w));
        Ladder L = run_ladder(v, axiom1_levels);
        rep.margin = std::min(rep.margin, L.final_value);
        for (double b : L.beyond)
            if (std::find(rep.beyond_precision.begin(), rep.beyond_precision.end(), b) == rep.beyond_precision.end())
                rep.beyond_precision.push_back(b);
        std::vector<double> keep;
        for (double c : crossed_all)
            if (std::find(L.crossed.begin(), L.crossed.end(), c) != L.crossed.end()) keep.push_back(c);
        crossed_all = keep;
        if (!L.supported) {
            rep.verdict = AxiomVerdict::Refuted;
            AxiomWitness wit;
            wit.trial = i;
            wit.construction = "sequence";
            wit.xi = seq.target;
            wit.k = L.decided_at;
            wit.value = L.final_value;
            rep.witness = wit;
            break;
        }
    }
    std::sort(rep.beyond_precision.begin(), rep.beyond_precision.end());
    rep.levels_crossed = crossed_all;
    return rep;
}

AxiomReport check_condition_B(const MetricSpace& space, const ApproachSequence& sx, const ApproachSequence& sy,
                              const Point& w) {
    validate_sequence(space, sx);
    validate_sequence(space, sy);
    space.require_interior(w);
    if ((sx.target - sy.target).norm() <= tol::boundary)
        throw Error(ErrorCode::InvalidArgument, "condition (B) needs distinct boundary targets");
    AxiomReport rep;
    rep.axiom = "condition_B";
    rep.levels = condition_b_levels;
    rep.trials = 1;
    std::size_t n = std::min(sx.points.size(), sy.points.size());
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& x = sx.points[k];
        const auto& y = sy.points[k];
        v.push_back(space.distance(x, y) - std::max(space.distance(x, w), space.distance(y, w)));
    }
    Ladder L = run_ladder(v, condition_b_levels);
    rep.levels_crossed = L.crossed;
    rep.beyond_precision = L.beyond;
    rep.margin = L.final_value;
    if (!L.supported) {
        rep.verdict = AxiomVerdict::Refuted;
        AxiomWitness wit;
        wit.construction = "sequence";
        wit.xi = sx.target;
        wit.eta = sy.target;
        wit.k = L.decided_at;
        wit.value = L.final_value;
        rep.witness = wit;
    }
    return rep;
}

std::vector<std::pair<Point, Point>> same_face_pairs(const MetricSpace& space) {
    const ConvexBody& body = space.body();
    if (body.kind() != BodyKind::Polytope || space.kind() == MetricKind::PoincareDisc) return {};
    const int m = body.dim();
    if (m < 2) return {};
    const Point c = space.to_chart(space.center());
    const auto& H = body.halfspaces();
    std::vector<std::pair<Point, Point>> out;
    for (std::size_t i = 0; i < H.size(); ++i) {
        const Point& a = H[i].normal;
        Point foot = c + (H[i].offset - a.dot(c)) * a;
        Matrix T = tangent_basis(a);
        for (int j = 0; j < T.cols(); ++j) {
            Point t = T.col(j);
            // room along +-t before another face is crossed
            double room = std::numeric_limits<double>::infinity();
            for (std::size_t f = 0; f < H.size(); ++f) {
                if (f == i) continue;
                double slack = H[f].offset - H[f].normal.dot(foot);
                // the foot misses the face itself
                if (slack < 0.0) room = 0.0;
                double rate = std::abs(H[f].normal.dot(t));
                if (rate > 1e-12) room = std::min(room, slack / rate);
            }
            if (!(room > 1e-6) || !std::isfinite(room)) continue;
            double h = 0.5 * room;
            out.emplace_back(space.from_chart(foot - h * t), space.from_chart(foot + h * t));
        }
    }
    return out;
}

namespace {

enum class RefuterKind { Bprime, Axiom4 };

struct Proposal {
    Point xi, eta;
    std::string construction;
    bool valid = false;
};

struct TrialOutcome {
    bool refutes = false;
    bool counted = false;
    double statistic = 0.0;
    int k = 0;
};

TrialOutcome run_pair(const MetricSpace& space, const Proposal& p, const RefuterConfig& cfg, RefuterKind kind) {
    TrialOutcome out;
    auto sx = approach_sequence(space, p.xi, inward(space, p.xi), cfg.k_max);
    auto sy = approach_sequence(space, p.eta, inward(space, p.eta), cfg.k_max);
    std::size_t n = std::min(sx.points.size(), sy.points.size());
    if (n < cfg.min_schedule) return out;
    out.counted = true;
    const Point& w = space.base_point();
    if (kind == RefuterKind::Bprime) {
        out.statistic = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            double gap = space.distance(sx.points[k], sy.points[k]) - space.distance(sy.points[k], w);
            if (gap < out.statistic) {
                out.statistic = gap;
                out.k = static_cast<int>(k);
            }
            if (gap <= -condition_bprime_levels.back()) {
                out.refutes = true;
                return out;
            }
        }
    } else {
        out.statistic = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double d = space.distance(sx.points[k], sy.points[k]);
            if (d > out.statistic) {
                out.statistic = d;
                out.k = static_cast<int>(k);
            }
            if (d > axiom4_bound) return out;
        }
        out.refutes = true;
    }
    return out;
}

AxiomReport run_refuter(const MetricSpace& space, const RefuterConfig& cfg, RefuterKind kind) {
    AxiomReport rep;
    rep.axiom = kind == RefuterKind::Bprime ? "condition_Bprime" : "axiom4";
    if (kind == RefuterKind::Bprime) rep.levels = condition_bprime_levels;
    else rep.levels = {axiom4_bound};
    if (cfg.budget < 1) throw Error(ErrorCode::InvalidArgument, "refuter budget must be >= 1");

    std::vector<Proposal> proposals;
    if (cfg.same_face)
        for (auto& [a, b] : same_face_pairs(space)) proposals.push_back({a, b, "same_face", true});
    const std::size_t deterministic = proposals.size();
    proposals.resize(deterministic + cfg.budget);
    parallel_for(cfg.budget, [&](std::size_t i) {
        Rng rng = task_rng(cfg.seed, i);
        Proposal& p = proposals[deterministic + i];
        p.construction = "random_pair";
        p.xi = space.boundary_point(space.random_direction(rng));
        // redraw eta until the pair is separated, so every budget slot is a trial
        for (int attempt = 0; attempt < 64 && !p.valid; ++attempt) {
            p.eta = space.boundary_point(space.random_direction(rng));
            p.valid = (p.xi - p.eta).norm() >= cfg.separation;
        }
    });

    std::vector<TrialOutcome> outcomes(proposals.size());
    parallel_for(proposals.size(), [&](std::size_t i) {
        if (proposals[i].valid && (proposals[i].xi - proposals[i].eta).norm() >= cfg.separation)
            outcomes[i] = run_pair(space, proposals[i], cfg, kind);
    });

    // B': lowest gap seen; axiom 4: lowest sup distance seen
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.counted) continue;
        ++rep.trials;
        rep.margin = std::min(rep.margin, o.statistic);
        if (o.refutes && !rep.witness) {
            rep.verdict = AxiomVerdict::Refuted;
            AxiomWitness w;
            w.seed = cfg.seed;
            w.trial = i < deterministic ? i : i - deterministic;
            w.construction = proposals[i].construction;
            w.xi = proposals[i].xi;
            w.eta = proposals[i].eta;
            w.k = o.k;
            w.value = o.statistic;
            rep.witness = w;
        }
    }
    if (rep.verdict == AxiomVerdict::Refuted) {
        if (kind == RefuterKind::Bprime) rep.levels_crossed = condition_bprime_levels;
        else rep.levels_crossed = {axiom4_bound};
    }
    return rep;
}

} // namespace

AxiomReport check_condition_Bprime(const MetricSpace& space, const RefuterConfig& config) {
    return run_refuter(space, config, RefuterKind::Bprime);
}

AxiomReport check_axiom4(const MetricSpace& space, const RefuterConfig& config) {
    return run_refuter(space, config, RefuterKind::Axiom4);
}

AxiomReport check_condition_C(const MetricSpace& space, std::size_t trials, std::uint64_t seed, double tol) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    struct Sample {
        Point x, y, z;
        double s = 0.0;
        double excess = -std::numeric_limits<double>::infinity();
        bool counted = false;
    };
    std::vector<Sample> out(trials);
    parallel_for(trials, [&](std::size_t i) {
        Rng rng = task_rng(seed, i);
        Sample& S = out[i];
        S.x = space.sample_interior(rng);
        S.y = space.sample_interior(rng);
        S.z = space.sample_interior(rng);
        S.s = uniform01(rng);
        Point m = S.s * S.x + (1.0 - S.s) * S.y;
        if (!space.contains(m) || space.boundary_distance(m) < tol::guard) return;
        S.counted = true;
        S.excess = space.distance(m, S.z) - std::max(space.distance(S.x, S.z), space.distance(S.y, S.z));
    });
    AxiomReport rep;
    rep.axiom = "condition_C";
    rep.margin = -std::numeric_limits<double>::infinity();
    std::size_t worst = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        if (!out[i].counted) continue;
        ++rep.trials;
        if (out[i].excess > rep.margin) {
            rep.margin = out[i].excess;
            worst = i;
        }
    }
    if (worst < trials && rep.margin > tol) {
        rep.verdict = AxiomVerdict::Refuted;
        AxiomWitness w;
        w.seed = seed;
        w.trial = worst;
        w.construction = "random_sample";
        w.x = out[worst].x;
        w.y = out[worst].y;
        w.z = out[worst].z;
        w.s = out[worst].s;
        w.value = out[worst].excess;
        rep.witness = w;
    }
    return rep;
}

A3Report a3star_check(const MetricSpace& space, const ApproachSequence& sx, const ApproachSequence& sy, const Point& w) {
    validate_sequence(space, sx);
    validate_sequence(space, sy);
    space.require_interior(w);
    A3Report rep;
    if ((sx.target - sy.target).norm() <= tol::boundary) {
        rep.degenerate = true;
        return rep;
    }
    std::size_t n = std::min(sx.points.size(), sy.points.size());
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
        rep.min_gap = std::min(rep.min_gap, space.distance(sx.points[k], sy.points[k]) - space.distance(sy.points[k], w));
    if (!(rep.min_gap < a3_gap_level))
        throw Error(ErrorCode::PreconditionNotMet,
                    "gap d(x_k, y_k) - d(y_k, w) only reached " + std::to_string(rep.min_gap) + ", not below -10");
    rep.verdict = space.segment_in_boundary(sx.target, sy.target) ? A3Verdict::Consistent : A3Verdict::ContradictionFound;
    return rep;
}

} // namespace wdlab
