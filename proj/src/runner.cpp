#include "wdlab/runner.hpp"

#include "wdlab/axioms.hpp"
#include "wdlab/gromov.hpp"
#include "wdlab/horoball.hpp"
#include "wdlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace wdlab {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- strict reading

class Reader {
public:
    Reader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) fail_at(path_, "must be an object");
    }

    [[noreturn]] static void fail_at(const std::string& path, const std::string& why) {
        throw Error(ErrorCode::ConfigInvalid, path + ": " + why);
    }
    [[noreturn]] void fail(const std::string& key, const std::string& why) const { fail_at(at(key), why); }
    std::string at(const std::string& key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_->contains(key);
    }
    const json& raw(const std::string& key) {
        if (!has(key)) fail(key, "missing required field");
        return (*j_)[key];
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key, "must be a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }
    double number(const std::string& key, double dflt) { return has(key) ? number(key) : dflt; }
    double positive(const std::string& key) {
        double x = number(key);
        if (!(x > 0.0)) fail(key, "must be positive");
        return x;
    }
    double positive(const std::string& key, double dflt) { return has(key) ? positive(key) : dflt; }

    std::uint64_t count(const std::string& key, std::uint64_t min) {
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        if (v.is_number_unsigned()) {
            auto x = v.get<std::uint64_t>();
            if (x < min) fail(key, "must be >= " + std::to_string(min));
            return x;
        }
        auto x = v.get<std::int64_t>();
        if (x < 0 || static_cast<std::uint64_t>(x) < min) fail(key, "must be >= " + std::to_string(min));
        return static_cast<std::uint64_t>(x);
    }
    std::uint64_t count(const std::string& key, std::uint64_t min, std::uint64_t dflt) {
        return has(key) ? count(key, min) : dflt;
    }

    std::string str(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& dflt) { return has(key) ? str(key) : dflt; }
    std::string choice(const std::string& key, const std::vector<std::string>& allowed) {
        std::string s = str(key);
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(key, "must be one of: " + list);
        }
        return s;
    }

    bool boolean(const std::string& key, bool dflt) {
        if (!has(key)) return dflt;
        const json& v = (*j_)[key];
        if (!v.is_boolean()) fail(key, "must be a boolean");
        return v.get<bool>();
    }

    static Point point_of(const json& v, const std::string& path) {
        if (!v.is_array() || v.empty()) fail_at(path, "must be a nonempty array of numbers");
        Point p(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail_at(path, "must be a nonempty array of numbers");
            p[static_cast<Eigen::Index>(i)] = v[i].get<double>();
            if (!std::isfinite(p[static_cast<Eigen::Index>(i)])) fail_at(path, "entries must be finite");
        }
        return p;
    }
    Point point(const std::string& key) { return point_of(raw(key), at(key)); }

    std::vector<Point> points(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail(key, "must be a nonempty array of points");
        std::vector<Point> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(point_of(v[i], at(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail(key, "must be a nonempty array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) fail(key, "must be a nonempty array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Matrix matrix(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail(key, "must be a nonempty array of rows");
        std::vector<Point> rows;
        for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(point_of(v[i], at(key) + "[" + std::to_string(i) + "]"));
        Matrix M(static_cast<Eigen::Index>(rows.size()), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows[0].size()) fail(key, "rows must have equal length");
            M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        }
        return M;
    }

    Reader object(const std::string& key) { return Reader(raw(key), at(key)); }
    const json& array(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(key, "must be an array");
        return v;
    }

    void finish() const {
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown field");
    }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

// converts library errors raised while building config objects into ConfigInvalid
template <class F>
auto config_guard(const std::string& path, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        Reader::fail_at(path, std::string(to_string(e.code())) + ": " + e.what());
    }
}

ConvexBody parse_body(Reader r) {
    std::string kind = r.choice("kind", {"ellipsoid", "unit_ball", "box", "polytope", "simplex", "pball"});
    auto body = config_guard(r.path(), [&]() -> ConvexBody {
        if (kind == "unit_ball") return ConvexBody::unit_ball(static_cast<int>(r.count("dim", 1)));
        if (kind == "simplex") return ConvexBody::standard_simplex(static_cast<int>(r.count("dim", 1)));
        if (kind == "ellipsoid") return ConvexBody::ellipsoid(r.point("center"), r.matrix("shape"));
        if (kind == "box") return ConvexBody::box(r.point("lo"), r.point("hi"));
        if (kind == "pball") return ConvexBody::pball(r.point("center"), r.positive("radius"), r.positive("p"));
        const json& hs = r.array("halfspaces");
        std::vector<Halfspace> H;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            Reader h(hs[i], r.at("halfspaces") + "[" + std::to_string(i) + "]");
            H.push_back({h.point("normal"), h.number("offset")});
            h.finish();
        }
        return ConvexBody::polytope(std::move(H));
    });
    r.finish();
    return body;
}

MetricSpace parse_space(Reader r) {
    std::string metric = r.choice("metric", {"hilbert_body", "hilbert_cone", "thompson_cone", "poincare_disc"});
    auto space = config_guard(r.path(), [&]() -> MetricSpace {
        if (metric == "hilbert_body") return MetricSpace::hilbert_body(parse_body(r.object("body")));
        if (metric == "hilbert_cone") return MetricSpace::hilbert_cone(static_cast<int>(r.count("dim", 2)));
        if (metric == "thompson_cone") return MetricSpace::thompson_cone(static_cast<int>(r.count("dim", 2)));
        return MetricSpace::poincare_disc();
    });
    if (r.has("base")) {
        Point b = r.point("base");
        space = config_guard(r.at("base"), [&] { return space.with_base(b); });
    }
    r.finish();
    return space;
}

MapSpec parse_map(Reader r, const MetricSpace& space) {
    std::string kind = r.choice("kind", {"klein_boost", "klein", "matrix_projective", "mobius", "geodesic_pull",
                                         "rotation", "composition", "identity"});
    MapSpec m;
    if (kind == "identity") {
        m = identity_map();
    } else if (kind == "klein_boost") {
        double s = r.number("s");
        int dim = static_cast<int>(r.count("dim", 1, static_cast<std::uint64_t>(space.dim())));
        m = klein_boost(s, dim);
    } else if (kind == "klein") {
        m = MapSpec{KleinIsometry{r.matrix("B")}};
    } else if (kind == "matrix_projective") {
        m = matrix_projective(r.matrix("A"));
    } else if (kind == "mobius") {
        Point a = r.point("a");
        if (a.size() != 2) r.fail("a", "must be [re, im]");
        m = mobius(std::complex<double>(a[0], a[1]), r.number("theta"));
    } else if (kind == "geodesic_pull") {
        m = geodesic_pull(r.point("target"), r.number("lambda"));
    } else if (kind == "rotation") {
        m = rotation(r.number("angle"), r.point("center"));
    } else {
        const json& list = r.array("maps");
        std::vector<MapSpec> parts;
        for (std::size_t i = 0; i < list.size(); ++i)
            parts.push_back(parse_map(Reader(list[i], r.at("maps") + "[" + std::to_string(i) + "]"), space));
        m = compose(std::move(parts));
    }
    r.finish();
    config_guard(r.path(), [&] {
        validate_map(m);
        // compatibility with the space, checked on its center
        apply_map(m, space, space.center());
        return 0;
    });
    return m;
}

// ---------------------------------------------------------------- experiment parameters

std::vector<Point> parse_starts(Reader& r, const MetricSpace& space) {
    std::vector<Point> starts;
    if (r.has("starts") && r.has("grid")) r.fail("starts", "give either starts or grid, not both");
    if (r.has("starts")) {
        starts = r.points("starts");
    } else if (r.has("grid")) {
        Reader g = r.object("grid");
        double h = g.positive("half_width");
        int m = static_cast<int>(g.count("count", 1));
        Point c = g.has("center") ? space.to_chart(config_guard(g.at("center"), [&] {
            Point p = g.point("center");
            space.check_dim(p);
            return p;
        }))
                                  : space.to_chart(space.center());
        g.finish();
        const int dim = space.chart_dim();
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        for (;;) {
            Point u(dim);
            for (int a = 0; a < dim; ++a) u[a] = m == 1 ? c[a] : c[a] - h + 2.0 * h * idx[static_cast<std::size_t>(a)] / (m - 1.0);
            starts.push_back(space.from_chart(u));
            int a = 0;
            while (a < dim && ++idx[static_cast<std::size_t>(a)] == m) idx[static_cast<std::size_t>(a++)] = 0;
            if (a == dim) break;
        }
    } else {
        r.fail("starts", "missing starts or grid");
    }
    for (std::size_t i = 0; i < starts.size(); ++i)
        config_guard(r.at("starts") + "[" + std::to_string(i) + "]", [&] {
            space.require_interior(starts[i]);
            return 0;
        });
    return starts;
}

Thresholds parse_thresholds(Reader& r) {
    Thresholds th;
    if (!r.has("thresholds")) return th;
    Reader t = r.object("thresholds");
    th.R_bound = t.positive("R_bound", th.R_bound);
    th.D_escape = t.positive("D_escape", th.D_escape);
    th.warmup = t.count("warmup", 1, th.warmup);
    th.window = t.count("window", 1, th.window);
    th.n_max = t.count("n_max", 1, th.n_max);
    t.finish();
    return th;
}

Point interior_point(Reader& r, const std::string& key, const MetricSpace& space) {
    Point p = r.point(key);
    config_guard(r.at(key), [&] {
        space.require_interior(p);
        return 0;
    });
    return p;
}

Point boundary_point_param(Reader& r, const std::string& key, const MetricSpace& space) {
    Point p = r.point(key);
    config_guard(r.at(key), [&] {
        space.check_dim(p);
        if (!space.on_boundary(p)) throw Error(ErrorCode::NotOnBoundary, "point is not on the boundary");
        return 0;
    });
    return p;
}

// ---------------------------------------------------------------- report helpers

ordered_json jpoint(const Point& p) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
    return a;
}

// JSON has no infinities; non-finite values become null
ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

ordered_json jclassification(const OrbitClassification& c) {
    ordered_json o;
    o["verdict"] = to_string(c.verdict);
    o["rule"] = c.evidence.rule;
    o["steps"] = c.evidence.steps;
    o["halted_at_boundary"] = c.evidence.halted;
    o["max_dist"] = jnum(c.evidence.max_dist);
    o["final_dist"] = jnum(c.evidence.final_dist);
    o["window_max"] = jnum(c.evidence.window_max);
    o["doubling_gains"] = {jnum(c.evidence.gains[0]), jnum(c.evidence.gains[1]), jnum(c.evidence.gains[2])};
    if (c.verdict == OrbitVerdict::Bounded) o["radius"] = jnum(c.radius);
    if (c.verdict == OrbitVerdict::Escaping) {
        o["dw_estimate"] = jpoint(c.dw_estimate);
        o["residual"] = jnum(c.residual);
    }
    return o;
}

ordered_json jaxiom(const AxiomReport& r) {
    ordered_json o;
    o["axiom"] = r.axiom;
    o["verdict"] = to_string(r.verdict);
    o["trials"] = r.trials;
    o["levels"] = r.levels;
    o["levels_crossed"] = r.levels_crossed;
    o["beyond_precision"] = r.beyond_precision;
    o["margin"] = jnum(r.margin);
    if (r.witness) {
        const auto& w = *r.witness;
        ordered_json wj;
        wj["seed"] = w.seed;
        wj["trial"] = w.trial;
        wj["construction"] = w.construction;
        if (w.construction == "random_sample") {
            wj["x"] = jpoint(w.x);
            wj["y"] = jpoint(w.y);
            wj["z"] = jpoint(w.z);
            wj["s"] = w.s;
        } else {
            wj["xi"] = jpoint(w.xi);
            if (w.eta.size() > 0) wj["eta"] = jpoint(w.eta);
            wj["k"] = w.k;
        }
        wj["value"] = jnum(w.value);
        o["witness"] = wj;
    }
    return o;
}

struct Outcome {
    ordered_json result = ordered_json::object();
    std::vector<std::string> failures;
    std::vector<Orbit> orbits;
    std::optional<Point> marker;
};

// ---------------------------------------------------------------- experiments

Outcome run_dist(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    Point x = interior_point(r, "x", space), y = interior_point(r, "y", space);
    r.finish();
    Outcome out;
    out.result["x"] = jpoint(x);
    out.result["y"] = jpoint(y);
    out.result["value"] = space.distance(x, y);
    return out;
}

Outcome run_orbit(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    auto starts = parse_starts(r, space);
    std::size_t n = r.count("n", 1, 1000);
    bool budget = r.boolean("budget", false);
    Thresholds th = parse_thresholds(r);
    r.finish();
    Outcome out;
    std::vector<ClassifiedOrbit> res(starts.size());
    std::vector<bool> undecided(starts.size(), false);
    parallel_for(starts.size(), [&](std::size_t i) {
        if (budget) {
            try {
                res[i] = classify_with_budget(cfg.map, space, starts[i], th);
                return;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::UndecidedWithinBudget) throw;
                undecided[i] = true;
                res[i].orbit = iterate(cfg.map, space, starts[i], th.n_max);
            }
        } else {
            res[i].orbit = iterate(cfg.map, space, starts[i], n);
        }
        res[i].classification = classify_orbit(space, res[i].orbit, th);
    });
    ordered_json rows = ordered_json::array();
    std::size_t counts[3] = {0, 0, 0};
    std::size_t violations = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto& c = res[i];
        ordered_json row;
        row["start_id"] = i;
        row["start"] = jpoint(starts[i]);
        row["classification"] = jclassification(c.classification);
        double step = c.orbit.points.size() > 1 ? space.distance(c.orbit.points[0], c.orbit.points[1]) : 0.0;
        auto v = dichotomy_violation(c.orbit, th, step);
        row["dichotomy_violation"] = v ? ordered_json(*v) : ordered_json(nullptr);
        if (v) {
            ++violations;
            out.failures.push_back("start " + std::to_string(i) + ": bounded window followed by re-escape at step " +
                                   std::to_string(*v));
        }
        ++counts[static_cast<int>(c.classification.verdict)];
        rows.push_back(row);
        out.orbits.push_back(std::move(c.orbit));
    }
    out.result["n"] = n;
    out.result["budget"] = budget;
    out.result["counts"] = {{"Bounded", counts[0]}, {"Escaping", counts[1]}, {"Undecided", counts[2]}};
    out.result["dichotomy_violations"] = violations;
    out.result["orbits"] = rows;
    return out;
}

Outcome run_dw(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    auto starts = parse_starts(r, space);
    std::size_t n = r.count("n", 1, 2000);
    double tol = r.positive("tol", 1e-4);
    Thresholds th = parse_thresholds(r);
    r.finish();
    Outcome out;
    auto dw = denjoy_wolff_estimate(cfg.map, space, starts, n, tol, th);
    out.result["dw_estimate"] = jpoint(dw.xi);
    out.result["uniformity"] = dw.uniformity;
    out.result["spread"] = dw.spread;
    out.result["tol"] = tol;
    ordered_json per = ordered_json::array();
    for (std::size_t i = 0; i < starts.size(); ++i)
        per.push_back({{"start_id", i}, {"estimate", jpoint(dw.per_start[i])}, {"steps", dw.steps[i]}});
    out.result["per_start"] = per;
    out.marker = dw.xi;
    if (dw.uniformity > tol) out.failures.push_back("uniformity " + std::to_string(dw.uniformity) + " above tol");
    out.orbits.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) { out.orbits[i] = iterate(cfg.map, space, starts[i], n); });
    return out;
}

Outcome run_axioms(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    const std::vector<std::string> all{"axiom1", "condition_B", "condition_Bprime", "axiom4", "condition_C", "a3star"};
    std::vector<std::string> checks;
    {
        const json& list = r.array("checks");
        if (list.empty()) r.fail("checks", "must list at least one check");
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i].is_string() || std::find(all.begin(), all.end(), list[i].get<std::string>()) == all.end())
                Reader::fail_at(r.at("checks") + "[" + std::to_string(i) + "]", "unknown check");
            checks.push_back(list[i].get<std::string>());
        }
    }
    auto needs = [&](const std::string& c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    std::optional<Point> xi, eta;
    if (r.has("xi")) xi = boundary_point_param(r, "xi", space);
    if (r.has("eta")) eta = boundary_point_param(r, "eta", space);
    Point w = r.has("w") ? interior_point(r, "w", space) : space.base_point();
    RefuterConfig rc;
    rc.budget = r.count("budget", 1, 10000);
    rc.seed = derive_seed(cfg.seed, 1);
    std::size_t trials = r.count("trials", 1, 100000);
    double tol = r.positive("tol", 1e-9);
    int k_max = static_cast<int>(r.count("k_max", 2, 40));
    rc.k_max = k_max;
    r.finish();
    if ((needs("axiom1") || needs("condition_B") || needs("a3star")) && !xi) r.fail("xi", "required by the listed checks");
    if ((needs("condition_B") || needs("a3star")) && !eta) r.fail("eta", "required by the listed checks");

    Outcome out;
    ordered_json reports = ordered_json::array();
    auto record = [&](const AxiomReport& rep) {
        if (rep.verdict == AxiomVerdict::Refuted) out.failures.push_back(rep.axiom + " refuted");
        reports.push_back(jaxiom(rep));
    };
    for (const auto& c : checks) {
        if (c == "axiom1") {
            std::vector<ApproachSequence> seqs{radial_sequence(space, *xi, k_max)};
            if (eta) seqs.push_back(radial_sequence(space, *eta, k_max));
            record(check_axiom1(space, seqs, w));
        } else if (c == "condition_B") {
            record(check_condition_B(space, radial_sequence(space, *xi, k_max), radial_sequence(space, *eta, k_max), w));
        } else if (c == "condition_Bprime") {
            record(check_condition_Bprime(space, rc));
        } else if (c == "axiom4") {
            record(check_axiom4(space, rc));
        } else if (c == "condition_C") {
            record(check_condition_C(space, trials, derive_seed(cfg.seed, 2), tol));
        } else {
            ordered_json a;
            a["axiom"] = "a3star";
            try {
                auto rep = a3star_check(space, radial_sequence(space, *xi, k_max), radial_sequence(space, *eta, k_max), w);
                a["verdict"] = to_string(rep.verdict);
                a["min_gap"] = jnum(rep.min_gap);
                a["degenerate"] = rep.degenerate;
                if (rep.verdict == A3Verdict::ContradictionFound) out.failures.push_back("a3star contradiction");
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PreconditionNotMet) throw;
                a["verdict"] = "PreconditionNotMet";
                a["message"] = e.what();
            }
            reports.push_back(a);
        }
    }
    out.result["checks"] = reports;
    return out;
}

Outcome run_horoball(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    Point xi = boundary_point_param(r, "xi", space);
    Point z0 = r.has("z0") ? interior_point(r, "z0", space) : space.base_point();
    std::vector<double> radii = r.has("witness_radii") ? r.numbers("witness_radii") : std::vector<double>{1, 2, 4};
    for (double x : radii)
        if (x < 0) r.fail("witness_radii", "radii must be >= 0");
    std::optional<Reader> inv, shrink;
    if (r.has("invariance")) inv.emplace(r.object("invariance"));
    if (r.has("shrink")) shrink.emplace(r.object("shrink"));
    r.finish();

    Outcome out;
    ordered_json wit = ordered_json::array();
    for (double rad : radii) {
        auto w = horoball_witness(space, xi, z0, rad);
        wit.push_back({{"r", rad},
                       {"point", jpoint(w.point)},
                       {"lo", w.estimate.lo},
                       {"hi", w.estimate.hi},
                       {"verified", w.verified}});
        if (!w.verified) out.failures.push_back("witness for r = " + std::to_string(rad) + " misses the big horoball");
    }
    out.result["xi"] = jpoint(xi);
    out.result["z0"] = jpoint(z0);
    out.result["witnesses"] = wit;
    if (inv) {
        double rr = inv->number("r", 0.0);
        int k = static_cast<int>(inv->count("k", 1, 10));
        HoroballSampler s;
        s.wanted = inv->count("samples", 1, 200);
        s.max_attempts = inv->count("max_attempts", 1, 20000);
        s.seed = derive_seed(cfg.seed, 3);
        double tol = inv->positive("tol", horoball_tol);
        inv->finish();
        auto rep = invariance_check(cfg.map, space, xi, z0, rr, k, s, tol);
        ordered_json vj = ordered_json::array();
        for (const auto& v : rep.violations) vj.push_back({{"sample", jpoint(v.sample)}, {"power", v.power}, {"lo", v.lo}});
        out.result["invariance"] = {{"r", rr},         {"k", k},          {"tol", tol},
                                    {"samples", rep.samples}, {"checks", rep.checks}, {"worst_excess", jnum(rep.worst_excess)},
                                    {"violations", vj}};
        if (!rep.violations.empty())
            out.failures.push_back(std::to_string(rep.violations.size()) + " invariance violations");
    }
    if (shrink) {
        std::vector<double> rs = shrink->has("radii") ? shrink->numbers("radii") : std::vector<double>{-1, -2, -4, -8};
        HoroballSampler s;
        s.wanted = shrink->count("samples", 1, 20);
        s.max_attempts = shrink->count("max_attempts", 1, 2000);
        s.seed = derive_seed(cfg.seed, 4);
        shrink->finish();
        ordered_json rows = ordered_json::array();
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (double rr : rs) {
            auto pts = sample_horoball(space, xi, z0, rr, HoroballKind::Big, s);
            double far = 0.0;
            for (const auto& p : pts) far = std::max(far, (p - xi).norm());
            rows.push_back({{"r", rr}, {"samples", pts.size()}, {"max_norm_distance", pts.empty() ? ordered_json(nullptr) : ordered_json(far)}});
            if (pts.empty() || !(far < prev)) decreasing = false;
            prev = far;
        }
        out.result["shrink"] = {{"rows", rows}, {"decreasing", decreasing}};
        if (!decreasing) out.failures.push_back("big horoballs do not shrink toward the center");
    }
    out.marker = xi;
    return out;
}

DeltaSampler parse_sampler(Reader& r) {
    DeltaSampler s;
    if (!r.has("sampler")) return s;
    Reader q = r.object("sampler");
    std::string kind = q.choice("kind", {"boundary_biased", "fixed_depth"});
    if (kind == "fixed_depth") {
        s.kind = DeltaSamplerKind::FixedDepth;
        s.depth_k = static_cast<int>(q.count("k", 1));
        if (s.depth_k > 50) q.fail("k", "must be <= 50");
    }
    q.finish();
    return s;
}

Outcome run_gromov(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    std::size_t quadruples = r.count("quadruples", 1, 100000);
    DeltaSampler sampler = parse_sampler(r);
    std::vector<double> depths;
    if (r.has("depths")) {
        depths = r.numbers("depths");
        for (double k : depths)
            if (k < 1 || k > 50 || k != std::floor(k)) r.fail("depths", "entries must be integers in 1..50");
    }
    std::optional<double> bound;
    if (r.has("delta_bound")) bound = r.positive("delta_bound");
    std::optional<Reader> orbit, ray, bus;
    if (r.has("orbit")) orbit.emplace(r.object("orbit"));
    if (r.has("ray")) ray.emplace(r.object("ray"));
    if (r.has("busemann")) bus.emplace(r.object("busemann"));
    r.finish();

    Outcome out;
    auto est = delta_estimate(space, sampler, quadruples, derive_seed(cfg.seed, 5));
    out.result["delta"] = {{"observed_defect", est.delta_hat}, {"quadruples", est.quadruples}, {"schedule", est.schedule}};
    if (bound && est.delta_hat > *bound)
        out.failures.push_back("observed defect " + std::to_string(est.delta_hat) + " above delta_bound");
    if (!depths.empty()) {
        ordered_json rows = ordered_json::array();
        double prev = -1.0;
        bool increasing = true;
        for (double k : depths) {
            DeltaSampler fixed{DeltaSamplerKind::FixedDepth, static_cast<int>(k)};
            // the same seed at every depth: common random directions
            double v = delta_estimate(space, fixed, quadruples, derive_seed(cfg.seed, 6)).delta_hat;
            rows.push_back({{"k", static_cast<int>(k)}, {"observed_defect", v}});
            if (!(v > prev)) increasing = false;
            prev = v;
        }
        out.result["depth_schedule"] = {{"rows", rows}, {"strictly_increasing", increasing}};
    }
    if (orbit) {
        Point x0 = interior_point(*orbit, "x0", space);
        Point w = orbit->has("w") ? interior_point(*orbit, "w", space) : x0;
        std::size_t n = orbit->count("n", 1, 500);
        double slack = orbit->positive("slack", gromov_slack);
        orbit->finish();
        auto rep = orbit_gromov_convergence(cfg.map, space, x0, w, n, slack);
        ordered_json bands = ordered_json::array();
        for (double b : rep.band_min) bands.push_back(jnum(b));
        out.result["orbit"] = {{"subsequence_length", rep.indices.size()},
                               {"checks", rep.checks},
                               {"violations", rep.violations},
                               {"worst_margin", jnum(rep.worst_margin)},
                               {"band_min", bands}};
        if (rep.violations > 0) out.failures.push_back(std::to_string(rep.violations) + " orbit product bound violations");
        out.orbits.push_back(std::move(rep.orbit));
    }
    if (ray) {
        std::string family = ray->choice("family", {"zigzag", "points"});
        std::vector<Point> pts;
        if (family == "zigzag") {
            if (space.dim() != 2 || space.kind() == MetricKind::HilbertCone || space.kind() == MetricKind::ThompsonCone)
                ray->fail("family", "zigzag needs a planar space");
            pts = zigzag_sequence(static_cast<int>(ray->count("count", 2, 40)));
        } else {
            pts = ray->points("points");
        }
        Point w = ray->has("w") ? interior_point(*ray, "w", space) : space.center();
        std::vector<double> radii = ray->has("radii") ? ray->numbers("radii") : std::vector<double>{2.0};
        std::size_t N = ray->count("N", 0, 20);
        ray->finish();
        if (N >= pts.size()) Reader::fail_at("experiment.ray.N", "must be below the number of points");
        for (std::size_t i = 0; i < pts.size(); ++i)
            config_guard("experiment.ray.points[" + std::to_string(i) + "]", [&] {
                space.require_interior(pts[i]);
                return 0;
            });
        auto rep = geodesic_ray_limit(space, w, pts, radii);
        ordered_json rows = ordered_json::array();
        for (const auto& row : rep.rows)
            rows.push_back({{"r", row.r},
                            {"skipped", row.skipped.size()},
                            {"tail_diameter", row.tail_diameter[N]},
                            {"tail_min_product", jnum(row.tail_product[N])}});
        out.result["ray"] = {{"family", family}, {"N", N}, {"rows", rows}};
    }
    if (bus) {
        std::size_t trials = bus->count("trials", 1, 10000);
        double tol = bus->positive("tol", 1e-8);
        bool directed = bus->boolean("directed", false);
        bus->finish();
        auto rep = busemann_convexity_probe(space, trials, derive_seed(cfg.seed, 7), tol,
                                            directed ? BusemannSampling::Directed : BusemannSampling::Interior);
        ordered_json b = {{"trials", rep.trials}, {"violations", rep.violations}, {"worst_excess", jnum(rep.worst_excess)}};
        if (rep.witness) {
            ordered_json pts = ordered_json::array();
            for (const auto& p : *rep.witness) pts.push_back(jpoint(p));
            b["witness"] = {{"points", pts}, {"alpha", rep.witness_alpha}};
        }
        out.result["busemann"] = b;
    }
    return out;
}

Outcome run_attractor(const ExperimentConfig& cfg, Reader& r) {
    const MetricSpace& space = *cfg.space;
    auto starts = parse_starts(r, space);
    std::size_t n = r.count("n", 1, 2000);
    double eps = r.positive("eps_acc", 1e-6);
    r.finish();
    Outcome out;
    auto s = attractor_sample(cfg.map, space, starts, n, eps);
    auto h = hull_boundary_check(s, space);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < starts.size(); ++i)
        rows.push_back({{"start_id", i},
                        {"verdict", to_string(s.verdicts[i])},
                        {"limit", s.limits[i] ? jpoint(*s.limits[i]) : ordered_json(nullptr)}});
    out.result["starts"] = rows;
    out.result["hull_check"] = to_string(h.verdict);
    if (h.witness) out.result["witness"] = {jpoint(h.witness->first), jpoint(h.witness->second)};
    if (h.verdict == HullVerdict::CounterexampleFound) out.failures.push_back("attractor hull leaves the boundary");
    if (!h.boundary_points.empty()) out.marker = h.boundary_points.front();
    out.orbits.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) { out.orbits[i] = iterate(cfg.map, space, starts[i], n); });
    return out;
}

Outcome dispatch(const ExperimentConfig& cfg) {
    Reader r(cfg.experiment_doc, "experiment");
    r.str("kind");
    r.boolean("theorem_consistency", false);
    if (cfg.kind == "dist") return run_dist(cfg, r);
    if (cfg.kind == "orbit") return run_orbit(cfg, r);
    if (cfg.kind == "dw") return run_dw(cfg, r);
    if (cfg.kind == "axioms") return run_axioms(cfg, r);
    if (cfg.kind == "horoball") return run_horoball(cfg, r);
    if (cfg.kind == "gromov") return run_gromov(cfg, r);
    return run_attractor(cfg, r);
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt3(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    f << text;
    f.close();
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace

// ---------------------------------------------------------------- public

ExperimentConfig parse_config(const json& doc) {
    Reader top(doc, "config");
    ExperimentConfig cfg;
    cfg.seed = top.count("seed", 0);
    cfg.space_doc = top.raw("space");
    cfg.space = parse_space(Reader(cfg.space_doc, "space"));
    cfg.map_doc = top.has("map") ? top.raw("map") : json{{"kind", "identity"}};
    cfg.map = parse_map(Reader(cfg.map_doc, "map"), *cfg.space);
    cfg.experiment_doc = top.raw("experiment");
    {
        Reader e(cfg.experiment_doc, "experiment");
        cfg.kind = e.choice("kind", experiment_kinds);
        cfg.theorem_consistency = e.boolean("theorem_consistency", false);
    }
    if (top.has("output")) {
        Reader o = top.object("output");
        cfg.output.report = o.str("report", "");
        cfg.output.orbits = o.str("orbits", "");
        cfg.output.plot = o.str("plot", "");
        o.finish();
    }
    top.finish();
    // experiment parameters are checked by run_experiment before any work starts
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot read config " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, "config: not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json o;
    o["seed"] = cfg.seed;
    o["space"] = ordered_json::parse(cfg.space_doc.dump());
    o["map"] = ordered_json::parse(cfg.map_doc.dump());
    o["experiment"] = ordered_json::parse(cfg.experiment_doc.dump());
    return o;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult res;
    ordered_json& rep = res.report;
    rep["tool"] = "wdlab";
    rep["seed"] = cfg.seed;
    rep["experiment"] = cfg.kind;
    rep["config"] = config_echo(cfg);
    rep["space"] = cfg.space->describe();
    rep["map"] = cfg.map.describe();
    Outcome out;
    std::optional<Error> err;
    try {
        out = dispatch(cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        err = e;
        // orbits from different starts settling on different boundary points
        if (e.code() == ErrorCode::DisagreeingLimits) out.failures.push_back(std::string("DisagreeingLimits: ") + e.what());
    }
    rep["status"] = err ? "error" : "ok";
    rep["result"] = out.result;
    if (err) rep["error"] = {{"code", to_string(err->code())}, {"message", err->what()}};
    bool consistent = out.failures.empty();
    rep["theorem_consistency"] = {{"requested", cfg.theorem_consistency},
                                  {"consistent", consistent},
                                  {"failures", out.failures}};
    if (cfg.theorem_consistency && !consistent) res.exit_code = ExitTheoremInconsistent;
    else if (err) res.exit_code = ExitExperimentError;
    else res.exit_code = ExitOk;
    res.orbits = std::move(out.orbits);
    res.marker = out.marker;
    return res;
}

std::string orbit_csv(const std::vector<Orbit>& orbits) {
    std::size_t dim = 0;
    for (const auto& o : orbits)
        if (!o.points.empty()) dim = static_cast<std::size_t>(o.points[0].size());
    std::string s = "start_id,step";
    for (std::size_t i = 0; i < dim; ++i) s += ",coord_" + std::to_string(i);
    s += ",dist_to_base\n";
    for (std::size_t id = 0; id < orbits.size(); ++id) {
        const auto& o = orbits[id];
        for (std::size_t k = 0; k < o.points.size(); ++k) {
            s += std::to_string(id) + "," + std::to_string(k);
            for (Eigen::Index i = 0; i < o.points[k].size(); ++i) s += "," + fmt17(o.points[k][i]);
            s += "," + fmt17(o.dists[k]) + "\n";
        }
    }
    return s;
}

std::string plot_svg(const MetricSpace& space, const std::vector<Orbit>& orbits, const std::optional<Point>& marker) {
    const double size = 512.0, pad = 16.0;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" viewBox=\"0 0 512 512\">\n";
    if (space.chart_dim() != 2) {
        os << "<text x=\"16\" y=\"32\">plot needs a two-dimensional chart</text>\n</svg>\n";
        return os.str();
    }
    const Point uc = space.to_chart(space.center());
    std::vector<Point> ring;
    for (int i = 0; i < 512; ++i) {
        double t = 2.0 * std::numbers::pi * i / 512.0;
        Point d(2);
        d << std::cos(t), std::sin(t);
        Point v = space.from_chart(uc + d) - space.center();
        ring.push_back(space.to_chart(space.center() + space.exit_param(space.center(), v) * v));
    }
    Point lo = ring[0], hi = ring[0];
    for (const auto& p : ring) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double scale = (size - 2 * pad) / std::max(hi[0] - lo[0], hi[1] - lo[1]);
    auto px = [&](const Point& u) {
        return fmt3(pad + (u[0] - lo[0]) * scale) + "," + fmt3(size - pad - (u[1] - lo[1]) * scale);
    };
    os << "<polyline class=\"boundary\" fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t i = 0; i <= ring.size(); ++i) os << (i ? " " : "") << px(ring[i % ring.size()]);
    os << "\"/>\n";
    for (const auto& o : orbits) {
        os << "<polyline class=\"orbit\" fill=\"none\" stroke=\"steelblue\" points=\"";
        for (std::size_t k = 0; k < o.points.size(); ++k) os << (k ? " " : "") << px(space.to_chart(o.points[k]));
        os << "\"/>\n";
    }
    if (marker) {
        Point u = space.to_chart(*marker);
        os << "<circle class=\"dw-marker\" cx=\"" << fmt3(pad + (u[0] - lo[0]) * scale) << "\" cy=\""
           << fmt3(size - pad - (u[1] - lo[1]) * scale) << "\" r=\"5\" fill=\"crimson\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string report_text(const RunResult& result) { return result.report.dump(2) + "\n"; }

void write_outputs(const ExperimentConfig& cfg, const RunResult& result) {
    if (!cfg.output.report.empty()) write_file(cfg.output.report, report_text(result));
    if (!cfg.output.orbits.empty()) write_file(cfg.output.orbits, orbit_csv(result.orbits));
    if (!cfg.output.plot.empty()) write_file(cfg.output.plot, plot_svg(*cfg.space, result.orbits, result.marker));
}

} // namespace wdlab
