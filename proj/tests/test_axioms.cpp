#include "wdlab/axioms.hpp"

#include <doctest.h>

#include <cmath>

using namespace wdlab;

namespace {

Point P(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

MetricSpace hdisc() { return MetricSpace::hilbert_body(ConvexBody::unit_ball(2)); }
MetricSpace hsquare() { return MetricSpace::hilbert_body(ConvexBody::box(P({-1, -1}), P({1, 1}))); }
MetricSpace hellipse() {
    Matrix Q(2, 2);
    Q << 0.25, 0, 0, 1;
    return MetricSpace::hilbert_body(ConvexBody::ellipsoid(P({0, 0}), Q));
}

template <class F>
void check_code(F&& fn, ErrorCode code) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

bool contains_level(const std::vector<double>& v, double x) { return std::find(v.begin(), v.end(), x) != v.end(); }

} // namespace

TEST_CASE("approach sequences") {
    auto d = hdisc();
    auto s = radial_sequence(d, P({1, 0}));
    CHECK(s.points.size() == 40);
    validate_sequence(d, s);
    CHECK(std::abs(s.points[0][0] - 0.5) == 0.0);
    ApproachSequence constant{P({1, 0}), std::vector<Point>(5, P({0.5, 0}))};
    check_code([&] { validate_sequence(d, constant); }, ErrorCode::InvalidArgument);
    check_code([&] { check_axiom1(d, {constant}, P({0, 0})); }, ErrorCode::InvalidArgument);
    check_code([&] { radial_sequence(d, P({0.5, 0})); }, ErrorCode::NotOnBoundary);
}

TEST_CASE("axiom 1 examples") {
    auto d = hdisc();
    Point w = P({0, 0});
    // d(0, (u, 0)) = log((1 + u) / (1 - u)) at u = 1 - 1e-9
    double u = 1 - 1e-9;
    CHECK(d.distance(w, P({u, 0})) == doctest::Approx(std::log((1 + u) / (1 - u))).epsilon(1e-9));
    CHECK(d.distance(w, P({u, 0})) > 20);

    auto rep = check_axiom1(d, {radial_sequence(d, P({1, 0})), radial_sequence(d, P({0, -1}))}, w);
    CHECK(rep.verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(contains_level(rep.levels_crossed, 10));
    CHECK(contains_level(rep.levels_crossed, 20));
    // level 40 sits past the double precision guard
    CHECK(rep.beyond_precision == std::vector<double>{40});

    auto pd = MetricSpace::poincare_disc();
    auto prep = check_axiom1(pd, {radial_sequence(pd, P({1, 0}))}, w);
    CHECK(prep.verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(contains_level(prep.levels_crossed, 10));
}

TEST_CASE("ladder refutes a stalled sequence") {
    auto d = hdisc();
    // interior targets pretend to approach (1,0) but stall at a fixed distance
    ApproachSequence stalled{P({1, 0}), {}};
    for (int k = 1; k <= 30; ++k) stalled.points.push_back(P({0.5 + 0.4 * (1 - std::ldexp(1.0, -k)), 0}));
    // not a real approach sequence: the norm distance does not go to zero but still decreases
    auto rep = check_axiom1(d, {stalled}, P({0, 0}));
    CHECK(rep.verdict == AxiomVerdict::Refuted);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->trial == 0);
}

TEST_CASE("condition B examples") {
    auto d = hdisc();
    Point w = P({0, 0});
    auto rep = check_condition_B(d, radial_sequence(d, P({1, 0})), radial_sequence(d, P({-1, 0})), w);
    CHECK(rep.verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(rep.levels_crossed.size() == 3);

    auto sq = hsquare();
    auto sx = approach_sequence(sq, P({1, -0.5}), P({-1, 0}));
    auto sy = approach_sequence(sq, P({1, 0.5}), P({-1, 0}));
    auto srep = check_condition_B(sq, sx, sy, w);
    CHECK(srep.verdict == AxiomVerdict::Refuted);
    CHECK(srep.margin < 0);

    check_code([&] { check_condition_B(d, radial_sequence(d, P({1, 0})), radial_sequence(d, P({1, 0})), w); },
               ErrorCode::InvalidArgument);
}

TEST_CASE("same-face proposer on the square") {
    auto pairs = same_face_pairs(hsquare());
    REQUIRE(pairs.size() == 4);
    bool found = false;
    for (auto& [a, b] : pairs) {
        CHECK(hsquare().on_boundary(a));
        CHECK(hsquare().on_boundary(b));
        CHECK((a - b).norm() == doctest::Approx(1.0));
        if ((a - P({1, -0.5})).norm() < 1e-12 || (a - P({1, 0.5})).norm() < 1e-12) found = true;
    }
    CHECK(found);
    CHECK(same_face_pairs(hdisc()).empty());
    CHECK(same_face_pairs(MetricSpace::hilbert_cone(3)).size() == 3);
}

TEST_CASE("B' and axiom 4 refuters") {
    RefuterConfig cfg;
    cfg.budget = 10000;
    cfg.seed = 7;
    auto e = hellipse();
    CHECK(check_condition_Bprime(e, cfg).verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(check_axiom4(e, cfg).verdict == AxiomVerdict::SupportedWithinBudget);

    auto pd = MetricSpace::poincare_disc();
    cfg.budget = 2000;
    CHECK(check_condition_Bprime(pd, cfg).verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(check_axiom4(pd, cfg).verdict == AxiomVerdict::SupportedWithinBudget);

    auto sq = hsquare();
    auto bp = check_condition_Bprime(sq, cfg);
    CHECK(bp.verdict == AxiomVerdict::Refuted);
    REQUIRE(bp.witness.has_value());
    CHECK(bp.witness->construction == "same_face");
    CHECK(bp.witness->value <= -20);
    auto a4 = check_axiom4(sq, cfg);
    CHECK(a4.verdict == AxiomVerdict::Refuted);
    REQUIRE(a4.witness.has_value());
    CHECK(a4.witness->value <= axiom4_bound);
    CHECK((a4.witness->xi - a4.witness->eta).norm() >= limit_separation);

    // without the face proposer, random pairs still land on common faces of the square
    cfg.same_face = false;
    auto rnd = check_axiom4(sq, cfg);
    CHECK(rnd.verdict == AxiomVerdict::Refuted);
    CHECK(rnd.witness->construction == "random_pair");
}

TEST_CASE("refuted verdicts replay") {
    RefuterConfig cfg;
    cfg.budget = 500;
    cfg.seed = 99;
    cfg.same_face = false;
    auto sq = hsquare();
    auto a = check_axiom4(sq, cfg);
    auto b = check_axiom4(sq, cfg);
    REQUIRE(a.witness.has_value());
    REQUIRE(b.witness.has_value());
    CHECK(a.witness->trial == b.witness->trial);
    CHECK(a.witness->xi == b.witness->xi);
    CHECK(a.witness->eta == b.witness->eta);
    CHECK(a.witness->value == b.witness->value);
}

TEST_CASE("strict convexity decides the axiom 4 refuter") {
    RefuterConfig cfg;
    cfg.budget = 3000;
    cfg.seed = 5;
    std::vector<MetricSpace> smooth{hdisc(), hellipse(),
                                    MetricSpace::hilbert_body(ConvexBody::pball(P({0, 0}), 1.0, 4.0)),
                                    MetricSpace::hilbert_body(ConvexBody::unit_ball(3))};
    for (const auto& s : smooth) CHECK(check_axiom4(s, cfg).verdict == AxiomVerdict::SupportedWithinBudget);

    std::vector<MetricSpace> flat{hsquare(), MetricSpace::hilbert_body(ConvexBody::standard_simplex(2)),
                                  MetricSpace::hilbert_body(ConvexBody::box(P({-1, -1, -1}), P({1, 1, 1}))),
                                  MetricSpace::hilbert_cone(3)};
    for (const auto& s : flat) CHECK(check_axiom4(s, cfg).verdict == AxiomVerdict::Refuted);
}

TEST_CASE("condition B support implies B' support") {
    RefuterConfig cfg;
    cfg.budget = 2000;
    cfg.seed = 3;
    std::vector<MetricSpace> spaces{hdisc(), hellipse(), MetricSpace::poincare_disc()};
    Rng rng = task_rng(17, 0);
    for (const auto& s : spaces) {
        Point xi = s.boundary_point(s.random_direction(rng));
        Point eta = s.project_to_boundary(s.center() - (xi - s.center()));
        auto b = check_condition_B(s, radial_sequence(s, xi), radial_sequence(s, eta), s.center());
        if (b.verdict == AxiomVerdict::SupportedWithinBudget)
            CHECK(check_condition_Bprime(s, cfg).verdict == AxiomVerdict::SupportedWithinBudget);
    }
}

TEST_CASE("condition C examples") {
    auto cone = MetricSpace::hilbert_cone(3);
    auto c = check_condition_C(cone, 100000, 1, 1e-9);
    CHECK(c.verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(c.trials == 100000);
    auto pd = MetricSpace::poincare_disc();
    CHECK(check_condition_C(pd, 100000, 2, 1e-9).verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(check_condition_C(MetricSpace::thompson_cone(3), 20000, 3, 1e-9).verdict == AxiomVerdict::SupportedWithinBudget);
    CHECK(check_condition_C(hsquare(), 20000, 4, 1e-9).verdict == AxiomVerdict::SupportedWithinBudget);

    // s = 0 and s = 1 give an endpoint
    Point x = P({0.2, 0.3, 0.5}), y = P({0.6, 0.1, 0.3}), z = P({0.1, 0.1, 0.8});
    for (double s : {0.0, 1.0}) {
        Point m = s * x + (1 - s) * y;
        CHECK(cone.distance(m, z) <= std::max(cone.distance(x, z), cone.distance(y, z)));
    }
}

TEST_CASE("A3 star check examples") {
    auto sq = hsquare();
    Point w = P({0, 0});
    auto sx = approach_sequence(sq, P({1, -0.5}), P({-1, 0}));
    auto sy = approach_sequence(sq, P({1, 0.5}), P({-1, 0}));
    auto rep = a3star_check(sq, sx, sy, w);
    CHECK(rep.verdict == A3Verdict::Consistent);
    CHECK(rep.min_gap < -10);

    auto d = hdisc();
    check_code([&] { a3star_check(d, radial_sequence(d, P({1, 0})), radial_sequence(d, P({0, 1})), w); },
               ErrorCode::PreconditionNotMet);
    auto same = a3star_check(d, radial_sequence(d, P({1, 0})), radial_sequence(d, P({1, 0})), w);
    CHECK(same.verdict == A3Verdict::Consistent);
    CHECK(same.degenerate);
}
