#include "wdlab/horoball.hpp"

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

const Point xi = P({1, 0});
const Point z0 = P({0, 0});

template <class F>
void check_code(F&& fn, ErrorCode code) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

} // namespace

TEST_CASE("busemann estimate examples") {
    auto d = hdisc();
    auto same = busemann_estimate(d, xi, z0, z0);
    CHECK(same.lo == 0.0);
    CHECK(same.hi == 0.0);
    for (double r : {0.5, 1.0, 2.0}) {
        auto ahead = busemann_estimate(d, xi, z0, P({std::tanh(r / 2), 0}));
        CHECK(std::abs(ahead.lo + r) < 0.01);
        auto behind = busemann_estimate(d, xi, z0, P({-std::tanh(r / 2), 0}));
        CHECK(std::abs(behind.lo - r) < 0.01);
    }
    check_code([&] { busemann_estimate(d, P({0.5, 0}), z0, z0); }, ErrorCode::NotOnBoundary);
    check_code([&] { busemann_estimate(d, xi, z0, P({1, 0})); }, ErrorCode::PointOutsideDomain);
}

TEST_CASE("horoball membership examples") {
    auto d = hdisc();
    CHECK(in_big_horoball(d, xi, z0, 0.0, z0));
    CHECK(in_small_horoball(d, xi, z0, 0.0, z0));
    auto w = horoball_witness(d, xi, z0, 1.0);
    CHECK(in_big_horoball(d, xi, z0, -1.0 + 0.01, w.point));
    CHECK_FALSE(in_big_horoball(d, xi, z0, 0.0, P({-std::tanh(0.5), 0})));
}

TEST_CASE("horoball witness examples") {
    auto d = hdisc();
    for (double r : {1.0, 2.0}) {
        auto w = horoball_witness(d, xi, z0, r);
        CHECK((w.point - P({std::tanh(r / 2), 0})).norm() < 1e-9);
        CHECK(w.verified);
        CHECK(std::abs(w.estimate.lo + r) < 0.01);
    }
    auto w0 = horoball_witness(d, xi, z0, 0.0);
    CHECK(w0.point == z0);
    CHECK(w0.estimate.lo == 0.0);
    check_code([&] { horoball_witness(d, xi, z0, 40.0); }, ErrorCode::ParameterOutOfRange);
    check_code([&] { horoball_witness(d, xi, z0, -1.0); }, ErrorCode::InvalidArgument);

    // off-center pole on the ellipse and on the Poincare disc
    Matrix Q(2, 2);
    Q << 0.25, 0, 0, 1;
    auto e = MetricSpace::hilbert_body(ConvexBody::ellipsoid(P({0, 0}), Q));
    CHECK(horoball_witness(e, P({0, 1}), P({0.5, -0.2}), 3.0).verified);
    auto pd = MetricSpace::poincare_disc();
    Point eta = P({std::cos(0.4), std::sin(0.4)});
    CHECK(horoball_witness(pd, eta, P({-0.2, 0.1}), 2.0).verified);
}

TEST_CASE("invariance check examples") {
    auto d = hdisc();
    HoroballSampler sampler{200, 20000, 11};
    auto rep = invariance_check(klein_boost(0.3), d, xi, z0, 0.0, 10, sampler);
    CHECK(rep.samples == 200);
    CHECK(rep.violations.empty());
    CHECK(rep.checks == 2000);

    auto id = invariance_check(identity_map(), d, xi, z0, -1.0, 3, HoroballSampler{50, 5000, 12});
    CHECK(id.violations.empty());

    check_code([&] { invariance_check(klein_boost(0.3), d, xi, z0, -5.0, 3, HoroballSampler{10, 0, 13}); },
               ErrorCode::NoSamplesFound);
    check_code([&] { invariance_check(klein_boost(0.3), d, xi, z0, -50.0, 3, sampler); }, ErrorCode::NoSamplesFound);
}

TEST_CASE("small horoball lies in the big horoball") {
    auto d = hdisc();
    Rng rng = task_rng(21, 0);
    for (int i = 0; i < 200; ++i) {
        Point y = d.sample_interior(rng);
        auto est = busemann_estimate(d, xi, z0, y);
        CHECK(est.lo <= est.hi);
        for (double r : {-2.0, -0.5, 0.0, 1.0}) {
            bool small = est.hi <= r + horoball_tol;
            bool big = est.lo <= r + horoball_tol;
            if (small) CHECK(big);
        }
    }
}

TEST_CASE("pole shift moves the estimate by at most the pole distance") {
    std::vector<MetricSpace> spaces{hdisc(), MetricSpace::poincare_disc()};
    for (const auto& d : spaces) {
        Rng rng = task_rng(22, 0);
        for (int i = 0; i < 100; ++i) {
            Point y = d.sample_interior(rng);
            Point p = d.point_at_depth(d.random_direction(rng), 0.6 * uniform01(rng));
            Point q = d.point_at_depth(d.random_direction(rng), 0.6 * uniform01(rng));
            auto a = busemann_estimate(d, xi, p, y, {}, z0);
            auto b = busemann_estimate(d, xi, q, y, {}, z0);
            double dpq = d.distance(p, q);
            CHECK(std::abs(a.lo - b.lo) <= dpq + 1e-8);
            CHECK(std::abs(a.hi - b.hi) <= dpq + 1e-8);
        }
    }
}

TEST_CASE("radial limit exists on the chord through the pole") {
    auto d = hdisc();
    for (double x : {-0.9, -0.5, -0.1, 0.0, 0.3, 0.7, 0.95}) {
        auto est = busemann_estimate(d, xi, z0, P({x, 0}));
        CHECK(est.hi - est.lo <= 0.01);
        // the collinear value
        CHECK(std::abs(est.lo + std::log((1 + x) / (1 - x))) <= 0.01);
    }
}

TEST_CASE("big horoballs shrink to the center") {
    std::vector<MetricSpace> spaces{hdisc(), MetricSpace::hilbert_body(ConvexBody::pball(P({0, 0}), 1.0, 4.0))};
    for (const auto& d : spaces) {
        Point c = d.boundary_point(P({1, 0}));
        double prev = std::numeric_limits<double>::infinity();
        for (double r : {-1.0, -2.0, -4.0, -8.0}) {
            auto pts = sample_horoball(d, c, z0, r, HoroballKind::Big, HoroballSampler{20, 2000, 31});
            REQUIRE(!pts.empty());
            double far = 0.0;
            for (const auto& p : pts) far = std::max(far, (p - c).norm());
            CHECK(far < prev);
            prev = far;
        }
        CHECK(prev < 1e-2);
    }
}
