#include "wdlab/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

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

} // namespace

TEST_CASE("distance examples") {
    CHECK(hdisc().distance(P({0, 0}), P({0.5, 0})) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(MetricSpace::hilbert_cone(2).distance(P({0.5, 0.5}), P({0.25, 0.75})) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(MetricSpace::thompson_cone(2).distance(P({0.5, 0.5}), P({0.25, 0.75})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(MetricSpace::poincare_disc().distance(P({0, 0}), P({0.5, 0})) ==
          doctest::Approx(std::atanh(0.5)).epsilon(1e-14));
    for (const auto& s : {hdisc(), hsquare(), MetricSpace::poincare_disc()}) CHECK(s.distance(P({0.1, 0.2}), P({0.1, 0.2})) == 0.0);
}

TEST_CASE("cone_M and cone_m") {
    CHECK(cone_M(P({1, 2}), P({2, 1})) == 2.0);
    CHECK(cone_m(P({1, 2}), P({2, 1})) == 0.5);
    CHECK(cone_M(P({1, 2}), P({1, 2})) == 1.0);
    CHECK(cone_m(P({1, 2}), P({1, 2})) == 1.0);
    CHECK(cone_M(P({2, 2}), P({1, 1})) == 2.0);
    CHECK(cone_m(P({2, 2}), P({1, 1})) == 2.0);
    try {
        cone_M(P({0, 1}), P({1, 1}));
        FAIL("expected NonpositiveCoordinate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonpositiveCoordinate);
    }
}

TEST_CASE("domain errors") {
    try {
        hdisc().distance(P({0, 0}), P({1.2, 0}));
        FAIL("expected PointOutsideDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PointOutsideDomain);
    }
    CHECK_THROWS_AS(MetricSpace::hilbert_cone(3).distance(P({0.5, 0.5, 0.0}), P({0.2, 0.3, 0.5})), Error);
    CHECK_THROWS_AS(MetricSpace::thompson_cone(2).geodesic_point(P({0.5, 0.5}), P({0.25, 0.75}), 0.1), Error);
}

TEST_CASE("agreement with independent oracles") {
    Rng rng(17);
    auto sq = hsquare();
    auto e = hellipse();
    auto pd = MetricSpace::poincare_disc();
    for (int i = 0; i < 2000; ++i) {
        Point x = hdisc().sample_interior(rng), y = hdisc().sample_interior(rng);
        double o = static_cast<double>(oracle::hilbert_ellipse({x[0], x[1]}, {y[0], y[1]}));
        CHECK(hdisc().distance(x, y) == doctest::Approx(o).epsilon(1e-10));
        double op = static_cast<double>(oracle::poincare({x[0], x[1]}, {y[0], y[1]}));
        CHECK(pd.distance(x, y) == doctest::Approx(op).epsilon(1e-10));
        Point u = sq.sample_interior(rng), v = sq.sample_interior(rng);
        double os = static_cast<double>(oracle::hilbert_square({u[0], u[1]}, {v[0], v[1]}));
        CHECK(sq.distance(u, v) == doctest::Approx(os).epsilon(1e-10));
        Point a = e.sample_interior(rng), b = e.sample_interior(rng);
        double oe = static_cast<double>(oracle::hilbert_ellipse({a[0], a[1]}, {b[0], b[1]}, 2, 1));
        CHECK(e.distance(a, b) == doctest::Approx(oe).epsilon(1e-9));
    }
}

TEST_CASE("cross-ratio distance on the simplex equals the cone formula") {
    Rng rng(23);
    for (int n = 2; n <= 6; ++n) {
        auto cone = MetricSpace::hilbert_cone(n);
        auto body = MetricSpace::hilbert_body(ConvexBody::standard_simplex(n - 1));
        for (int i = 0; i < 500; ++i) {
            Point x = cone.sample_interior(rng), y = cone.sample_interior(rng);
            double dc = cone.distance(x, y);
            double db = body.distance(cone.to_chart(x), cone.to_chart(y));
            CHECK(std::abs(dc - db) <= 1e-9);
        }
    }
}

TEST_CASE("metric axioms on random triples") {
    Rng rng(29);
    std::vector<MetricSpace> spaces{hdisc(), hsquare(), hellipse(), MetricSpace::poincare_disc(),
                                    MetricSpace::hilbert_cone(3), MetricSpace::thompson_cone(3),
                                    MetricSpace::hilbert_body(ConvexBody::pball(P({0, 0}), 1.0, 4.0))};
    for (const auto& s : spaces) {
        for (int i = 0; i < 1000; ++i) {
            Point x = s.sample_interior(rng), y = s.sample_interior(rng), z = s.sample_interior(rng);
            double dxy = s.distance(x, y), dyx = s.distance(y, x);
            CHECK(std::abs(dxy - dyx) <= 1e-12 * (1 + dxy));
            CHECK(dxy >= 0);
            CHECK(s.distance(x, z) <= dxy + s.distance(y, z) + 1e-9);
        }
    }
}

TEST_CASE("Hilbert distance is invariant under affine maps of body and points") {
    Rng rng(31);
    Matrix M(2, 2);
    M << 0.7, -1.2, 0.5, 1.1;
    Point t = P({2.0, -0.5});
    for (const auto& body : {ConvexBody::unit_ball(2), ConvexBody::box(P({-1, -2}), P({3, 1}))}) {
        auto s = MetricSpace::hilbert_body(body);
        auto si = MetricSpace::hilbert_body(body.transformed(M, t));
        for (int i = 0; i < 500; ++i) {
            Point x = s.sample_interior(rng), y = s.sample_interior(rng);
            CHECK(std::abs(s.distance(x, y) - si.distance(M * x + t, M * y + t)) <= 1e-8);
        }
    }
}

TEST_CASE("disc doubling identity") {
    Rng rng(37);
    auto pd = MetricSpace::poincare_disc();
    for (int i = 0; i < 1000; ++i) {
        Point x = hdisc().sample_interior(rng);
        Point r = P({x.norm(), 0});
        CHECK(std::abs(hdisc().distance(P({0, 0}), x) - 2 * pd.distance(P({0, 0}), r)) <= 1e-10);
    }
}

TEST_CASE("Thompson is bounded by Hilbert and half-Hilbert") {
    Rng rng(41);
    auto h = MetricSpace::hilbert_cone(4);
    auto t = MetricSpace::thompson_cone(4);
    for (int i = 0; i < 1000; ++i) {
        Point x = h.sample_interior(rng), y = h.sample_interior(rng);
        double dh = h.distance(x, y), dt = t.distance(x, y);
        CHECK(dh <= 2 * dt + 1e-12);
        CHECK(dt <= dh + 1e-12);
        auto xl = std::vector<long double>(x.data(), x.data() + 4);
        auto yl = std::vector<long double>(y.data(), y.data() + 4);
        CHECK(dt == doctest::Approx(static_cast<double>(oracle::cone_thompson(xl, yl))).epsilon(1e-12));
        CHECK(dh == doctest::Approx(static_cast<double>(oracle::cone_hilbert(xl, yl))).epsilon(1e-12));
    }
}

TEST_CASE("geodesic_point examples") {
    auto d = hdisc();
    CHECK((d.geodesic_point(P({0, 0}), P({0.9, 0}), std::log(3.0)) - P({0.5, 0})).norm() < 1e-14);
    for (const auto& s : {hdisc(), MetricSpace::poincare_disc(), hsquare()}) {
        Point x = P({0.1, -0.3}), y = P({-0.4, 0.6});
        CHECK(s.geodesic_point(x, y, 0.0) == x);
        CHECK(s.geodesic_point(x, y, s.distance(x, y)) == y);
        try {
            s.geodesic_point(x, y, s.distance(x, y) + 1.0);
            FAIL("expected ParameterOutOfRange");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ParameterOutOfRange);
        }
    }
}

TEST_CASE("geodesic consistency") {
    Rng rng(43);
    std::vector<MetricSpace> spaces{hdisc(), hsquare(), hellipse(), MetricSpace::poincare_disc(), MetricSpace::hilbert_cone(3),
                                    MetricSpace::hilbert_body(ConvexBody::pball(P({0, 0}), 1.0, 4.0))};
    for (const auto& s : spaces) {
        for (int i = 0; i < 300; ++i) {
            Point x = s.sample_interior(rng), y = s.sample_interior(rng);
            double D = s.distance(x, y);
            double t1 = D * uniform01(rng), t2 = D * uniform01(rng);
            Point a = s.geodesic_point(x, y, t1), b = s.geodesic_point(x, y, t2);
            CHECK(std::abs(s.distance(a, b) - std::abs(t1 - t2)) <= tol::geodesic * (1 + D));
            CHECK(std::abs(s.distance(x, a) - t1) <= tol::geodesic * (1 + D));
        }
    }
}

TEST_CASE("closed-form Hilbert geodesic agrees with bisection on the cone slice") {
    Rng rng(47);
    auto cone = MetricSpace::hilbert_cone(2);
    auto body = MetricSpace::hilbert_body(ConvexBody::standard_simplex(1));
    for (int i = 0; i < 200; ++i) {
        Point x = cone.sample_interior(rng), y = cone.sample_interior(rng);
        double D = cone.distance(x, y);
        double t = D * uniform01(rng);
        Point a = cone.geodesic_point(x, y, t);
        Point b = body.geodesic_point(cone.to_chart(x), cone.to_chart(y), t);
        CHECK(std::abs(a[0] - b[0]) <= 1e-9);
    }
}

TEST_CASE("ray_toward examples") {
    auto d = hdisc();
    auto ray = d.ray_toward(P({0, 0}), P({1, 0}));
    for (double s : {0.1, 0.5, 1.0, 3.0, 10.0}) CHECK((ray.at(2 * s) - P({std::tanh(s), 0})).norm() < 1e-15);
    CHECK(ray.at(0.0) == P({0, 0}));
    double prev = 2.0;
    for (int t = 1; t <= 40; ++t) {
        double gap = (ray.at(t) - P({1, 0})).norm();
        // nonincreasing; far out the points round onto the target itself
        CHECK(gap <= prev);
        prev = gap;
    }
    CHECK_THROWS_AS(d.ray_toward(P({0, 0}), P({0.5, 0})), Error);
}

TEST_CASE("rays are arclength parametrized") {
    Rng rng(53);
    std::vector<MetricSpace> spaces{hdisc(), hsquare(), hellipse(), MetricSpace::poincare_disc(), MetricSpace::hilbert_cone(3)};
    for (const auto& s : spaces) {
        for (int i = 0; i < 100; ++i) {
            Point x = s.sample_interior(rng);
            Point xi = s.boundary_point(s.random_direction(rng));
            auto ray = s.ray_toward(x, xi);
            double t1 = 15 * uniform01(rng), t2 = 15 * uniform01(rng);
            Point a = ray.at(t1), b = ray.at(t2);
            // placing a point at a prescribed depth is limited by coordinate rounding
            double rounding = 2e-15 / std::min(s.boundary_distance(a), s.boundary_distance(b));
            CHECK(std::abs(s.distance(a, b) - std::abs(t1 - t2)) <= 1e-9 + rounding);
        }
    }
}

TEST_CASE("near-boundary points within the guard") {
    auto d = hdisc();
    Point x = P({1.0 - std::ldexp(1.0, -45), 0.0});
    // d(0, x) = log((1 + u)/(1 - u))
    double expect = std::log((2.0 - std::ldexp(1.0, -45)) / std::ldexp(1.0, -45));
    CHECK(d.distance(P({0, 0}), x) == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS(d.distance(P({0, 0}), P({1.0 - 1e-16, 0.0})), Error);
}
