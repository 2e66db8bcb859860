#include "wdlab/maps.hpp"

#include <doctest.h>

using namespace wdlab;
using cplx = std::complex<double>;

namespace {

Point P(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

MetricSpace hdisc() { return MetricSpace::hilbert_body(ConvexBody::unit_ball(2)); }
MetricSpace hellipse() {
    Matrix Q(2, 2);
    Q << 0.25, 0, 0, 1;
    return MetricSpace::hilbert_body(ConvexBody::ellipsoid(P({0, 0}), Q));
}
Matrix M2(double a, double b, double c, double d) {
    Matrix A(2, 2);
    A << a, b, c, d;
    return A;
}

// Mobius maps as 2x2 complex matrices; composition is matrix product
struct Mob {
    cplx a, b, c, d;
    cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }
    Mob operator*(const Mob& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

Mob as_matrix(cplx a, double theta) {
    cplx e = std::polar(1.0, theta);
    return {e, -e * a, -std::conj(a), 1.0};
}

} // namespace

TEST_CASE("apply_map examples") {
    double s = 0.3;
    CHECK((apply_map(klein_boost(s), hdisc(), P({0, 0})) - P({std::tanh(s), 0})).norm() < 1e-15);
    auto A = M2(2, 1, 0, 1);
    auto cone = MetricSpace::hilbert_cone(2);
    for (double t : {0.1, 0.5, 0.9}) {
        CHECK((apply_map(matrix_projective(A), cone, P({t, 1 - t})) - P({(1 + t) / 2, (1 - t) / 2})).norm() < 1e-15);
        auto simplex = MetricSpace::hilbert_body(ConvexBody::standard_simplex(1));
        CHECK(std::abs(apply_map(matrix_projective(A), simplex, P({t}))[0] - (1 + t) / 2) < 1e-15);
    }
    auto pd = MetricSpace::poincare_disc();
    Point z = P({0.3, -0.4});
    Point r = apply_map(mobius(0.0, 0.7), pd, z);
    cplx expect = std::polar(1.0, 0.7) * cplx(0.3, -0.4);
    CHECK(std::abs(r[0] - expect.real()) < 1e-15);
    CHECK(std::abs(r[1] - expect.imag()) < 1e-15);
    CHECK(apply_map(identity_map(), pd, z) == z);
}

TEST_CASE("map/space compatibility") {
    auto check_code = [](auto&& fn, ErrorCode code) {
        try {
            fn();
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == code);
        }
    };
    check_code([] { apply_map(mobius(0.2, 0.0), hdisc(), P({0, 0})); }, ErrorCode::IncompatibleMapSpace);
    check_code([] { apply_map(klein_boost(0.3), MetricSpace::poincare_disc(), P({0, 0})); }, ErrorCode::IncompatibleMapSpace);
    check_code([] { apply_map(matrix_projective(M2(1, 1, 1, 1)), hdisc(), P({0, 0})); }, ErrorCode::IncompatibleMapSpace);
    check_code([] { validate_map(matrix_projective(M2(1, 1, 0, 0))); }, ErrorCode::InvalidMap);
    check_code([] { validate_map(matrix_projective(M2(1, -1, 0, 1))); }, ErrorCode::InvalidMap);
    check_code([] { validate_map(mobius(cplx(1.0, 0.0), 0.0)); }, ErrorCode::InvalidMap);
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 1) = 0.5;
    check_code([&] { validate_map(MapSpec{KleinIsometry{bad}}); }, ErrorCode::InvalidMap);
    validate_map(klein_boost(0.3));
    validate_map(compose({klein_boost(0.3), rotation(0.4, P({0, 0}))}));
}

TEST_CASE("probe examples") {
    auto boost = nonexpansive_probe(klein_boost(0.3), hdisc(), 10000, 1);
    CHECK(boost.worst_violation <= nonexpansive_acceptance);
    auto pm = nonexpansive_probe(matrix_projective(M2(2, 1, 1, 1)), MetricSpace::hilbert_cone(2), 10000, 2);
    CHECK(pm.worst_violation <= nonexpansive_acceptance);
    CHECK(contractive_probe(matrix_projective(M2(2, 1, 1, 1)), MetricSpace::hilbert_cone(2), 10000, 2).strict);
    auto id = nonexpansive_probe(identity_map(), hdisc(), 1000, 3);
    CHECK(id.worst_violation == 0.0);

    auto pull = contractive_probe(geodesic_pull(P({0, 0}), 0.5), MetricSpace::poincare_disc(), 10000, 4);
    CHECK(pull.strict);
    CHECK(pull.worst_violation <= nonexpansive_acceptance);
    auto iso = contractive_probe(klein_boost(0.3), hdisc(), 1000, 5);
    CHECK_FALSE(iso.strict);
    CHECK(iso.witness.has_value());
    auto idc = contractive_probe(identity_map(), hdisc(), 1000, 6);
    CHECK_FALSE(idc.strict);
}

TEST_CASE("rotations pass the probe") {
    auto rep = nonexpansive_probe(rotation(0.5, P({0.3, 0.0})), MetricSpace::poincare_disc(), 2000, 9);
    CHECK(rep.worst_violation <= nonexpansive_acceptance);
    auto r0 = nonexpansive_probe(rotation(0.5, P({0.0, 0.0})), hdisc(), 2000, 9);
    CHECK(std::abs(r0.worst_violation) <= 1e-8);
}

TEST_CASE("composition of probed maps passes the probe") {
    auto pd = MetricSpace::poincare_disc();
    auto comp = compose({mobius(cplx(-0.5, 0), 0.0), rotation(1.1, P({0.2, 0.1})), geodesic_pull(P({0.1, 0.1}), 0.3)});
    CHECK(nonexpansive_probe(comp, pd, 5000, 8).worst_violation <= nonexpansive_acceptance);
    auto c2 = compose({klein_boost(0.3), rotation(0.7, P({0, 0}))});
    CHECK(nonexpansive_probe(c2, hdisc(), 5000, 8).worst_violation <= nonexpansive_acceptance);
}

TEST_CASE("boost translation length") {
    auto d = hdisc();
    for (double s : {0.1, 0.3, 1.0}) {
        for (double x : {-0.9, -0.3, 0.0, 0.5, 0.99}) {
            Point p = P({x, 0});
            CHECK(std::abs(d.distance(p, apply_map(klein_boost(s), d, p)) - 2 * s) <= 1e-9);
        }
    }
}

TEST_CASE("Klein isometry on the ellipse acts through the ball chart") {
    auto e = hellipse();
    CHECK((apply_map(klein_boost(0.3), e, P({0, 0})) - P({2 * std::tanh(0.3), 0})).norm() < 1e-15);
    CHECK(nonexpansive_probe(klein_boost(0.3), e, 5000, 10).worst_violation <= nonexpansive_acceptance);
}

TEST_CASE("Mobius classification and fixed points") {
    MobiusDisc hyp{cplx(-0.5, 0), 0.0};
    CHECK(classify_mobius(hyp) == MobiusType::Hyperbolic);
    auto fp = mobius_fixed_points(hyp);
    REQUIRE(fp.size() == 2);
    int attracting = 0;
    for (auto z : fp) {
        CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
        double d = mobius_derivative_abs(hyp, z);
        if (d < 1) {
            ++attracting;
            CHECK(std::abs(z - cplx(1, 0)) < 1e-12);
            CHECK(d == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }
    CHECK(attracting == 1);

    MobiusDisc par{cplx(0.5, 0.5), M_PI / 2};
    CHECK(classify_mobius(par) == MobiusType::Parabolic);
    auto pf = mobius_fixed_points(par);
    REQUIRE(pf.size() == 2);
    CHECK(std::abs(pf[0] - pf[1]) < 1e-6);
    CHECK(std::abs(std::abs(pf[0]) - 1.0) < 1e-6);

    MobiusDisc ell{cplx(0.3, 0), 1.0};
    CHECK(classify_mobius(ell) == MobiusType::Elliptic);
    auto ef = mobius_fixed_points(ell);
    int inside = 0;
    for (auto z : ef) inside += std::abs(z) < 1.0;
    CHECK(inside == 1);
    CHECK(classify_mobius(MobiusDisc{cplx(0, 0), 0.0}) == MobiusType::Identity);

    for (auto m : {hyp, par, ell})
        for (auto z : mobius_fixed_points(m)) {
            auto mat = as_matrix(m.a, m.theta);
            CHECK(std::abs(mat(z) - z) < 1e-6);
        }
}

TEST_CASE("iterated Mobius map agrees with matrix powers") {
    auto pd = MetricSpace::poincare_disc();
    for (auto m : {MobiusDisc{cplx(-0.5, 0), 0.0}, MobiusDisc{cplx(0.5, 0.5), M_PI / 2}, MobiusDisc{cplx(0.3, 0), 1.0}}) {
        Mob base = as_matrix(m.a, m.theta);
        Mob power = {1, 0, 0, 1};
        Point z = P({0.1, 0.2});
        for (int k = 1; k <= 20; ++k) {
            z = apply_map(MapSpec{m}, pd, z);
            power = base * power;
            cplx w = power(cplx(0.1, 0.2));
            CHECK(std::abs(cplx(z[0], z[1]) - w) < 1e-9);
        }
    }
}
