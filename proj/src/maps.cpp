#include "wdlab/maps.hpp"

#include "wdlab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace wdlab {

namespace {

using cplx = std::complex<double>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

cplx to_c(const Point& p) { return {p[0], p[1]}; }

Point from_c(cplx z) {
    Point p(2);
    p << z.real(), z.imag();
    return p;
}

bool is_cone(const MetricSpace& s) {
    return s.kind() == MetricKind::HilbertCone || s.kind() == MetricKind::ThompsonCone;
}

// e^{i theta} (z - a) / (1 - conj(a) z) with 1 - conj(a) z = (1 - |a|^2) + conj(a)(a - z)
cplx mobius_eval(cplx a, double theta, cplx z) {
    CompensatedSum one_minus;
    one_minus.add(1.0);
    one_minus.add_product(-a.real(), a.real());
    one_minus.add_product(-a.imag(), a.imag());
    cplx den = one_minus.value() + std::conj(a) * (a - z);
    return std::polar(1.0, theta) * (z - a) / den;
}

Point apply_one(const MapSpec& map, const MetricSpace& space, const Point& x);

Point apply_matrix(const MatrixProjective& m, const MetricSpace& space, const Point& x) {
    const Matrix& A = m.A;
    if (is_cone(space)) {
        if (A.cols() != space.dim()) throw Error(ErrorCode::IncompatibleMapSpace, "matrix size does not match the cone");
        Point y = A * x;
        if (!((y.array() > 0.0).all()) || !y.allFinite())
            throw Error(ErrorCode::ImageEscapedDomain, "matrix image has a nonpositive coordinate");
        return y / y.sum();
    }
    if (space.kind() == MetricKind::HilbertBody && space.body().is_standard_simplex() && A.cols() == space.dim() + 1) {
        const int n = space.dim();
        CompensatedSum rest;
        rest.add(1.0);
        for (int i = 0; i < n; ++i) rest.add(-x[i]);
        Point X(n + 1);
        X.head(n) = x;
        X[n] = rest.value();
        Point Y = A * X;
        if (!((Y.array() > 0.0).all()) || !Y.allFinite())
            throw Error(ErrorCode::ImageEscapedDomain, "matrix image has a nonpositive coordinate");
        return Y.head(n) / Y.sum();
    }
    throw Error(ErrorCode::IncompatibleMapSpace, "projective matrices act on cone slices or the standard simplex");
}

Point apply_klein(const KleinIsometry& k, const MetricSpace& space, const Point& x) {
    if (space.kind() != MetricKind::HilbertBody || space.body().kind() != BodyKind::Ellipsoid)
        throw Error(ErrorCode::IncompatibleMapSpace, "Klein isometries act on Hilbert ellipsoids");
    const int n = space.dim();
    if (k.B.rows() != n + 1) throw Error(ErrorCode::IncompatibleMapSpace, "Klein matrix size does not match the body");
    const ConvexBody& body = space.body();
    Eigen::LLT<Matrix> llt(body.shape());
    Matrix L = llt.matrixL();
    Point u = L.transpose() * (x - body.center());
    Point h(n + 1);
    h.head(n) = u;
    h[n] = 1.0;
    Point g = k.B * h;
    if (!(g[n] > 0.0)) throw Error(ErrorCode::ImageEscapedDomain, "projective image at infinity");
    Point v = g.head(n) / g[n];
    Point back = L.transpose().triangularView<Eigen::Upper>().solve(v);
    return body.center() + back;
}

Point apply_rotation(const Rotation& r, const MetricSpace& space, const Point& x) {
    if (space.dim() != 2 || is_cone(space)) throw Error(ErrorCode::IncompatibleMapSpace, "rotations act on planar domains");
    if (space.kind() == MetricKind::PoincareDisc) {
        cplx c = to_c(r.center);
        cplx w = (to_c(x) - c) / (1.0 - std::conj(c) * to_c(x));
        w *= std::polar(1.0, r.angle);
        return from_c((w + c) / (1.0 + std::conj(c) * w));
    }
    cplx c = to_c(r.center);
    return from_c(c + std::polar(1.0, r.angle) * (to_c(x) - c));
}

Point apply_one(const MapSpec& map, const MetricSpace& space, const Point& x) {
    return std::visit(
        overloaded{
            [&](const MatrixProjective& m) { return apply_matrix(m, space, x); },
            [&](const KleinIsometry& k) { return apply_klein(k, space, x); },
            [&](const MobiusDisc& m) {
                if (space.kind() != MetricKind::PoincareDisc)
                    throw Error(ErrorCode::IncompatibleMapSpace, "Mobius maps act on the Poincare disc");
                return from_c(mobius_eval(m.a, m.theta, to_c(x)));
            },
            [&](const GeodesicPull& g) {
                if (!space.has_geodesics()) throw Error(ErrorCode::IncompatibleMapSpace, "space offers no geodesics");
                if (x == g.target) return x;
                double d = space.distance(x, g.target);
                return space.geodesic_point(x, g.target, g.lambda * d);
            },
            [&](const Rotation& r) { return apply_rotation(r, space, x); },
            [&](const Composition& c) {
                Point y = x;
                for (const auto& m : c.maps) y = apply_one(m, space, y);
                return y;
            },
        },
        map.kind);
}

} // namespace

std::string MapSpec::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const MatrixProjective& m) { os << "matrix_projective(" << m.A.rows() << "x" << m.A.cols() << ")"; },
                   [&](const KleinIsometry& k) { os << "klein_isometry(" << k.B.rows() << "x" << k.B.cols() << ")"; },
                   [&](const MobiusDisc& m) { os << "mobius(a=" << m.a.real() << "+" << m.a.imag() << "i, theta=" << m.theta << ")"; },
                   [&](const GeodesicPull& g) { os << "geodesic_pull(lambda=" << g.lambda << ")"; },
                   [&](const Rotation& r) { os << "rotation(angle=" << r.angle << ")"; },
                   [&](const Composition& c) {
                       os << "composition[";
                       for (std::size_t i = 0; i < c.maps.size(); ++i) os << (i ? ", " : "") << c.maps[i].describe();
                       os << "]";
                   },
               },
               kind);
    return os.str();
}

MapSpec identity_map() { return MapSpec{Composition{}}; }

MapSpec klein_boost(double s, int dim) {
    Matrix B = Matrix::Identity(dim + 1, dim + 1);
    B(0, 0) = std::cosh(s);
    B(0, dim) = std::sinh(s);
    B(dim, 0) = std::sinh(s);
    B(dim, dim) = std::cosh(s);
    return MapSpec{KleinIsometry{B}};
}

MapSpec matrix_projective(const Matrix& A) { return MapSpec{MatrixProjective{A}}; }
MapSpec mobius(std::complex<double> a, double theta) { return MapSpec{MobiusDisc{a, theta}}; }
MapSpec geodesic_pull(const Point& target, double lambda) { return MapSpec{GeodesicPull{target, lambda}}; }
MapSpec rotation(double angle, const Point& center) { return MapSpec{Rotation{angle, center}}; }
MapSpec compose(std::vector<MapSpec> maps) { return MapSpec{Composition{std::move(maps)}}; }

void validate_map(const MapSpec& map) {
    std::visit(overloaded{
                   [](const MatrixProjective& m) {
                       if (m.A.rows() != m.A.cols() || m.A.rows() < 2)
                           throw Error(ErrorCode::InvalidMap, "projective matrix must be square, size >= 2");
                       if (!m.A.allFinite() || (m.A.array() < 0.0).any())
                           throw Error(ErrorCode::InvalidMap, "projective matrix must be finite and nonnegative");
                       for (Eigen::Index i = 0; i < m.A.rows(); ++i)
                           if (m.A.row(i).maxCoeff() <= 0.0)
                               throw Error(ErrorCode::InvalidMap, "projective matrix has a zero row");
                   },
                   [](const KleinIsometry& k) {
                       const Eigen::Index n = k.B.rows();
                       if (k.B.cols() != n || n < 2 || !k.B.allFinite())
                           throw Error(ErrorCode::InvalidMap, "Klein matrix must be square, finite, size >= 2");
                       Matrix J = Matrix::Identity(n, n);
                       J(n - 1, n - 1) = -1.0;
                       Matrix G = k.B.transpose() * J * k.B;
                       double lambda = -G(n - 1, n - 1);
                       if (!(lambda > 0.0) || (G - lambda * J).norm() > 1e-10 * lambda)
                           throw Error(ErrorCode::InvalidMap, "Klein matrix does not preserve the Lorentz form");
                       if (!(k.B(n - 1, n - 1) > 0.0))
                           throw Error(ErrorCode::InvalidMap, "Klein matrix reverses time orientation");
                   },
                   [](const MobiusDisc& m) {
                       if (!(std::abs(m.a) < 1.0) || !std::isfinite(m.theta))
                           throw Error(ErrorCode::InvalidMap, "Mobius parameter must satisfy |a| < 1");
                   },
                   [](const GeodesicPull& g) {
                       if (!(g.lambda > 0.0 && g.lambda <= 1.0)) throw Error(ErrorCode::InvalidMap, "pull step must lie in (0, 1]");
                       if (!g.target.allFinite()) throw Error(ErrorCode::InvalidMap, "pull target must be finite");
                   },
                   [](const Rotation& r) {
                       if (r.center.size() != 2 || !r.center.allFinite() || !std::isfinite(r.angle))
                           throw Error(ErrorCode::InvalidMap, "rotation needs a finite planar center and angle");
                   },
                   [](const Composition& c) {
                       for (const auto& m : c.maps) validate_map(m);
                   },
               },
               map.kind);
}

Point apply_map(const MapSpec& map, const MetricSpace& space, const Point& x) {
    space.check_dim(x);
    if (!space.contains(x)) throw Error(ErrorCode::PointOutsideDomain, "map argument is not in the open domain");
    Point y = apply_one(map, space, x);
    if (!space.contains(y)) throw Error(ErrorCode::ImageEscapedDomain, "image left the open domain");
    return y;
}

namespace {

struct PairResult {
    Point x, y;
    double dxy = 0.0;
    double diff = 0.0;
};

std::vector<PairResult> probe_pairs(const MapSpec& map, const MetricSpace& space, std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
    validate_map(map);
    std::vector<PairResult> out(trials);
    parallel_for(trials, [&](std::size_t i) {
        Rng rng = task_rng(seed, i);
        PairResult r;
        r.x = space.sample_interior(rng);
        r.y = space.sample_interior(rng);
        r.dxy = space.distance(r.x, r.y);
        r.diff = space.distance(apply_map(map, space, r.x), apply_map(map, space, r.y)) - r.dxy;
        out[i] = std::move(r);
    });
    return out;
}

} // namespace

ProbeReport nonexpansive_probe(const MapSpec& map, const MetricSpace& space, std::size_t trials, std::uint64_t seed) {
    auto pairs = probe_pairs(map, space, trials, seed);
    ProbeReport rep;
    rep.trials = trials;
    for (const auto& p : pairs) {
        ++rep.counted;
        if (p.diff > rep.worst_violation) {
            rep.worst_violation = p.diff;
            rep.witness = std::make_pair(p.x, p.y);
        }
    }
    rep.strict = false;
    return rep;
}

ProbeReport contractive_probe(const MapSpec& map, const MetricSpace& space, std::size_t trials, std::uint64_t seed) {
    auto pairs = probe_pairs(map, space, trials, seed);
    ProbeReport rep;
    rep.trials = trials;
    rep.strict = true;
    for (const auto& p : pairs) {
        if (p.dxy <= 1e-6) continue;
        ++rep.counted;
        if (!(p.diff < -1e-12 * (1.0 + p.dxy))) rep.strict = false;
        if (p.diff > rep.worst_violation) {
            rep.worst_violation = p.diff;
            rep.witness = std::make_pair(p.x, p.y);
        }
    }
    if (rep.counted == 0) rep.strict = false;
    return rep;
}

const char* to_string(MobiusType t) {
    switch (t) {
    case MobiusType::Identity: return "identity";
    case MobiusType::Elliptic: return "elliptic";
    case MobiusType::Parabolic: return "parabolic";
    case MobiusType::Hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

std::vector<std::complex<double>> mobius_fixed_points(const MobiusDisc& m) {
    cplx e = std::polar(1.0, m.theta);
    cplx A = std::conj(m.a), B = e - 1.0, C = -e * m.a;
    if (std::abs(A) == 0.0) {
        if (std::abs(B) == 0.0) return {};
        return {cplx(0.0, 0.0)};
    }
    cplx sq = std::sqrt(B * B - 4.0 * A * C);
    // pick the sign avoiding cancellation
    if (std::real(std::conj(B) * sq) < 0.0) sq = -sq;
    cplx q = -0.5 * (B + sq);
    if (std::abs(q) == 0.0) return {cplx(0.0, 0.0)};
    return {q / A, C / q};
}

MobiusType classify_mobius(const MobiusDisc& m) {
    double c = std::cos(0.5 * m.theta);
    if (std::abs(m.a) == 0.0 && std::abs(std::polar(1.0, m.theta) - 1.0) <= 1e-15) return MobiusType::Identity;
    double t = 4.0 * c * c / (1.0 - std::norm(m.a));
    if (t < 4.0 - 1e-12) return MobiusType::Elliptic;
    if (t > 4.0 + 1e-12) return MobiusType::Hyperbolic;
    return MobiusType::Parabolic;
}

double mobius_derivative_abs(const MobiusDisc& m, std::complex<double> z) {
    return (1.0 - std::norm(m.a)) / std::norm(1.0 - std::conj(m.a) * z);
}

} // namespace wdlab
