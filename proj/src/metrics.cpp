#include "wdlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wdlab {

namespace {

using cplx = std::complex<double>;

cplx to_c(const Point& p) { return {p[0], p[1]}; }

Point from_c(cplx z) {
    Point p(2);
    p << z.real(), z.imag();
    return p;
}

// 1 - |z|^2 with compensated accumulation
double one_minus_abs2(const Point& z) {
    CompensatedSum s;
    s.add(1.0);
    s.add_product(-z[0], z[0]);
    s.add_product(-z[1], z[1]);
    return s.value();
}

// (z - a) / (1 - conj(a) z)
cplx disc_transport(cplx a, cplx z) { return (z - a) / (1.0 - std::conj(a) * z); }

// inverse of disc_transport
cplx disc_transport_back(cplx a, cplx p) { return (p + a) / (1.0 + std::conj(a) * p); }

} // namespace

const char* to_string(MetricKind k) {
    switch (k) {
    case MetricKind::HilbertBody: return "hilbert_body";
    case MetricKind::HilbertCone: return "hilbert_cone";
    case MetricKind::ThompsonCone: return "thompson_cone";
    case MetricKind::PoincareDisc: return "poincare_disc";
    }
    return "unknown";
}

double cone_M(const Point& x, const Point& y) {
    if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "cone_M operands differ in dimension");
    if ((x.array() <= 0.0).any() || (y.array() <= 0.0).any())
        throw Error(ErrorCode::NonpositiveCoordinate, "cone_M needs strictly positive coordinates");
    return (x.array() / y.array()).maxCoeff();
}

double cone_m(const Point& x, const Point& y) {
    if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "cone_m operands differ in dimension");
    if ((x.array() <= 0.0).any() || (y.array() <= 0.0).any())
        throw Error(ErrorCode::NonpositiveCoordinate, "cone_m needs strictly positive coordinates");
    return (x.array() / y.array()).minCoeff();
}

double hilbert_cross_ratio(const ConvexBody& body, const Point& x, const Point& y) {
    Point d = y - x;
    if (d.norm() == 0.0) return 0.0;
    double s_lo = body.exit_param(x, -d);
    double s_hi = body.exit_param(y, d);
    return std::log1p(1.0 / s_lo) + std::log1p(1.0 / s_hi);
}

Point GeodesicRay::at(double t) const {
    if (!(t >= 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "ray parameter must be nonnegative");
    if (t == 0.0) return origin_;
    if (disc_) {
        cplx a = to_c(origin_);
        double r = std::tanh(t);
        if (r <= 0.5) return from_c(disc_transport_back(a, r * disc_dir_));
        // target - z = u (1 - r)(1 - |a|^2) / ((1 + conj(a) u)(1 + conj(a) r u))
        double em = std::exp(-2.0 * t);
        double one_minus_r = 2.0 * em / (1.0 + em);
        cplx u = disc_dir_;
        cplx gap = u * (one_minus_r * one_minus_abs2(origin_)) /
                   ((1.0 + std::conj(a) * u) * (1.0 + std::conj(a) * (r * u)));
        return target_ - from_c(gap);
    }
    double one_minus = (1.0 + s_lo_) / (1.0 + std::exp(t) * s_lo_);
    return target_ - one_minus * (target_ - origin_);
}

MetricSpace MetricSpace::hilbert_body(ConvexBody body) {
    MetricSpace s;
    s.kind_ = MetricKind::HilbertBody;
    s.dim_ = body.dim();
    s.center_ = body.center();
    s.base_ = s.center_;
    s.body_ = std::make_shared<const ConvexBody>(std::move(body));
    return s;
}

MetricSpace MetricSpace::hilbert_cone(int n) { return make_cone(MetricKind::HilbertCone, n); }
MetricSpace MetricSpace::thompson_cone(int n) { return make_cone(MetricKind::ThompsonCone, n); }

MetricSpace MetricSpace::poincare_disc() {
    MetricSpace s;
    s.kind_ = MetricKind::PoincareDisc;
    s.dim_ = 2;
    s.body_ = std::make_shared<const ConvexBody>(ConvexBody::unit_ball(2));
    s.center_ = Point::Zero(2);
    s.base_ = s.center_;
    return s;
}

MetricSpace MetricSpace::with_base(const Point& base) const {
    require_interior(base);
    MetricSpace s = *this;
    s.base_ = base;
    return s;
}

int MetricSpace::chart_dim() const {
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) return dim_ - 1;
    return dim_;
}

std::string MetricSpace::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    if (kind_ == MetricKind::HilbertBody) os << "(" << body_->describe() << ")";
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) os << "(" << dim_ << ")";
    return os.str();
}

void MetricSpace::check_dim(const Point& x) const {
    if (x.size() != dim_) {
        std::ostringstream os;
        os << "point has dimension " << x.size() << ", space expects " << dim_;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

bool MetricSpace::contains(const Point& x) const {
    check_dim(x);
    if (!x.allFinite()) return false;
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        if ((x.array() <= 0.0).any()) return false;
        return std::abs(x.sum() - 1.0) <= 1e-9;
    }
    return body_->contains(x);
}

bool MetricSpace::on_boundary(const Point& x, double eps) const {
    check_dim(x);
    if (!x.allFinite()) return false;
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        if ((x.array() < -eps).any()) return false;
        if (std::abs(x.sum() - 1.0) > 1e-9) return false;
        return x.minCoeff() <= eps;
    }
    return body_->on_boundary(x, eps);
}

double MetricSpace::boundary_distance(const Point& x) const {
    check_dim(x);
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        if (!contains(x)) return 0.0;
        return x.minCoeff() / std::sqrt((dim_ - 1.0) / dim_);
    }
    return body_->boundary_distance(x);
}

void MetricSpace::require_interior(const Point& x) const {
    check_dim(x);
    if (!contains(x)) throw Error(ErrorCode::PointOutsideDomain, "point is not in the open domain");
    if (boundary_distance(x) < tol::guard)
        throw Error(ErrorCode::PointOutsideDomain, "point is within the near-boundary guard");
}

double MetricSpace::exit_param(const Point& x, const Point& v) const {
    check_dim(x);
    check_dim(v);
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        double s = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i)
            if (v[i] < 0.0) s = std::min(s, std::max(0.0, x[i]) / (-v[i]));
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "direction does not leave the cone slice");
        return s;
    }
    return body_->exit_param(x, v);
}

Point MetricSpace::boundary_point(const Point& dir) const { return center_ + exit_param(center_, dir) * dir; }

Point MetricSpace::project_to_boundary(const Point& x) const {
    Point v = x - center_;
    if (!(v.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot project the center to the boundary");
    return center_ + exit_param(center_, v) * v;
}

bool MetricSpace::segment_in_boundary(const Point& xi, const Point& eta, int samples) const {
    if (kind_ == MetricKind::HilbertBody || kind_ == MetricKind::PoincareDisc)
        return wdlab::segment_in_boundary(*body_, xi, eta, samples);
    if (!on_boundary(xi) || !on_boundary(eta))
        throw Error(ErrorCode::NotOnBoundary, "segment endpoints must lie on the boundary");
    if ((xi - eta).norm() <= tol::degenerate) return true;
    for (int j = 1; j <= samples; ++j) {
        double t = static_cast<double>(j) / (samples + 1);
        if (!on_boundary(xi + t * (eta - xi))) return false;
    }
    return true;
}

double MetricSpace::cone_distance(const Point& x, const Point& y) const {
    double M = cone_M(x, y);
    double m = cone_m(x, y);
    if (kind_ == MetricKind::HilbertCone) return std::log(M / m);
    return std::max(std::log(M), -std::log(m));
}

double MetricSpace::disc_distance(const Point& z, const Point& w) const {
    double az = one_minus_abs2(z);
    double aw = one_minus_abs2(w);
    double d0 = w[0] - z[0], d1 = w[1] - z[1];
    // 1 - conj(w) z = (1 - |w|^2) + conj(w)(w - z)
    double qr = aw + (w[0] * d0 + w[1] * d1);
    double qi = w[0] * d1 - w[1] * d0;
    double q2 = qr * qr + qi * qi;
    double rho = std::sqrt((d0 * d0 + d1 * d1) / q2);
    double one_minus_rho2 = az * aw / q2;
    return std::log1p(rho) - 0.5 * std::log(one_minus_rho2);
}

double MetricSpace::distance(const Point& x, const Point& y) const {
    require_interior(x);
    require_interior(y);
    double sep = (x - y).norm();
    if (sep == 0.0) return 0.0;
    double scale = std::min({1.0, boundary_distance(x), boundary_distance(y)});
    if (sep <= tol::degenerate * scale) return 0.0;
    switch (kind_) {
    case MetricKind::HilbertBody: return hilbert_cross_ratio(*body_, x, y);
    case MetricKind::HilbertCone:
    case MetricKind::ThompsonCone: return cone_distance(x, y);
    case MetricKind::PoincareDisc: return disc_distance(x, y);
    }
    return 0.0;
}

Point MetricSpace::geodesic_point(const Point& x, const Point& y, double t) const {
    if (!has_geodesics()) throw Error(ErrorCode::Unsupported, "no geodesics are offered for the Thompson metric");
    double D = distance(x, y);
    double slack = 1e-9 * (1.0 + D);
    if (t < -slack || t > D + slack) throw Error(ErrorCode::ParameterOutOfRange, "arclength outside [0, d(x,y)]");
    t = std::clamp(t, 0.0, D);
    if (t == 0.0 || D == 0.0) return x;
    if (t == D) return y;
    switch (kind_) {
    case MetricKind::HilbertBody: {
        Point d = y - x;
        double s_lo = body_->exit_param(x, -d);
        double s_hi = body_->exit_param(y, d);
        double et = std::exp(t);
        double denom = 1.0 + s_hi + et * s_lo;
        double tau = s_lo * (1.0 + s_hi) * std::expm1(t) / denom;
        if (tau <= 0.5) return x + tau * d;
        double one_minus = s_lo * s_hi * et * std::expm1(D - t) / denom;
        return y - one_minus * d;
    }
    case MetricKind::HilbertCone: {
        Point d = y - x;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (distance(x, x + mid * d) < t)
                lo = mid;
            else
                hi = mid;
        }
        return x + (0.5 * (lo + hi)) * d;
    }
    case MetricKind::PoincareDisc: {
        cplx a = to_c(x);
        cplx p = disc_transport(a, to_c(y));
        cplx u = p / std::abs(p);
        double r = std::tanh(t);
        if (t <= 0.5 * D) return from_c(disc_transport_back(a, r * u));
        // y - z = u (tanh D - tanh t)(1 - |a|^2) / ((1 + conj(a) p)(1 + conj(a) r u))
        double dr = std::sinh(D - t) / (std::cosh(D) * std::cosh(t));
        cplx gap = u * (dr * one_minus_abs2(x)) / ((1.0 + std::conj(a) * p) * (1.0 + std::conj(a) * (r * u)));
        return y - from_c(gap);
    }
    case MetricKind::ThompsonCone: break;
    }
    throw Error(ErrorCode::Unsupported, "no geodesics for this metric");
}

GeodesicRay MetricSpace::ray_toward(const Point& x, const Point& xi) const {
    if (!has_geodesics()) throw Error(ErrorCode::Unsupported, "no geodesic rays are offered for the Thompson metric");
    require_interior(x);
    if (!on_boundary(xi)) throw Error(ErrorCode::NotOnBoundary, "ray target must lie on the boundary");
    GeodesicRay r;
    r.origin_ = x;
    r.target_ = xi;
    if (kind_ == MetricKind::PoincareDisc) {
        r.disc_ = true;
        cplx p = disc_transport(to_c(x), to_c(xi));
        r.disc_dir_ = p / std::abs(p);
    } else {
        r.s_lo_ = exit_param(x, x - xi);
    }
    return r;
}

Point MetricSpace::to_chart(const Point& x) const {
    check_dim(x);
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) return x.head(dim_ - 1);
    return x;
}

Point MetricSpace::from_chart(const Point& u) const {
    if (u.size() != chart_dim()) throw Error(ErrorCode::DimensionMismatch, "chart point has the wrong dimension");
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        Point x(dim_);
        x.head(dim_ - 1) = u;
        x[dim_ - 1] = 1.0 - u.sum();
        return x;
    }
    return u;
}

Point MetricSpace::random_direction(Rng& rng) const {
    if (kind_ == MetricKind::HilbertCone || kind_ == MetricKind::ThompsonCone) {
        Point v(dim_);
        for (;;) {
            for (int i = 0; i < dim_; ++i) v[i] = normal01(rng);
            v.array() -= v.mean();
            double n = v.norm();
            if (n > 1e-8) return v / n;
        }
    }
    return random_unit(dim_, rng);
}

Point MetricSpace::point_at_depth(const Point& dir, double fraction) const {
    return center_ + (fraction * exit_param(center_, dir)) * dir;
}

Point MetricSpace::sample_interior(Rng& rng) const {
    Point dir = random_direction(rng);
    double u = uniform01(rng);
    double frac;
    if (u < 0.7) {
        frac = 0.98 * uniform01(rng);
    } else {
        int k = std::uniform_int_distribution<int>(1, 10)(rng);
        frac = 1.0 - std::ldexp(1.0, -k);
    }
    return point_at_depth(dir, frac);
}

Point MetricSpace::sample_boundary_biased(Rng& rng) const {
    Point dir = random_direction(rng);
    int k = std::uniform_int_distribution<int>(1, 10)(rng);
    return point_at_depth(dir, 1.0 - std::ldexp(1.0, -k));
}

MetricSpace MetricSpace::make_cone(MetricKind kind, int n) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "cone dimension must be at least 2");
    MetricSpace s;
    s.kind_ = kind;
    s.dim_ = n;
    s.body_ = std::make_shared<const ConvexBody>(ConvexBody::standard_simplex(n - 1));
    s.center_ = Point::Constant(n, 1.0 / n);
    s.base_ = s.center_;
    return s;
}

} // namespace wdlab
