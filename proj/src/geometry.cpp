#include "wdlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wdlab {

namespace {

// visits every k-subset of {0..m-1} in lexicographic order
template <class Fn>
void for_each_subset(std::size_t m, std::size_t k, Fn&& fn) {
    if (k > m) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

double pow_abs(double u, double p) {
    double a = std::abs(u);
    if (p == 2.0) return a * a;
    if (p == 4.0) {
        double s = a * a;
        return s * s;
    }
    return std::pow(a, p);
}

} // namespace

Point random_unit(int dim, Rng& rng) {
    Point v(dim);
    for (;;) {
        for (int i = 0; i < dim; ++i) v[i] = normal01(rng);
        double n = v.norm();
        if (n > 1e-8) return v / n;
    }
}

void ConvexBody::check_dim(const Point& x) const {
    if (x.size() != dim_) {
        std::ostringstream os;
        os << "point has dimension " << x.size() << ", body has dimension " << dim_;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

ConvexBody ConvexBody::polytope(std::vector<Halfspace> halfspaces) {
    if (halfspaces.empty()) throw Error(ErrorCode::InvalidBody, "polytope needs half-spaces");
    const int n = static_cast<int>(halfspaces.front().normal.size());
    if (n < 1) throw Error(ErrorCode::InvalidBody, "zero-dimensional polytope");
    for (auto& h : halfspaces) {
        if (h.normal.size() != n) throw Error(ErrorCode::DimensionMismatch, "half-space normals differ in dimension");
        if (!h.normal.allFinite() || !std::isfinite(h.offset))
            throw Error(ErrorCode::InvalidBody, "non-finite half-space");
        double len = h.normal.norm();
        if (len == 0.0) throw Error(ErrorCode::InvalidBody, "zero normal");
        h.normal /= len;
        h.offset /= len;
    }
    const std::size_t m = halfspaces.size();
    Matrix A(m, n);
    Eigen::VectorXd b(m);
    for (std::size_t i = 0; i < m; ++i) {
        A.row(i) = halfspaces[i].normal.transpose();
        b[i] = halfspaces[i].offset;
    }

    // bounded iff A has full column rank and no extreme ray of {v : A v <= 0}
    Eigen::FullPivLU<Matrix> lu(A);
    if (lu.rank() < n) throw Error(ErrorCode::InvalidBody, "polytope is unbounded (normals do not span)");
    if (n > 1) {
        bool unbounded = false;
        for_each_subset(m, static_cast<std::size_t>(n - 1), [&](const std::vector<std::size_t>& s) {
            if (unbounded) return;
            Matrix S(n - 1, n);
            for (int r = 0; r < n - 1; ++r) S.row(r) = A.row(s[r]);
            Eigen::FullPivLU<Matrix> slu(S);
            if (slu.rank() != n - 1) return;
            Point v = slu.kernel().col(0);
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd Av = A * (sign * v);
                if ((Av.array() <= 1e-12 * v.norm()).all()) unbounded = true;
            }
        });
        if (unbounded) throw Error(ErrorCode::InvalidBody, "polytope is unbounded");
    } else {
        bool up = false, down = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (A(i, 0) > 0) up = true;
            if (A(i, 0) < 0) down = true;
        }
        if (!(up && down)) throw Error(ErrorCode::InvalidBody, "polytope is unbounded");
    }

    std::vector<Point> vertices;
    for_each_subset(m, static_cast<std::size_t>(n), [&](const std::vector<std::size_t>& s) {
        Matrix S(n, n);
        Eigen::VectorXd r(n);
        for (int k = 0; k < n; ++k) {
            S.row(k) = A.row(s[k]);
            r[k] = b[s[k]];
        }
        Eigen::FullPivLU<Matrix> slu(S);
        if (!slu.isInvertible()) return;
        Point v = slu.solve(r);
        Eigen::VectorXd slack = b - A * v;
        if ((slack.array() < -1e-9 * (1.0 + v.norm())).any()) return;
        for (const auto& w : vertices)
            if ((w - v).norm() <= 1e-12 * (1.0 + v.norm())) return;
        vertices.push_back(v);
    });
    if (vertices.empty()) throw Error(ErrorCode::InvalidBody, "polytope is empty");

    ConvexBody body;
    body.kind_ = BodyKind::Polytope;
    body.dim_ = n;
    body.halfspaces_ = std::move(halfspaces);
    Point c = Point::Zero(n);
    for (const auto& v : vertices) c += v;
    c /= static_cast<double>(vertices.size());
    body.center_ = c;
    if (!(body.residual(c) > 1e-12)) throw Error(ErrorCode::InvalidBody, "polytope has empty interior");
    return body;
}

ConvexBody ConvexBody::box(const Point& lo, const Point& hi) {
    if (lo.size() != hi.size()) throw Error(ErrorCode::DimensionMismatch, "box corners differ in dimension");
    std::vector<Halfspace> hs;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) throw Error(ErrorCode::InvalidBody, "box needs lo < hi in every coordinate");
        Point e = Point::Zero(lo.size());
        e[i] = 1.0;
        hs.push_back({e, hi[i]});
        hs.push_back({-e, -lo[i]});
    }
    return polytope(std::move(hs));
}

ConvexBody ConvexBody::standard_simplex(int dim) {
    if (dim < 1) throw Error(ErrorCode::InvalidBody, "simplex dimension must be positive");
    std::vector<Halfspace> hs;
    for (int i = 0; i < dim; ++i) {
        Point e = Point::Zero(dim);
        e[i] = -1.0;
        hs.push_back({e, 0.0});
    }
    hs.push_back({Point::Ones(dim), 1.0});
    ConvexBody body = polytope(std::move(hs));
    body.standard_simplex_ = true;
    return body;
}

ConvexBody ConvexBody::ellipsoid(const Point& center, const Matrix& shape) {
    const int n = static_cast<int>(center.size());
    if (n < 1) throw Error(ErrorCode::InvalidBody, "zero-dimensional ellipsoid");
    if (shape.rows() != n || shape.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "shape matrix does not match center");
    if (!shape.allFinite() || !center.allFinite()) throw Error(ErrorCode::InvalidBody, "non-finite ellipsoid data");
    if ((shape - shape.transpose()).norm() > 1e-12 * (1.0 + shape.norm()))
        throw Error(ErrorCode::InvalidBody, "shape matrix is not symmetric");
    Matrix Q = 0.5 * (shape + shape.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
    if (es.eigenvalues().minCoeff() <= 0.0) throw Error(ErrorCode::InvalidBody, "shape matrix is not positive-definite");
    ConvexBody body;
    body.kind_ = BodyKind::Ellipsoid;
    body.dim_ = n;
    body.center_ = center;
    body.shape_ = Q;
    body.sqrt_lambda_max_ = std::sqrt(es.eigenvalues().maxCoeff());
    return body;
}

ConvexBody ConvexBody::unit_ball(int dim) { return ellipsoid(Point::Zero(dim), Matrix::Identity(dim, dim)); }

ConvexBody ConvexBody::pball(const Point& center, double radius, double p) {
    if (center.size() < 1) throw Error(ErrorCode::InvalidBody, "zero-dimensional p-ball");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorCode::InvalidBody, "p-ball radius must be positive");
    if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidBody, "p-ball exponent must lie in (1, inf)");
    ConvexBody body;
    body.kind_ = BodyKind::PBall;
    body.dim_ = static_cast<int>(center.size());
    body.center_ = center;
    body.radius_ = radius;
    body.exponent_ = p;
    return body;
}

double ConvexBody::polytope_slack(std::size_t i, const Point& x) const {
    const auto& h = halfspaces_[i];
    CompensatedSum s;
    s.add(h.offset);
    for (int j = 0; j < dim_; ++j) s.add_product(-h.normal[j], x[j]);
    return s.value();
}

double ConvexBody::residual(const Point& x) const {
    check_dim(x);
    switch (kind_) {
    case BodyKind::Polytope: {
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < halfspaces_.size(); ++i) r = std::min(r, polytope_slack(i, x));
        return r;
    }
    case BodyKind::Ellipsoid: {
        Point hi, lo;
        split_difference(x, center_, hi, lo);
        CompensatedSum eta;
        eta.add(1.0);
        for (int i = 0; i < dim_; ++i) {
            CompensatedSum w;
            for (int j = 0; j < dim_; ++j) w.add_product(shape_(i, j), hi[j]);
            eta.add_product(-hi[i], w.hi());
            eta.add(-hi[i] * w.lo());
        }
        eta.add(-2.0 * hi.dot(shape_ * lo));
        return eta.value();
    }
    case BodyKind::PBall: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += pow_abs((x[i] - center_[i]) / radius_, exponent_);
        return 1.0 - s;
    }
    }
    return 0.0;
}

bool ConvexBody::contains(const Point& x) const {
    check_dim(x);
    if (!x.allFinite()) return false;
    return residual(x) > 0.0;
}

bool ConvexBody::on_boundary(const Point& x, double eps) const {
    check_dim(x);
    if (!x.allFinite()) return false;
    return std::abs(residual(x)) <= eps;
}

double ConvexBody::boundary_distance(const Point& x) const {
    double eta = residual(x);
    if (!(eta > 0.0)) return 0.0;
    switch (kind_) {
    case BodyKind::Polytope:
        return eta;
    case BodyKind::Ellipsoid: {
        double g = std::sqrt(std::max(0.0, 1.0 - eta));
        return (eta / (1.0 + g)) / sqrt_lambda_max_;
    }
    case BodyKind::PBall: {
        double one_minus_g = -std::expm1(std::log1p(-eta) / exponent_);
        double c = exponent_ >= 2.0 ? 1.0 : std::pow(static_cast<double>(dim_), 1.0 / exponent_ - 0.5);
        return radius_ * one_minus_g / c;
    }
    }
    return 0.0;
}

double ConvexBody::exit_param(const Point& x, const Point& v) const {
    check_dim(x);
    check_dim(v);
    if (!(v.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero direction");
    switch (kind_) {
    case BodyKind::Polytope: {
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < halfspaces_.size(); ++i) {
            double av = halfspaces_[i].normal.dot(v);
            if (av > 0.0) s = std::min(s, std::max(0.0, polytope_slack(i, x)) / av);
        }
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidBody, "direction does not leave the polytope");
        return s;
    }
    case BodyKind::Ellipsoid: {
        double eta = std::max(0.0, residual(x));
        Point y = x - center_;
        Point Qv = shape_ * v;
        double A = v.dot(Qv);
        double B = 2.0 * y.dot(Qv);
        double sq = std::sqrt(B * B + 4.0 * A * eta);
        if (B >= 0.0) return (B + sq) > 0.0 ? 2.0 * eta / (B + sq) : 0.0;
        return (-B + sq) / (2.0 * A);
    }
    case BodyKind::PBall: {
        const double p = exponent_;
        Point y = (x - center_) / radius_;
        Point w = v / radius_;
        auto phi = [&](double s, double& deriv) {
            double f = -1.0;
            deriv = 0.0;
            for (int i = 0; i < dim_; ++i) {
                double u = y[i] + s * w[i];
                double a = std::abs(u);
                f += pow_abs(u, p);
                if (a > 0.0) deriv += p * pow_abs(u, p - 1.0) * (u > 0 ? w[i] : -w[i]);
            }
            return f;
        };
        double ynorm = 0.0, wnorm = 0.0;
        for (int i = 0; i < dim_; ++i) {
            ynorm += pow_abs(y[i], p);
            wnorm += pow_abs(w[i], p);
        }
        ynorm = std::pow(ynorm, 1.0 / p);
        wnorm = std::pow(wnorm, 1.0 / p);
        double lo = 0.0, hi = (1.0 + ynorm) / wnorm;
        double s = hi;
        for (int it = 0; it < 80; ++it) {
            double d;
            double f = phi(s, d);
            if (f > 0.0)
                hi = s;
            else
                lo = s;
            double next = (d > 0.0) ? s - f / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) <= 2e-16 * std::max(1e-300, s) || hi - lo <= 2e-16 * hi) {
                s = next;
                break;
            }
            s = next;
        }
        return s;
    }
    }
    return 0.0;
}

Point ConvexBody::boundary_point(const Point& dir) const { return center_ + exit_param(center_, dir) * dir; }

Point ConvexBody::project_to_boundary(const Point& x) const {
    check_dim(x);
    Point v = x - center_;
    if (!(v.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot project the center to the boundary");
    return center_ + exit_param(center_, v) * v;
}

ConvexBody ConvexBody::transformed(const Matrix& M, const Point& t) const {
    if (M.rows() != dim_ || M.cols() != dim_ || t.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch, "affine map does not match body dimension");
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) throw Error(ErrorCode::InvalidArgument, "affine map is singular");
    Matrix Minv = lu.inverse();
    switch (kind_) {
    case BodyKind::Polytope: {
        std::vector<Halfspace> hs;
        for (const auto& h : halfspaces_) {
            Point a = Minv.transpose() * h.normal;
            hs.push_back({a, h.offset + a.dot(t)});
        }
        return polytope(std::move(hs));
    }
    case BodyKind::Ellipsoid: {
        Matrix Q = Minv.transpose() * shape_ * Minv;
        Q = 0.5 * (Q + Q.transpose());
        return ellipsoid(M * center_ + t, Q);
    }
    case BodyKind::PBall:
        throw Error(ErrorCode::Unsupported, "affine images of p-balls are not representable");
    }
    throw Error(ErrorCode::Unsupported, "unknown body kind");
}

std::string ConvexBody::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case BodyKind::Polytope:
        os << (standard_simplex_ ? "simplex" : "polytope") << "(dim=" << dim_ << ", faces=" << halfspaces_.size() << ")";
        break;
    case BodyKind::Ellipsoid:
        os << "ellipsoid(dim=" << dim_ << ")";
        break;
    case BodyKind::PBall:
        os << "pball(dim=" << dim_ << ", p=" << exponent_ << ")";
        break;
    }
    return os.str();
}

bool contains(const ConvexBody& body, const Point& x) { return body.contains(x); }

Chord chord_endpoints(const ConvexBody& body, const Point& x, const Point& y) {
    body.check_dim(x);
    body.check_dim(y);
    if (!body.contains(x) || !body.contains(y)) throw Error(ErrorCode::NotInterior, "chord endpoints need interior points");
    Point d = y - x;
    if (d.norm() <= tol::degenerate) throw Error(ErrorCode::DegenerateChord, "points coincide");
    Chord c;
    c.s_lo = body.exit_param(x, -d);
    c.s_hi = body.exit_param(y, d);
    c.a = x - c.s_lo * d;
    c.b = y + c.s_hi * d;
    return c;
}

bool segment_in_boundary(const ConvexBody& body, const Point& xi, const Point& eta, int samples) {
    if (!body.on_boundary(xi) || !body.on_boundary(eta))
        throw Error(ErrorCode::NotOnBoundary, "segment endpoints must lie on the boundary");
    if ((xi - eta).norm() <= tol::degenerate) return true;
    for (int j = 1; j <= samples; ++j) {
        double t = static_cast<double>(j) / (samples + 1);
        Point p = xi + t * (eta - xi);
        if (!body.on_boundary(p)) return false;
    }
    return true;
}

bool ch_membership(const ConvexBody& body, const Point& xi, const Point& x) {
    return segment_in_boundary(body, x, xi);
}

FaceSet active_faces(const ConvexBody& body, const Point& xi, double eps) {
    body.check_dim(xi);
    FaceSet f;
    if (body.kind() != BodyKind::Polytope) return f;
    const auto& hs = body.halfspaces();
    for (std::size_t i = 0; i < hs.size(); ++i) {
        CompensatedSum s;
        s.add(hs[i].offset);
        for (int j = 0; j < body.dim(); ++j) s.add_product(-hs[i].normal[j], xi[j]);
        if (std::abs(s.value()) <= eps) f.active_indices.push_back(i);
    }
    return f;
}

ConvexityProbe strict_convexity_probe(const ConvexBody& body, std::size_t trials, std::uint64_t seed,
                                      double min_separation) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
    ConvexityProbe out;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = task_rng(seed, t);
        Point xi = body.boundary_point(random_unit(body.dim(), rng));
        Point eta = xi;
        for (int attempt = 0; attempt < 64 && (eta - xi).norm() < min_separation; ++attempt)
            eta = body.boundary_point(random_unit(body.dim(), rng));
        out.trials = t + 1;
        if ((eta - xi).norm() < min_separation) continue;
        Point mid = 0.5 * (xi + eta);
        if (body.on_boundary(mid)) {
            out.verdict = ConvexityVerdict::NotStrictlyConvex;
            out.witness = std::make_pair(xi, eta);
            return out;
        }
    }
    return out;
}

} // namespace wdlab
