#pragma once

#include "wdlab/errors.hpp"
#include "wdlab/numeric.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wdlab {

enum class BodyKind { Polytope, Ellipsoid, PBall };

struct Halfspace {
    Point normal;  // unit length after construction
    double offset; // interior: normal . x < offset
};

// Bounded open convex domain in R^n.
class ConvexBody {
public:
    static ConvexBody polytope(std::vector<Halfspace> halfspaces);
    static ConvexBody box(const Point& lo, const Point& hi);
    // {x : x_i > 0, sum x_i < 1}; chart of the positive-orthant slice in R^{n+1}
    static ConvexBody standard_simplex(int dim);
    static ConvexBody ellipsoid(const Point& center, const Matrix& shape);
    static ConvexBody unit_ball(int dim);
    static ConvexBody pball(const Point& center, double radius, double p);

    BodyKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool strictly_convex() const { return kind_ != BodyKind::Polytope; }
    bool is_standard_simplex() const { return standard_simplex_; }
    // reference interior point (polytope: vertex centroid)
    const Point& center() const { return center_; }

    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const Matrix& shape() const { return shape_; }
    double radius() const { return radius_; }
    double exponent() const { return exponent_; }

    // Positive inside, zero on the boundary, negative outside. Polytope: min slack
    // b_i - a_i.x; Ellipsoid: 1 - (x-c)^T Q (x-c); PBall: 1 - sum|x_i-c_i|^p / r^p.
    double residual(const Point& x) const;
    bool contains(const Point& x) const;
    bool on_boundary(const Point& x, double eps = tol::boundary) const;
    // lower bound on the Euclidean distance from an interior x to the boundary
    double boundary_distance(const Point& x) const;
    // largest s >= 0 with x + s v in the closure; x interior, v nonzero
    double exit_param(const Point& x, const Point& v) const;
    // boundary point hit by the ray from the center in direction dir
    Point boundary_point(const Point& dir) const;
    // radial projection of x (not the center) onto the boundary, from the center
    Point project_to_boundary(const Point& x) const;

    // image under y = M x + t (M invertible); not available for PBall
    ConvexBody transformed(const Matrix& M, const Point& t) const;

    std::string describe() const;

    void check_dim(const Point& x) const;

private:
    ConvexBody() = default;
    double polytope_slack(std::size_t i, const Point& x) const;

    BodyKind kind_ = BodyKind::Polytope;
    int dim_ = 0;
    Point center_;
    std::vector<Halfspace> halfspaces_;
    Matrix shape_;
    double sqrt_lambda_max_ = 1.0;
    double radius_ = 1.0;
    double exponent_ = 2.0;
    bool standard_simplex_ = false;
};

// Line through x and y meets the boundary at a (behind x) and b (beyond y):
// a = x - s_lo (y - x), b = y + s_hi (y - x).
struct Chord {
    Point a;
    Point b;
    double s_lo = 0.0;
    double s_hi = 0.0;
};

struct FaceSet {
    std::vector<std::size_t> active_indices;
};

bool contains(const ConvexBody& body, const Point& x);

Chord chord_endpoints(const ConvexBody& body, const Point& x, const Point& y);

bool segment_in_boundary(const ConvexBody& body, const Point& xi, const Point& eta, int samples = 16);

bool ch_membership(const ConvexBody& body, const Point& xi, const Point& x);

FaceSet active_faces(const ConvexBody& body, const Point& xi, double eps = tol::boundary);

enum class ConvexityVerdict { NoCounterexampleFound, NotStrictlyConvex };

struct ConvexityProbe {
    ConvexityVerdict verdict = ConvexityVerdict::NoCounterexampleFound;
    std::optional<std::pair<Point, Point>> witness;
    std::size_t trials = 0;
};

// Random boundary pairs (separation at least min_separation) whose midpoint is
// tested for interiority.
ConvexityProbe strict_convexity_probe(const ConvexBody& body, std::size_t trials, std::uint64_t seed,
                                      double min_separation = 0.1);

Point random_unit(int dim, Rng& rng);

} // namespace wdlab
