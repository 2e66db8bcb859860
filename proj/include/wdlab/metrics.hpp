#pragma once

#include "wdlab/geometry.hpp"

#include <complex>
#include <memory>
#include <string>

namespace wdlab {

enum class MetricKind { HilbertBody, HilbertCone, ThompsonCone, PoincareDisc };

const char* to_string(MetricKind k);

// M(x/y) = max x_i / y_i and m(x/y) = min x_i / y_i on the positive orthant
double cone_M(const Point& x, const Point& y);
double cone_m(const Point& x, const Point& y);

class MetricSpace;

// Arclength-parametrized geodesic ray from an interior origin toward a boundary target.
class GeodesicRay {
public:
    Point at(double t) const;
    const Point& origin() const { return origin_; }
    const Point& target() const { return target_; }

private:
    friend class MetricSpace;
    Point origin_;
    Point target_;
    // straight rays: a = origin - s_lo (target - origin) is the far chord end
    double s_lo_ = 0.0;
    bool disc_ = false;
    std::complex<double> disc_dir_{1.0, 0.0};
};

// A domain paired with a metric. Cone kinds use points of R^n on the slice
// {x_i > 0, sum x_i = 1}; the disc uses R^2 identified with C.
class MetricSpace {
public:
    static MetricSpace hilbert_body(ConvexBody body);
    static MetricSpace hilbert_cone(int n);
    static MetricSpace thompson_cone(int n);
    static MetricSpace poincare_disc();

    MetricKind kind() const { return kind_; }
    // coordinates per point
    int dim() const { return dim_; }
    // intrinsic dimension (chart coordinates)
    int chart_dim() const;
    // HilbertBody: the body; disc: the unit disc; cones: the simplex chart
    const ConvexBody& body() const { return *body_; }
    const Point& base_point() const { return base_; }
    MetricSpace with_base(const Point& base) const;
    const Point& center() const { return center_; }
    std::string describe() const;

    bool contains(const Point& x) const;
    bool on_boundary(const Point& x, double eps = tol::boundary) const;
    double boundary_distance(const Point& x) const;
    double exit_param(const Point& x, const Point& v) const;
    // center + exit(center, dir) dir, dir a tangent direction
    Point boundary_point(const Point& dir) const;
    // radial projection from the center onto the boundary
    Point project_to_boundary(const Point& x) const;
    bool segment_in_boundary(const Point& xi, const Point& eta, int samples = 16) const;

    double distance(const Point& x, const Point& y) const;
    bool has_geodesics() const { return kind_ != MetricKind::ThompsonCone; }
    Point geodesic_point(const Point& x, const Point& y, double t) const;
    GeodesicRay ray_toward(const Point& x, const Point& xi) const;

    Point to_chart(const Point& x) const;
    Point from_chart(const Point& u) const;

    // unit vector tangent to the domain
    Point random_direction(Rng& rng) const;
    // center + fraction * exit(center, dir) dir
    Point point_at_depth(const Point& dir, double fraction) const;
    // 70%: radial fraction uniform on [0, 0.98]; 30%: fraction 1 - 2^-k, k uniform on 1..10
    Point sample_interior(Rng& rng) const;
    // fraction 1 - 2^-k, k uniform on 1..10
    Point sample_boundary_biased(Rng& rng) const;

    void check_dim(const Point& x) const;
    void require_interior(const Point& x) const;

private:
    MetricSpace() = default;
    static MetricSpace make_cone(MetricKind kind, int n);
    double cone_distance(const Point& x, const Point& y) const;
    double disc_distance(const Point& x, const Point& y) const;

    MetricKind kind_ = MetricKind::HilbertBody;
    int dim_ = 0;
    std::shared_ptr<const ConvexBody> body_;
    Point base_;
    Point center_;
};

// Hilbert cross-ratio distance on a convex body, without the domain guard
double hilbert_cross_ratio(const ConvexBody& body, const Point& x, const Point& y);

} // namespace wdlab
