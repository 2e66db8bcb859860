#pragma once

#include "wdlab/metrics.hpp"

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wdlab {

// f(x) = A x / sum(A x) on the positive-orthant slice (or its simplex chart)
struct MatrixProjective {
    Matrix A;
};

// f(x) = (B (x,1))_{0..n-1} / (B (x,1))_n on the unit ball; on an ellipsoid the
// map acts through the chart u = Q^{1/2} (x - c)
struct KleinIsometry {
    Matrix B;
};

// f(z) = e^{i theta} (z - a) / (1 - conj(a) z) on the unit disc
struct MobiusDisc {
    std::complex<double> a;
    double theta = 0.0;
};

// f(x) = geodesic_point(x, target, lambda d(x, target))
struct GeodesicPull {
    Point target;
    double lambda = 0.5;
};

// Planar rotation by angle about center. On the Poincare disc this is the
// hyperbolic rotation fixing center; on a planar body it is Euclidean.
struct Rotation {
    double angle = 0.0;
    Point center;
};

struct MapSpec;

// applied left to right: maps[0] first; empty means identity
struct Composition {
    std::vector<MapSpec> maps;
};

struct MapSpec {
    std::variant<MatrixProjective, KleinIsometry, MobiusDisc, GeodesicPull, Rotation, Composition> kind;

    std::string describe() const;
};

MapSpec identity_map();
// boost along the first axis with rapidity s; translation length 2s in the Hilbert metric
MapSpec klein_boost(double s, int dim = 2);
MapSpec matrix_projective(const Matrix& A);
MapSpec mobius(std::complex<double> a, double theta);
MapSpec geodesic_pull(const Point& target, double lambda);
MapSpec rotation(double angle, const Point& center);
MapSpec compose(std::vector<MapSpec> maps);

// throws InvalidMap for malformed parameters
void validate_map(const MapSpec& map);

Point apply_map(const MapSpec& map, const MetricSpace& space, const Point& x);

struct ProbeReport {
    std::size_t trials = 0;
    // pairs that entered the statistic (contractive probe skips near-equal pairs)
    std::size_t counted = 0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    std::optional<std::pair<Point, Point>> witness;
    // contractive probe: every counted pair strictly decreased
    bool strict = false;
};

inline constexpr double nonexpansive_acceptance = 1e-8;

ProbeReport nonexpansive_probe(const MapSpec& map, const MetricSpace& space, std::size_t trials, std::uint64_t seed);
ProbeReport contractive_probe(const MapSpec& map, const MetricSpace& space, std::size_t trials, std::uint64_t seed);

enum class MobiusType { Identity, Elliptic, Parabolic, Hyperbolic };

const char* to_string(MobiusType t);

// roots of conj(a) z^2 + (e^{i theta} - 1) z - e^{i theta} a = 0
std::vector<std::complex<double>> mobius_fixed_points(const MobiusDisc& m);
MobiusType classify_mobius(const MobiusDisc& m);
double mobius_derivative_abs(const MobiusDisc& m, std::complex<double> z);

} // namespace wdlab
