#pragma once

#include "wdlab/maps.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace wdlab {

struct Orbit {
    Point start;
    std::vector<Point> points; // x0, f x0, ..., f^N x0
    Point base;
    std::vector<double> dists; // d(points[k], base)
    // the next image came within tol::halt of the boundary (or left the domain) and was dropped
    bool halted_at_boundary = false;

    std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
};

Orbit iterate(const MapSpec& map, const MetricSpace& space, const Point& x0, std::size_t n);
// continues an orbit until it has n_total steps (or halts)
void extend(Orbit& orbit, const MapSpec& map, const MetricSpace& space, std::size_t n_total);

struct Thresholds {
    double R_bound = 50.0;
    double D_escape = 25.0;
    std::size_t warmup = 100;
    std::size_t window = 50;
    std::size_t n_max = 100000;
    // running-max gain per doubling of the step count that counts as sustained growth
    double growth_gain = 0.25;
    // running-max gain per doubling below which a bounded window is accepted
    double stall_gain = 0.05;
    // tail average must be this close (norm) to the boundary for an escape verdict
    double boundary_tail = 1e-3;
    // tail points averaged for the boundary estimate
    std::size_t tail_average = 4;
};

enum class OrbitVerdict { Bounded, Escaping, Undecided };

const char* to_string(OrbitVerdict v);

struct OrbitEvidence {
    std::size_t steps = 0;
    bool halted = false;
    double max_dist = 0.0;
    double final_dist = 0.0;
    double window_max = 0.0;
    double window_min = 0.0;
    // running-max gains over the last three doublings, latest first
    std::array<double, 3> gains{0.0, 0.0, 0.0};
    std::string rule;
};

struct OrbitClassification {
    OrbitVerdict verdict = OrbitVerdict::Undecided;
    double radius = 0.0;      // Bounded: window max of dists
    Point dw_estimate;        // Escaping: boundary estimate
    double residual = 0.0;    // Escaping: boundary residual of dw_estimate
    OrbitEvidence evidence;
};

OrbitClassification classify_orbit(const MetricSpace& space, const Orbit& orbit, const Thresholds& th = {});

struct ClassifiedOrbit {
    Orbit orbit;
    OrbitClassification classification;
};

// doubles the step budget from warmup + window up to n_max; throws UndecidedWithinBudget
ClassifiedOrbit classify_with_budget(const MapSpec& map, const MetricSpace& space, const Point& x0,
                                     const Thresholds& th = {});

// indices of running strict maxima
std::vector<std::size_t> monotone_escape_subsequence(const std::vector<double>& dists);
std::vector<std::size_t> monotone_escape_subsequence(const Orbit& orbit);

// first index breaking "a window beyond warmup with min <= R_bound keeps every later
// dist <= R_bound + 2 step_bound"; step_bound is d(x0, f x0)
std::optional<std::size_t> dichotomy_violation(const Orbit& orbit, const Thresholds& th, double step_bound);

struct DenjoyWolffResult {
    Point xi;
    // max over starts of |f^n(start) - xi|
    double uniformity = 0.0;
    // max over starts of |estimate - xi|
    double spread = 0.0;
    std::vector<Point> per_start;
    std::vector<Point> finals;
    std::vector<std::size_t> steps;
};

DenjoyWolffResult denjoy_wolff_estimate(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                        std::size_t n, double tol, const Thresholds& th = {});

// max over starts of |f^m(start) - xi| at each checkpoint m (halted orbits keep their last point)
std::vector<double> uniformity_profile(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                       const Point& xi, const std::vector<std::size_t>& checkpoints);

struct AttractorSample {
    std::vector<std::optional<Point>> limits; // per start; empty when the tail did not settle
    std::vector<OrbitVerdict> verdicts;
    double eps_acc = 1e-6;
};

AttractorSample attractor_sample(const MapSpec& map, const MetricSpace& space, const std::vector<Point>& starts,
                                 std::size_t n, double eps_acc = 1e-6, std::size_t tail = 5);

enum class HullVerdict { Consistent, CounterexampleFound, NotApplicable };

const char* to_string(HullVerdict v);

struct HullReport {
    HullVerdict verdict = HullVerdict::NotApplicable;
    std::vector<Point> boundary_points;
    std::optional<std::pair<Point, Point>> witness;
};

HullReport hull_boundary_check(const AttractorSample& sample, const MetricSpace& space);

struct AsymptoticCenterResult {
    Point center;
    double radius = 0.0;
    std::size_t evaluated = 0;
    // chart grid spacing after refinement (per axis, max)
    double spacing = 0.0;
};

// minimizes p -> max_j d(p, sequence[j]) over a chart grid around the sequence, then refines once
AsymptoticCenterResult asymptotic_center(const MetricSpace& space, const std::vector<Point>& sequence,
                                         int per_axis = 41);

// orbit tail of the given window length; throws SequenceUnbounded for escaping orbits
AsymptoticCenterResult orbit_asymptotic_center(const MapSpec& map, const MetricSpace& space, const Point& x0,
                                               std::size_t n, std::size_t window, const Thresholds& th = {});

std::vector<Point> box_grid(const MetricSpace& space, const Point& lo, const Point& hi, const std::vector<int>& counts);

} // namespace wdlab
