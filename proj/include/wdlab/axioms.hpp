#pragma once

#include "wdlab/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wdlab {

struct ApproachSequence {
    Point target;
    std::vector<Point> points; // |points[k] - target| strictly decreasing
};

// x_k = xi + 2^-k u for k = 1..k_max, keeping the points that are interior and clear of the guard
ApproachSequence approach_sequence(const MetricSpace& space, const Point& xi, const Point& u, int k_max = 40);
// u = inward unit direction from xi toward the space center
ApproachSequence radial_sequence(const MetricSpace& space, const Point& xi, int k_max = 40);
// throws InvalidArgument unless the sequence is interior and strictly approaches a boundary target
void validate_sequence(const MetricSpace& space, const ApproachSequence& seq);

enum class AxiomVerdict { SupportedWithinBudget, Refuted };

const char* to_string(AxiomVerdict v);

struct AxiomWitness {
    std::uint64_t seed = 0;
    std::size_t trial = 0;
    std::string construction; // "sequence", "same_face", "random_pair", "random_sample"
    Point xi;
    Point eta;
    Point x, y, z; // condition (C) sample
    double s = 0.0;
    int k = 0;            // schedule index where the decision was made
    double value = 0.0;
};

struct AxiomReport {
    std::string axiom;
    AxiomVerdict verdict = AxiomVerdict::SupportedWithinBudget;
    std::size_t trials = 0;
    std::vector<double> levels;
    std::vector<double> levels_crossed;
    // levels not reached because the schedule ran into the precision guard while still growing
    std::vector<double> beyond_precision;
    // ladder checks: smallest final value over sequences; refuters: best statistic found;
    // condition (C): worst excess over the max
    double margin = 0.0;
    std::optional<AxiomWitness> witness;
};

inline const std::vector<double> axiom1_levels{10.0, 20.0, 40.0};
inline const std::vector<double> condition_b_levels{5.0, 10.0, 20.0};
inline const std::vector<double> condition_bprime_levels{5.0, 10.0, 20.0};
inline constexpr double axiom4_bound = 5.0;
inline constexpr double limit_separation = 0.1;
// ladder growth still counted as divergence when the schedule is cut by precision
inline constexpr double ladder_min_gain = 0.1;
inline constexpr int ladder_growth_window = 5;

AxiomReport check_axiom1(const MetricSpace& space, const std::vector<ApproachSequence>& sequences, const Point& w);
AxiomReport check_condition_B(const MetricSpace& space, const ApproachSequence& seq_x, const ApproachSequence& seq_y,
                              const Point& w);

struct RefuterConfig {
    std::size_t budget = 10000; // random pair proposals
    std::uint64_t seed = 1;
    int k_max = 40;
    double separation = limit_separation;
    bool same_face = true;      // deterministic face-pair proposals on polytope charts
    std::size_t min_schedule = 20;
};

AxiomReport check_condition_Bprime(const MetricSpace& space, const RefuterConfig& config);
AxiomReport check_axiom4(const MetricSpace& space, const RefuterConfig& config);

AxiomReport check_condition_C(const MetricSpace& space, std::size_t trials, std::uint64_t seed, double tol = 1e-9);

enum class A3Verdict { Consistent, ContradictionFound };

const char* to_string(A3Verdict v);

struct A3Report {
    A3Verdict verdict = A3Verdict::Consistent;
    double min_gap = 0.0;
    bool degenerate = false; // xi = eta
};

inline constexpr double a3_gap_level = -10.0;

// requires d(x_k, y_k) - d(y_k, w) to fall below -10; throws PreconditionNotMet otherwise
A3Report a3star_check(const MetricSpace& space, const ApproachSequence& seq_x, const ApproachSequence& seq_y,
                      const Point& w);

// boundary pairs on a common face of a polytope chart: the foot of the perpendicular from the
// chart center onto each face, offset by +-h along each face tangent (h half the room available)
std::vector<std::pair<Point, Point>> same_face_pairs(const MetricSpace& space);

} // namespace wdlab
