#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace wdlab {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

namespace tol {
inline constexpr double interior = 1e-12;
inline constexpr double boundary = 1e-9;
inline constexpr double degenerate = 1e-12;
inline constexpr double geodesic = 1e-10;
inline constexpr double metric = 1e-12;
// distances are refused for points closer than this (in norm) to the boundary
inline constexpr double guard = 1e-15;
// iteration stops once an image is this close to the boundary
inline constexpr double halt = 1e-14;
} // namespace tol

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

// Sum2/Dot2 accumulation: result is as if computed in twice the working precision.
class CompensatedSum {
public:
    void add(double x) {
        double s, e;
        two_sum(hi_, x, s, e);
        hi_ = s;
        lo_ += e;
    }
    void add_product(double a, double b) {
        double p, e;
        two_prod(a, b, p, e);
        add(p);
        lo_ += e;
    }
    double value() const { return hi_ + lo_; }
    double hi() const { return hi_; }
    double lo() const { return lo_; }

private:
    double hi_ = 0.0;
    double lo_ = 0.0;
};

// x - c as an unevaluated sum hi + lo (exact)
inline void split_difference(const Point& x, const Point& c, Point& hi, Point& lo) {
    hi.resize(x.size());
    lo.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double s, e;
        two_sum(x[i], -c[i], s, e);
        hi[i] = s;
        lo[i] = e;
    }
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// per-task seed; independent of scheduling
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng task_rng(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double normal01(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

} // namespace wdlab
