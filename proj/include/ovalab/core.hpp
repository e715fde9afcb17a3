#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ovalab {

/// Thrown when a solver or a built-in check fails for numerical reasons
/// (as opposed to invalid caller input, which uses std::invalid_argument).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Symmetry class: (n, k) with k rotation-invariant "long" directions.
// ---------------------------------------------------------------------------

struct SymmetryClass {
    int n = 3;  // hypersurface dimension
    int k = 2;  // number of long directions

    SymmetryClass() = default;
    SymmetryClass(int n_, int k_) : n(n_), k(k_) { validate(); }

    void validate() const {
        if (n < 2 || k < 1 || k > n - 1)
            throw std::invalid_argument("SymmetryClass: need 1 <= k <= n-1, n >= 2 (got n=" +
                                        std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }

    // fiber sphere dimension is n-k; the quotient curve's y-axis multiplicity
    int fiber_dim() const { return n - k; }
    // dimension of the revolution model carrying the tip (n+1-k)
    int tip_dim() const { return n + 1 - k; }
    // radius of the stationary cylinder in the renormalized frame
    double cylinder_radius() const { return std::sqrt(2.0 * (n - k)); }
};

// ---------------------------------------------------------------------------
// Plane vectors for the quotient curve.
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// ---------------------------------------------------------------------------
// Compensated (hi+lo) time accumulator. Near extinction the remaining time
// t_ext - t underflows plain double sums; keeping a two-double representation
// preserves the renormalized time -log(t_ext - t) far past tau ~ 36.
// ---------------------------------------------------------------------------

struct DDouble {
    double hi = 0.0;
    double lo = 0.0;

    DDouble() = default;
    DDouble(double v) : hi(v), lo(0.0) {}
    DDouble(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi + lo; }
};

inline DDouble two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DDouble dd_add(DDouble a, double b) {
    DDouble s = two_sum(a.hi, b);
    double lo = a.lo + s.lo;
    DDouble r = two_sum(s.hi, lo);
    return r;
}

inline DDouble dd_add(DDouble a, DDouble b) {
    DDouble s = two_sum(a.hi, b.hi);
    double lo = a.lo + b.lo + s.lo;
    DDouble r = two_sum(s.hi, lo);
    return r;
}

inline DDouble dd_sub(DDouble a, DDouble b) { return dd_add(a, DDouble{-b.hi, -b.lo}); }

// a - b as a plain double, accurate relative to the (possibly tiny) difference
inline double dd_diff(DDouble a, DDouble b) { return dd_sub(a, b).value(); }

// ---------------------------------------------------------------------------
// Area of the unit j-sphere, 2 pi^{(j+1)/2} / Gamma((j+1)/2).
// ---------------------------------------------------------------------------

inline double unit_sphere_area(int j) {
    if (j < 0) throw std::invalid_argument("unit_sphere_area: j >= 0 required");
    const double pi = 3.14159265358979323846;
    return 2.0 * std::pow(pi, 0.5 * (j + 1)) / std::tgamma(0.5 * (j + 1));
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace ovalab
