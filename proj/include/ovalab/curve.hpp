#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovalab/core.hpp"
#include "ovalab/interp.hpp"

namespace ovalab {

enum class Frame { unrescaled, renormalized };

// ---------------------------------------------------------------------------
// Quotient curve: a simple polyline in the closed quarter plane {r>=0, y>=0}.
// First node sits on the y-axis, last node on the r-axis. Represents the
// rotationally reduced hypersurface: the r-axis carries multiplicity k-1,
// the y-axis multiplicity n-k.
// ---------------------------------------------------------------------------

struct QuotientCurve {
    std::vector<Vec2> nodes;
    DDouble t{0.0};
    Frame frame = Frame::unrescaled;
    SymmetryClass sym;

    size_t size() const { return nodes.size(); }
};

// Per-node differential data derived from the polyline.
struct CurveGeometry {
    std::vector<Vec2> normal;       // outward unit normal
    std::vector<double> curvature;  // principal curvature, > 0 for convex
};

namespace detail {

// Ghost neighbors implementing the reflection through each axis.
inline Vec2 prev_node(const QuotientCurve& c, size_t i) {
    if (i == 0) return {-c.nodes[1].x, c.nodes[1].y};
    return c.nodes[i - 1];
}

inline Vec2 next_node(const QuotientCurve& c, size_t i) {
    size_t m = c.nodes.size() - 1;
    if (i == m) return {c.nodes[m - 1].x, -c.nodes[m - 1].y};
    return c.nodes[i + 1];
}

}  // namespace detail

// Three-point normal and curvature (Menger circle + quadratic-interpolant
// tangent). Second order on smoothly graded spacing.
inline CurveGeometry curve_geometry(const QuotientCurve& c) {
    const size_t m = c.nodes.size();
    if (m < 3) throw std::invalid_argument("curve_geometry: need >= 3 nodes");
    CurveGeometry g;
    g.normal.resize(m);
    g.curvature.resize(m);
    for (size_t i = 0; i < m; ++i) {
        Vec2 P = c.nodes[i];
        Vec2 a = P - detail::prev_node(c, i);
        Vec2 b = detail::next_node(c, i) - P;
        double la = norm(a), lb = norm(b);
        Vec2 ch = a + b;
        double lch = norm(ch);
        if (la == 0.0 || lb == 0.0 || lch == 0.0)
            throw numerical_error("curve_geometry: coincident nodes at index " + std::to_string(i));
        g.curvature[i] = -2.0 * cross(a, b) / (la * lb * lch);
        Vec2 tnum = (la * la) * b + (lb * lb) * a;
        double lt = norm(tnum);
        if (lt == 0.0) throw numerical_error("curve_geometry: degenerate tangent");
        g.normal[i] = {-tnum.y / lt, tnum.x / lt};
    }
    return g;
}

inline std::vector<double> arclengths(const QuotientCurve& c) {
    std::vector<double> s(c.nodes.size(), 0.0);
    for (size_t i = 1; i < c.nodes.size(); ++i) s[i] = s[i - 1] + norm(c.nodes[i] - c.nodes[i - 1]);
    return s;
}

// Enclosed quarter-plane area of the region bounded by the curve and the axes.
inline double enclosed_area(const QuotientCurve& c) {
    double twice = 0.0;
    // polygon (0,0) -> P0 -> ... -> Pm -> (0,0); axis legs contribute zero
    for (size_t i = 0; i + 1 < c.nodes.size(); ++i) twice += cross(c.nodes[i], c.nodes[i + 1]);
    return 0.5 * std::abs(twice);
}

// Number of sign violations of the turning angle (0 for a convex polyline).
inline int convexity_violations(const QuotientCurve& c, double rel_tol = 1e-12) {
    const size_t m = c.nodes.size();
    int bad = 0;
    double scale = 0.0;
    std::vector<double> turns(m);
    for (size_t i = 0; i < m; ++i) {
        Vec2 a = c.nodes[i] - detail::prev_node(c, i);
        Vec2 b = detail::next_node(c, i) - c.nodes[i];
        turns[i] = cross(a, b);
        scale = std::max(scale, std::abs(turns[i]));
    }
    for (size_t i = 0; i < m; ++i)
        if (turns[i] > rel_tol * scale) ++bad;  // convex here means negative turning
    return bad;
}

inline double spacing_ratio(const QuotientCurve& c) {
    double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
    for (size_t i = 1; i < c.nodes.size(); ++i) {
        double h = norm(c.nodes[i] - c.nodes[i - 1]);
        hmin = std::min(hmin, h);
        hmax = std::max(hmax, h);
    }
    return hmax / hmin;
}

// Structural invariant check; returns a diagnostic or empty string.
inline std::string curve_defect(const QuotientCurve& c, double y_floor = 0.0) {
    const size_t m = c.nodes.size();
    if (m < 16) return "fewer than 16 nodes";
    if (c.nodes.front().x != 0.0) return "first node off the y-axis";
    if (c.nodes.back().y != 0.0) return "last node off the r-axis";
    for (size_t i = 0; i < m; ++i) {
        if (!std::isfinite(c.nodes[i].x) || !std::isfinite(c.nodes[i].y)) return "non-finite node";
        if (i > 0 && i < m - 1) {
            if (c.nodes[i].x <= 0.0) return "interior node with r <= 0";
            if (c.nodes[i].y <= y_floor) return "interior node at or below the y floor";
        }
    }
    for (size_t i = 1; i < m; ++i) {
        if (!(c.nodes[i].x > c.nodes[i - 1].x)) return "r not strictly increasing";
        if (!(c.nodes[i].y < c.nodes[i - 1].y)) return "y not strictly decreasing";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Initial data: quarter-ellipse  r^2/(k l)^2 + y^2 = 2(n-k), discretized at
// approximately uniform arc length. Every node is placed exactly on the
// quadric through the elliptic parametrization.
// ---------------------------------------------------------------------------

inline QuotientCurve init_profile_ellipsoid(double ell, const SymmetryClass& sym, int m) {
    if (!std::isfinite(ell) || ell <= 0.0) throw std::invalid_argument("init_profile_ellipsoid: ell must be finite and > 0");
    if (m < 16) throw std::invalid_argument("init_profile_ellipsoid: need m >= 16 nodes");
    sym.validate();

    const double c = sym.cylinder_radius();
    const double A = sym.k * ell * c;  // r-intercept
    const double B = c;                // y-intercept

    // arc length along (A sin psi, B cos psi), psi in [0, pi/2]
    const int nfine = 40 * m;
    std::vector<double> psi(nfine + 1), s(nfine + 1, 0.0);
    for (int j = 0; j <= nfine; ++j) psi[j] = 0.5 * kPi * j / nfine;
    for (int j = 1; j <= nfine; ++j) {
        double pm = 0.5 * (psi[j - 1] + psi[j]);
        double ds = std::hypot(A * std::cos(pm), B * std::sin(pm)) * (psi[j] - psi[j - 1]);
        s[j] = s[j - 1] + ds;
    }
    QuotientCurve out;
    out.sym = sym;
    out.frame = Frame::unrescaled;
    out.nodes.resize(m + 1);
    for (int i = 0; i <= m; ++i) {
        double target = s.back() * i / m;
        double p = lerp_lookup(s, psi, target);
        out.nodes[i] = {A * std::sin(p), B * std::cos(p)};
    }
    out.nodes.front() = {0.0, B};
    out.nodes.back() = {A, 0.0};
    return out;
}

}  // namespace ovalab
