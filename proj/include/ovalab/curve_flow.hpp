#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ovalab/core.hpp"
#include "ovalab/curve.hpp"
#include "ovalab/interp.hpp"

namespace ovalab {

// ---------------------------------------------------------------------------
// Forced curve flow in the quarter plane. Inward normal speed of the curve,
//   V = kappa + (k-1)<nu,e_r>/r + (n-k)<nu,e_y>/y,
// equals the mean curvature of the induced hypersurface; the renormalized
// frame adds the dilation term -<x,nu>/2. Axis endpoints evaluate the
// singular quotients by their reflection limits (kappa times multiplicity).
// ---------------------------------------------------------------------------

namespace detail {

// Fused geometry + speed pass writing into caller buffers.
inline void geometry_and_speed(const QuotientCurve& c, std::vector<Vec2>& normal,
                               std::vector<double>& curv, std::vector<double>& V) {
    const size_t m = c.nodes.size() - 1;
    if (m < 2) throw std::invalid_argument("geometry_and_speed: need >= 3 nodes");
    const int k = c.sym.k, nk = c.sym.n - c.sym.k;
    normal.resize(m + 1);
    curv.resize(m + 1);
    V.resize(m + 1);

    double scale = 0.0;
    for (const auto& p : c.nodes) scale = std::max(scale, std::max(std::abs(p.x), std::abs(p.y)));
    const double floor_tol = 1e-13 * scale;

    for (size_t i = 0; i <= m; ++i) {
        const Vec2 P = c.nodes[i];
        if (i > 0 && i < m && (P.y < floor_tol || P.x < floor_tol))
            throw numerical_error("curve flow: interior node within floor tolerance of an axis");
        const Vec2 Pp = (i == 0) ? Vec2{-c.nodes[1].x, c.nodes[1].y} : c.nodes[i - 1];
        const Vec2 Pn = (i == m) ? Vec2{c.nodes[m - 1].x, -c.nodes[m - 1].y} : c.nodes[i + 1];
        const Vec2 a = P - Pp, b = Pn - P;
        const double la2 = a.x * a.x + a.y * a.y, lb2 = b.x * b.x + b.y * b.y;
        const double la = std::sqrt(la2), lb = std::sqrt(lb2);
        const Vec2 ch = a + b;
        const double lch = std::sqrt(ch.x * ch.x + ch.y * ch.y);
        if (la == 0.0 || lb == 0.0 || lch == 0.0)
            throw numerical_error("curve flow: coincident nodes");
        const double kap = -2.0 * cross(a, b) / (la * lb * lch);
        const Vec2 tnum{la2 * b.x + lb2 * a.x, la2 * b.y + lb2 * a.y};
        const double lt = std::sqrt(tnum.x * tnum.x + tnum.y * tnum.y);
        if (lt == 0.0) throw numerical_error("curve flow: degenerate tangent");
        const Vec2 nu{-tnum.y / lt, tnum.x / lt};

        const double r_term = (i == 0) ? (k - 1) * kap : (k - 1) * nu.x / P.x;
        const double y_term = (i == m) ? nk * kap : nk * nu.y / P.y;
        double v = kap + r_term + y_term;
        if (c.frame == Frame::renormalized) v -= 0.5 * (P.x * nu.x + P.y * nu.y);
        if (!std::isfinite(v)) throw numerical_error("curve flow: non-finite speed");
        normal[i] = nu;
        curv[i] = kap;
        V[i] = v;
    }
}

}  // namespace detail

inline std::vector<double> curve_velocity(const QuotientCurve& c, const CurveGeometry& g) {
    std::vector<Vec2> normal;
    std::vector<double> curv, V;
    detail::geometry_and_speed(c, normal, curv, V);
    (void)g;
    return V;
}

inline std::vector<double> curve_velocity(const QuotientCurve& c) {
    std::vector<Vec2> normal;
    std::vector<double> curv, V;
    detail::geometry_and_speed(c, normal, curv, V);
    return V;
}

// Full principal-curvature multiset of the induced hypersurface at node i:
// the curve curvature once, <nu,e_r>/r with multiplicity k-1 and
// <nu,e_y>/y with multiplicity n-k.
inline std::vector<double> principal_curvatures(const QuotientCurve& c, const CurveGeometry& g,
                                                size_t i) {
    const size_t m = c.nodes.size() - 1;
    const int k = c.sym.k, nk = c.sym.n - c.sym.k;
    const Vec2 p = c.nodes[i];
    const Vec2 nu = g.normal[i];
    double kap = g.curvature[i];
    double kr = (i == 0) ? kap : nu.x / p.x;
    double ky = (i == m) ? kap : nu.y / p.y;
    std::vector<double> lam;
    lam.reserve(c.sym.n);
    lam.push_back(kap);
    for (int j = 0; j < k - 1; ++j) lam.push_back(kr);
    for (int j = 0; j < nk; ++j) lam.push_back(ky);
    return lam;
}

// min over nodes of (sum of the k+1 smallest principal curvatures)/H
inline double kconvexity_ratio(const QuotientCurve& c, const CurveGeometry& g) {
    double worst = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        auto lam = principal_curvatures(c, g, i);
        std::sort(lam.begin(), lam.end());
        double H = 0.0;
        for (double l : lam) H += l;
        int take = std::min<int>(c.sym.k + 1, static_cast<int>(lam.size()));
        double partial = 0.0;
        for (int j = 0; j < take; ++j) partial += lam[j];
        if (H > 0.0) worst = std::min(worst, partial / H);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Step policy and node management.
// ---------------------------------------------------------------------------

struct DtPolicy {
    double c_cfl = 0.2;             // dt <= c_cfl * (min spacing)^2
    double alpha_res = 0.08;        // max turning angle per edge (tip refinement)
    double spacing_ratio_max = 2.0; // redistribute when spacing drifts this far off target
    int max_rejections = 40;
    int m_base = 256;               // mid-curve node budget for redistribution
    int check_every = 16;           // steps between redistribution checks
};

inline double stable_dt(const QuotientCurve& c, const DtPolicy& pol) {
    double hmin2 = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < c.nodes.size(); ++i) {
        Vec2 d = c.nodes[i] - c.nodes[i - 1];
        hmin2 = std::min(hmin2, d.x * d.x + d.y * d.y);
    }
    return pol.c_cfl * hmin2;
}

// Curvature-adapted redistribution: spacing min(h_uniform, alpha/kappa),
// realized through a node-density integral and monotone cubic resampling.
inline void redistribute_nodes(QuotientCurve& c, const DtPolicy& pol) {
    const auto g = curve_geometry(c);
    const auto s = arclengths(c);
    const double L = s.back();
    const size_t m = c.nodes.size();
    const double h_max = L / pol.m_base;

    // windowed curvature maximum keeps the density field smooth under noise
    std::vector<double> kv(m);
    for (size_t i = 0; i < m; ++i) {
        double kk = std::abs(g.curvature[i]);
        if (i > 0) kk = std::max(kk, std::abs(g.curvature[i - 1]));
        if (i + 1 < m) kk = std::max(kk, std::abs(g.curvature[i + 1]));
        kv[i] = kk;
    }
    std::vector<double> dens(m);
    for (size_t i = 0; i < m; ++i) dens[i] = std::max(1.0 / h_max, kv[i] / pol.alpha_res);

    std::vector<double> N(m, 0.0);
    for (size_t i = 1; i < m; ++i) N[i] = N[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (s[i] - s[i - 1]);

    int M = std::max(16, static_cast<int>(std::ceil(N.back())));
    std::vector<double> xs(m), rr(m), yy(m);
    for (size_t i = 0; i < m; ++i) {
        xs[i] = s[i];
        rr[i] = c.nodes[i].x;
        yy[i] = c.nodes[i].y;
    }
    Pchip rs(xs, rr), ys(xs, yy);

    std::vector<Vec2> fresh(M + 1);
    fresh[0] = c.nodes.front();
    fresh[M] = c.nodes.back();
    for (int j = 1; j < M; ++j) {
        double target = N.back() * j / M;
        double xi = lerp_lookup(N, s, target);
        fresh[j] = {rs(xi), ys(xi)};
    }
    c.nodes = std::move(fresh);
    c.nodes.front().x = 0.0;
    c.nodes.back().y = 0.0;
}

// Spacing drift is measured against the graded target spacing
// min(h_uniform, alpha/kappa); a rebuild restores the target and the next
// trigger waits for a factor-2 drift.
inline bool needs_redistribution(const QuotientCurve& c, const DtPolicy& pol) {
    auto g = curve_geometry(c);
    auto s = arclengths(c);
    const double h_max = s.back() / pol.m_base;
    for (size_t i = 1; i < c.nodes.size(); ++i) {
        double h = norm(c.nodes[i] - c.nodes[i - 1]);
        double kap = std::max(std::abs(g.curvature[i]), std::abs(g.curvature[i - 1]));
        double ratio = h * std::max(1.0 / h_max, kap / pol.alpha_res);
        if (ratio > pol.spacing_ratio_max || ratio < 1.0 / (3.0 * pol.spacing_ratio_max)) return true;
    }
    return false;
}

namespace detail {

struct StepWorkspace {
    std::vector<Vec2> n1, n2;
    std::vector<double> k1, k2, V1, V2;
    std::vector<Vec2> mid, out;
};

// One explicit two-stage (Heun) step with rejection/halving on invariant
// violation. Returns the dt actually taken.
inline double step_flow_ws(QuotientCurve& c, double dt, const DtPolicy& pol, StepWorkspace& ws,
                           long* rejections) {
    const size_t m = c.nodes.size() - 1;
    geometry_and_speed(c, ws.n1, ws.k1, ws.V1);
    for (int attempt = 0; attempt <= pol.max_rejections; ++attempt) {
        QuotientCurve mid{{}, dd_add(c.t, dt), c.frame, c.sym};
        mid.nodes.resize(m + 1);
        for (size_t i = 0; i <= m; ++i) mid.nodes[i] = c.nodes[i] - (dt * ws.V1[i]) * ws.n1[i];
        mid.nodes.front().x = 0.0;
        mid.nodes.back().y = 0.0;

        bool ok = true;
        ws.out.resize(m + 1);
        try {
            geometry_and_speed(mid, ws.n2, ws.k2, ws.V2);
            for (size_t i = 0; i <= m; ++i)
                ws.out[i] = c.nodes[i] -
                            (0.5 * dt) * (ws.V1[i] * ws.n1[i] + ws.V2[i] * ws.n2[i]);
            ws.out.front().x = 0.0;
            ws.out.back().y = 0.0;
        } catch (const numerical_error&) {
            ok = false;
        }
        if (ok) {
            QuotientCurve cand{ws.out, dd_add(c.t, dt), c.frame, c.sym};
            double scale = 0.0;
            for (const auto& p : cand.nodes)
                scale = std::max(scale, std::max(std::abs(p.x), std::abs(p.y)));
            if (curve_defect(cand, 1e-13 * scale).empty()) {
                c.nodes.swap(cand.nodes);
                c.t = cand.t;
                return dt;
            }
        }
        if (rejections) ++(*rejections);
        dt *= 0.5;
    }
    throw numerical_error("step_flow: step rejected " + std::to_string(pol.max_rejections) +
                          " times, giving up");
}

}  // namespace detail

inline double step_flow(QuotientCurve& c, double dt, const DtPolicy& pol = {},
                        long* rejections = nullptr) {
    detail::StepWorkspace ws;
    return detail::step_flow_ws(c, dt, pol, ws, rejections);
}

// ---------------------------------------------------------------------------
// Trajectory record.
// ---------------------------------------------------------------------------

struct RunSnapshot {
    DDouble t;
    std::vector<Vec2> nodes;
};

struct RunRecord {
    SymmetryClass sym;
    Frame frame = Frame::unrescaled;
    std::vector<RunSnapshot> snapshots;
    DDouble t_ext{0.0};
    double roundness = std::numeric_limits<double>::quiet_NaN();
    long steps = 0;
    long rejections = 0;
    long redistributions = 0;
    bool convexity_lost = false;
    long convexity_loss_step = -1;
    double area0 = 0.0;
    double area_efolds = 0.0;
    std::vector<double> width_series;   // tip abscissa d(t) per snapshot
    std::vector<double> tip_H_series;   // hypersurface mean curvature at the tip
    std::vector<double> kconv_series;   // uniform (k+1)-convexity ratio per snapshot
    std::vector<double> density_series; // Huisken density vs t_ext per snapshot
};

struct RunControl {
    DtPolicy dt;
    double depth_efolds = 12.0;    // stop once log(A0/A) exceeds this
    double snap_defolds = 0.25;    // snapshot cadence in log(A0/A)
    long max_steps = 60'000'000;   // non-termination guard
    int extinction_fit_points = 12;
};

// Huisken density of the induced hypersurface, computed from the curve:
// dmu = |S^{k-1}| |S^{n-k}| r^{k-1} y^{n-k} ds.
inline double radial_huisken_density(const QuotientCurve& c, double remaining) {
    if (remaining <= 0.0) throw std::invalid_argument("radial_huisken_density: need t < t0");
    const int n = c.sym.n, k = c.sym.k;
    const double wk = unit_sphere_area(k - 1), wn = unit_sphere_area(n - k);
    const double pref = std::pow(4.0 * kPi * remaining, -0.5 * n);
    double acc = 0.0;
    for (size_t i = 1; i < c.nodes.size(); ++i) {
        Vec2 a = c.nodes[i - 1], b = c.nodes[i];
        double ds = norm(b - a);
        auto f = [&](Vec2 p) {
            return std::pow(p.x, k - 1) * std::pow(p.y, n - k) *
                   std::exp(-(p.x * p.x + p.y * p.y) / (4.0 * remaining));
        };
        acc += 0.5 * (f(a) + f(b)) * ds;
    }
    return wk * wn * pref * acc;
}

inline double tip_mean_curvature(const QuotientCurve& c, const CurveGeometry& g) {
    size_t m = c.nodes.size() - 1;
    return (c.sym.n - c.sym.k + 1) * g.curvature[m] + (c.sym.k - 1) / c.nodes[m].x;
}

// Run the unrescaled flow until the enclosed area has contracted by the
// requested number of e-folds, then extrapolate the extinction time from the
// near-linear area decay of the last snapshots.
inline RunRecord run_to_extinction(QuotientCurve c, const RunControl& ctl = {}) {
    std::string defect = curve_defect(c);
    if (!defect.empty()) throw std::invalid_argument("run_to_extinction: invalid initial curve: " + defect);
    if (c.frame != Frame::unrescaled)
        throw std::invalid_argument("run_to_extinction: expects the unrescaled frame");

    RunRecord rec;
    rec.sym = c.sym;
    rec.frame = c.frame;
    rec.area0 = enclosed_area(c);

    if (needs_redistribution(c, ctl.dt)) {
        redistribute_nodes(c, ctl.dt);
        ++rec.redistributions;
    }

    auto push_snapshot = [&](const QuotientCurve& q) {
        rec.snapshots.push_back({q.t, q.nodes});
        auto g = curve_geometry(q);
        rec.width_series.push_back(q.nodes.back().x);
        rec.tip_H_series.push_back(tip_mean_curvature(q, g));
        rec.kconv_series.push_back(kconvexity_ratio(q, g));
    };
    push_snapshot(c);

    detail::StepWorkspace ws;
    double next_snap = ctl.snap_defolds;
    bool convex_seen = false;
    long last_check = 0;
    while (true) {
        if (rec.steps >= ctl.max_steps)
            throw numerical_error("run_to_extinction: max step count reached before target depth");
        double dt = stable_dt(c, ctl.dt);
        detail::step_flow_ws(c, dt, ctl.dt, ws, &rec.rejections);
        ++rec.steps;

        bool checkpoint = (rec.steps - last_check) >= ctl.dt.check_every;
        double efolds = std::log(rec.area0 / enclosed_area(c));
        bool snap_due = efolds >= next_snap;
        bool done = efolds >= ctl.depth_efolds;

        if (checkpoint || snap_due || done) {
            last_check = rec.steps;
            int viol = convexity_violations(c, 1e-10);
            if (viol == 0) convex_seen = true;
            if (convex_seen && viol > 0 && !rec.convexity_lost) {
                rec.convexity_lost = true;
                rec.convexity_loss_step = rec.steps;
            }
            if (needs_redistribution(c, ctl.dt)) {
                redistribute_nodes(c, ctl.dt);
                ++rec.redistributions;
            }
        }
        if (snap_due) {
            push_snapshot(c);
            next_snap += ctl.snap_defolds;
        }
        if (done) {
            if (dd_diff(rec.snapshots.back().t, c.t) != 0.0) push_snapshot(c);
            rec.area_efolds = efolds;
            break;
        }
    }

    // extinction time: linear fit of A against t - t_last over the tail
    int nfit = std::min<int>(ctl.extinction_fit_points, static_cast<int>(rec.snapshots.size()));
    const DDouble t_last = rec.snapshots.back().t;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = static_cast<int>(rec.snapshots.size()) - nfit; j < static_cast<int>(rec.snapshots.size()); ++j) {
        QuotientCurve q{rec.snapshots[j].nodes, rec.snapshots[j].t, c.frame, c.sym};
        double x = dd_diff(rec.snapshots[j].t, t_last);
        double y = enclosed_area(q);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
    double icpt = (sy - slope * sx) / nfit;
    if (!(slope < 0.0)) throw numerical_error("run_to_extinction: area decay fit failed");
    rec.t_ext = dd_add(t_last, -icpt / slope);

    // roundness of the last snapshot: max/min node distance to the origin
    // (the centroid of the induced hypersurface by symmetry)
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (const auto& p : rec.snapshots.back().nodes) {
        double d = norm(p);
        rmax = std::max(rmax, d);
        rmin = std::min(rmin, d);
    }
    rec.roundness = rmax / rmin;

    rec.density_series.resize(rec.snapshots.size());
    for (size_t j = 0; j < rec.snapshots.size(); ++j) {
        QuotientCurve q{rec.snapshots[j].nodes, rec.snapshots[j].t, c.frame, c.sym};
        rec.density_series[j] = radial_huisken_density(q, dd_diff(rec.t_ext, rec.snapshots[j].t));
    }
    return rec;
}

}  // namespace ovalab
