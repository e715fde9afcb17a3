#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ovalab/core.hpp"
#include "ovalab/interp.hpp"

namespace ovalab {

// ---------------------------------------------------------------------------
// Radial-graph solver for the k=2 quotient of Z2^k x O(n-1)-symmetric convex
// hypersurfaces: a surface r(theta, phi) over the quarter sphere
// (theta, phi) in [0, pi/2]^2, moving with inward normal speed
//   V = H_Sigma + (n-2) <e3, nu> / x3.
// The grid is cell-centered; all four edges are reflection (Neumann) edges,
// so no node ever sits on an axis or the equator and the singular quotient
// <e3,nu>/x3 stays finite.
// ---------------------------------------------------------------------------

struct EllipsoidParams {
    double ell = 2.0;
    double a1 = 0.5;   // point of the 1-simplex; a2 = 1 - a1
    static constexpr double delta_clamp = 0.05;

    EllipsoidParams() = default;
    EllipsoidParams(double ell_, double a1_) : ell(ell_), a1(a1_) {
        if (!std::isfinite(ell) || ell <= 0.0) throw std::invalid_argument("EllipsoidParams: ell > 0 required");
        if (!std::isfinite(a1)) throw std::invalid_argument("EllipsoidParams: a1 must be finite");
        a1 = std::min(1.0 - delta_clamp, std::max(delta_clamp, a1));
    }
    double a2() const { return 1.0 - a1; }
};

struct RadialSurface {
    int N = 64;               // cells per direction
    std::vector<double> r;    // row-major, index j*N + i (i: theta, j: phi)
    DDouble t{0.0};
    SymmetryClass sym{3, 2};

    double h() const { return 0.5 * kPi / N; }
    double theta(int i) const { return (i + 0.5) * h(); }
    double phi(int j) const { return (j + 0.5) * h(); }
    double& at(int i, int j) { return r[static_cast<size_t>(j) * N + i]; }
    double at(int i, int j) const { return r[static_cast<size_t>(j) * N + i]; }

    // even reflection through all four edges
    double ghost(int i, int j) const {
        if (i < 0) i = -1 - i;
        if (i >= N) i = 2 * N - 1 - i;
        if (j < 0) j = -1 - j;
        if (j >= N) j = 2 * N - 1 - j;
        return at(i, j);
    }
};

inline RadialSurface init_quotient_ellipsoid(const EllipsoidParams& p, const SymmetryClass& sym,
                                             int N) {
    if (sym.k != 2) throw std::invalid_argument("init_quotient_ellipsoid: only k=2 is supported");
    if (N < 32) throw std::invalid_argument("init_quotient_ellipsoid: grid >= 32x32 required");
    sym.validate();
    RadialSurface s;
    s.N = N;
    s.sym = sym;
    s.r.resize(static_cast<size_t>(N) * N);
    const double rhs = 2.0 * (sym.n - 2);
    const double q1 = p.a1 * p.a1 / (p.ell * p.ell);
    const double q2 = p.a2() * p.a2() / (p.ell * p.ell);
    for (int j = 0; j < N; ++j) {
        double sp = std::sin(s.phi(j)), cp = std::cos(s.phi(j));
        for (int i = 0; i < N; ++i) {
            double n1 = sp * std::cos(s.theta(i));
            double n2 = sp * std::sin(s.theta(i));
            double n3 = cp;
            double Q = q1 * n1 * n1 + q2 * n2 * n2 + n3 * n3;
            s.at(i, j) = std::sqrt(rhs / Q);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Per-cell geometry of the embedded patch X = r(theta,phi) nhat(theta,phi).
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0, y = 0, z = 0;
};
inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(double c, Vec3 a) { return {c * a.x, c * a.y, c * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct SurfaceCell {
    double H = 0;        // mean curvature of the quotient surface (outward nu)
    double k1 = 0, k2 = 0;  // its principal curvatures
    double fiber = 0;    // <e3,nu>/x3, the fiber principal curvature
    double V = 0;        // inward normal speed of the induced hypersurface
    double graph = 0;    // sqrt(1 + |grad r|^2 / r^2)
    double dA = 0;       // area element |X_theta x X_phi| h^2
    Vec3 nu;             // outward unit normal
    Vec3 X;              // position
    double min_spacing2 = 0;  // squared metric spacing, for the CFL bound
};

inline SurfaceCell surface_cell(const RadialSurface& s, int i, int j) {
    const double h = s.h();
    const double th = s.theta(i), ph = s.phi(j);
    const double st = std::sin(th), ct = std::cos(th);
    const double sp = std::sin(ph), cp = std::cos(ph);

    const double r0 = s.at(i, j);
    const double rE = s.ghost(i + 1, j), rW = s.ghost(i - 1, j);
    const double rN = s.ghost(i, j + 1), rS = s.ghost(i, j - 1);
    const double rNE = s.ghost(i + 1, j + 1), rNW = s.ghost(i - 1, j + 1);
    const double rSE = s.ghost(i + 1, j - 1), rSW = s.ghost(i - 1, j - 1);

    const double r_t = (rE - rW) / (2 * h);
    const double r_p = (rN - rS) / (2 * h);
    const double r_tt = (rE - 2 * r0 + rW) / (h * h);
    const double r_pp = (rN - 2 * r0 + rS) / (h * h);
    const double r_tp = (rNE - rNW - rSE + rSW) / (4 * h * h);

    const Vec3 nh{sp * ct, sp * st, cp};
    const Vec3 nh_t{-sp * st, sp * ct, 0.0};
    const Vec3 nh_p{cp * ct, cp * st, -sp};
    const Vec3 nh_tt{-sp * ct, -sp * st, 0.0};
    const Vec3 nh_pp{-sp * ct, -sp * st, -cp};
    const Vec3 nh_tp{-cp * st, cp * ct, 0.0};

    const Vec3 Xt = r_t * nh + r0 * nh_t;
    const Vec3 Xp = r_p * nh + r0 * nh_p;
    const Vec3 Xtt = r_tt * nh + 2.0 * r_t * nh_t + r0 * nh_tt;
    const Vec3 Xpp = r_pp * nh + 2.0 * r_p * nh_p + r0 * nh_pp;
    const Vec3 Xtp = r_tp * nh + r_t * nh_p + r_p * nh_t + r0 * nh_tp;

    const double E = dot(Xt, Xt), F = dot(Xt, Xp), G = dot(Xp, Xp);
    Vec3 Nv = cross(Xt, Xp);
    double W = std::sqrt(dot(Nv, Nv));
    if (!(W > 0.0)) throw numerical_error("surface_cell: degenerate tangent plane");
    Vec3 nu = (1.0 / W) * Nv;
    if (dot(nu, nh) < 0.0) nu = -1.0 * nu;

    // second fundamental form with outward normal: b_ij = -<X_ij, nu>
    const double b11 = -dot(Xtt, nu), b12 = -dot(Xtp, nu), b22 = -dot(Xpp, nu);
    const double det_g = E * G - F * F;
    const double H = (G * b11 - 2.0 * F * b12 + E * b22) / det_g;
    const double K = (b11 * b22 - b12 * b12) / det_g;
    double disc = std::max(0.0, 0.25 * H * H - K);

    SurfaceCell c;
    c.H = H;
    c.k1 = 0.5 * H - std::sqrt(disc);
    c.k2 = 0.5 * H + std::sqrt(disc);
    c.nu = nu;
    c.X = r0 * nh;
    const double x3 = r0 * cp;  // never zero on the cell-centered grid
    c.fiber = nu.z / x3;
    c.V = H + (s.sym.n - 2) * c.fiber;
    const double grad2 = (r_t / sp) * (r_t / sp) + r_p * r_p;
    c.graph = std::sqrt(1.0 + grad2 / (r0 * r0));
    c.dA = W * h * h;
    c.min_spacing2 = std::min(E, G) * h * h / (c.graph * c.graph);
    return c;
}

// ---------------------------------------------------------------------------
// Zonal (theta) spectral filter near the pole: projects out azimuthal modes
// finer than the local latitude circle can resolve, which lifts the pole
// timestep restriction to the equatorial one.
// ---------------------------------------------------------------------------

class PolarFilter {
  public:
    explicit PolarFilter(int N) : N_(N), cosTab_(static_cast<size_t>(N) * N) {
        for (int m = 0; m < N; ++m)
            for (int i = 0; i < N; ++i)
                cosTab_[static_cast<size_t>(m) * N + i] = std::cos(kPi * m * (i + 0.5) / N);
        row_.resize(N);
        coef_.resize(N);
    }

    // applies to rows with sin(phi_j) < 1; masks modes m > N sin(phi_j)
    void apply(RadialSurface& s) {
        const int N = N_;
        for (int j = 0; j < N; ++j) {
            double sp = std::sin(s.phi(j));
            double m_max = std::max(2.0, N * sp);
            if (m_max >= N - 1) continue;
            for (int i = 0; i < N; ++i) row_[i] = s.at(i, j);
            for (int m = 0; m < N; ++m) {
                double acc = 0.0;
                const double* ct = &cosTab_[static_cast<size_t>(m) * N];
                for (int i = 0; i < N; ++i) acc += row_[i] * ct[i];
                coef_[m] = acc * 2.0 / N;
            }
            for (int m = 0; m < N; ++m) {
                double x = m / m_max;
                double sigma = (x <= 0.75) ? 1.0 : (x >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(kPi * (x - 0.75) / 0.25)));
                coef_[m] *= sigma;
            }
            for (int i = 0; i < N; ++i) {
                double acc = 0.5 * coef_[0];
                for (int m = 1; m < N; ++m) acc += coef_[m] * cosTab_[static_cast<size_t>(m) * N + i];
                s.at(i, j) = acc;
            }
        }
    }

  private:
    int N_;
    std::vector<double> cosTab_, row_, coef_;
};

// ---------------------------------------------------------------------------
// Surface functionals.
// ---------------------------------------------------------------------------

inline double quotient_volume(const RadialSurface& s) {
    double acc = 0.0;
    const double h = s.h();
    for (int j = 0; j < s.N; ++j) {
        double sp = std::sin(s.phi(j));
        for (int i = 0; i < s.N; ++i) {
            double r = s.at(i, j);
            acc += r * r * r / 3.0 * sp;
        }
    }
    return 8.0 * acc * h * h;
}

// Huisken density of the induced hypersurface in R^{n+1} at backward time
// `remaining`, computed on the quotient:
//   dM = |S^{n-2}| x3^{n-2} dSigma over the x3 > 0 half (4 quarter patches).
inline double huisken_density(const RadialSurface& s, double remaining) {
    if (!(remaining > 0.0)) throw std::invalid_argument("huisken_density: need t < t0");
    const int n = s.sym.n;
    const double pref = std::pow(4.0 * kPi * remaining, -0.5 * n);
    const double wfiber = unit_sphere_area(n - 2);
    double acc = 0.0;
    for (int j = 0; j < s.N; ++j)
        for (int i = 0; i < s.N; ++i) {
            SurfaceCell c = surface_cell(s, i, j);
            double x3 = c.X.z;
            double xx = dot(c.X, c.X);
            acc += std::pow(x3, n - 2) * std::exp(-xx / (4.0 * remaining)) * c.dA;
        }
    return 4.0 * wfiber * pref * acc;
}

// Gaussian density of the shrinking j-sphere (closed form).
inline double sphere_entropy(int j) {
    if (j < 1) throw std::invalid_argument("sphere_entropy: j >= 1 required");
    return unit_sphere_area(j) * std::pow(j / (2.0 * kPi), 0.5 * j) * std::exp(-0.5 * j);
}

// Quadratically extrapolated widths (max |x_1|, |x_2|, |x_3|) of the closed
// surface; the maximizers sit on the coordinate axes by symmetry, half a cell
// outside the cell-centered grid.
struct Widths {
    double w1 = 0, w2 = 0, w3 = 0;
};

inline Widths surface_widths(const RadialSurface& s) {
    const int N = s.N;
    auto x1 = [&](int i, int j) { return s.at(i, j) * std::sin(s.phi(j)) * std::cos(s.theta(i)); };
    auto x2 = [&](int i, int j) { return s.at(i, j) * std::sin(s.phi(j)) * std::sin(s.theta(i)); };
    auto x3 = [&](int i, int j) { return s.at(i, j) * std::cos(s.phi(j)); };
    Widths w;
    // x1 axis: corner (theta=0, phi=pi/2) => cells (0, N-1)
    w.w1 = x1(0, N - 1) + (x1(0, N - 1) - x1(1, N - 1)) / 8.0 + (x1(0, N - 1) - x1(0, N - 2)) / 8.0;
    // x2 axis: corner (theta=pi/2, phi=pi/2)
    w.w2 = x2(N - 1, N - 1) + (x2(N - 1, N - 1) - x2(N - 2, N - 1)) / 8.0 +
           (x2(N - 1, N - 1) - x2(N - 1, N - 2)) / 8.0;
    // x3 axis: pole (phi=0), theta-averaged
    double acc = 0.0;
    for (int i = 0; i < N; ++i) acc += x3(i, 0) + (x3(i, 0) - x3(i, 1)) / 8.0;
    w.w3 = acc / N;
    return w;
}

// ---------------------------------------------------------------------------
// Time stepping.
// ---------------------------------------------------------------------------

struct AnisoControl {
    double c_cfl = 0.2;
    double depth_efolds = 10.0;   // in log of V^{2/3}
    double snap_defolds = 0.06;
    std::optional<double> t_stop; // optional fixed-time stop rule
    long max_steps = 30'000'000;
    int max_rejections = 40;
    int extinction_fit_points = 12;
};

struct AnisoSnapshot {
    DDouble t;
    std::vector<double> r;
};

struct AnisoRun {
    SymmetryClass sym;
    int N = 0;
    EllipsoidParams params;
    std::vector<AnisoSnapshot> snapshots;
    DDouble t_ext{0.0};
    long steps = 0;
    long rejections = 0;
    bool convexity_lost = false;
    double v23_efolds = 0.0;
    bool reached_extinction = true;  // false when a t_stop rule ended the run
    std::vector<double> density_series;   // vs t_ext, filled post-run
    std::vector<double> kconv_series;     // uniform (k+1)-convexity ratio
    std::vector<Widths> width_series;
};

namespace detail {

struct AnisoRhs {
    std::vector<double> rdot;
    double dt_limit = 0.0;
    double min_kconv = 0.0;
    bool convex = true;
};

inline void aniso_rhs(const RadialSurface& s, AnisoRhs& out, bool want_monitors) {
    const int N = s.N;
    out.rdot.resize(static_cast<size_t>(N) * N);
    double dtl = std::numeric_limits<double>::infinity();
    double kmin = std::numeric_limits<double>::infinity();
    bool convex = true;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            SurfaceCell c = surface_cell(s, i, j);
            out.rdot[static_cast<size_t>(j) * N + i] = -c.V * c.graph;
            dtl = std::min(dtl, c.min_spacing2);
            if (want_monitors) {
                double lam[3] = {c.k1, c.k2, c.fiber};
                std::sort(lam, lam + 3);
                double Hm = c.k1 + c.k2 + (s.sym.n - 2) * c.fiber;
                int take = std::min(3, s.sym.n);  // k+1 = 3 smallest of {k1,k2,fiber x (n-2)}
                double partial = 0.0;
                int got = 0;
                // expand multiplicities in sorted order
                std::vector<double> full;
                full.push_back(c.k1);
                full.push_back(c.k2);
                for (int q = 0; q < s.sym.n - 2; ++q) full.push_back(c.fiber);
                std::sort(full.begin(), full.end());
                for (int q = 0; q < take && q < static_cast<int>(full.size()); ++q, ++got)
                    partial += full[q];
                if (Hm > 0) kmin = std::min(kmin, partial / Hm);
                if (c.k1 <= 0 || c.fiber <= 0) convex = false;
            }
        }
    out.dt_limit = dtl;
    out.min_kconv = kmin;
    out.convex = convex;
}

}  // namespace detail

// Heun step with rejection; filter applied after each stage. k1 must hold
// the rhs already evaluated at s (the caller needs it for the CFL bound).
inline double aniso_step(RadialSurface& s, double dt, const AnisoControl& ctl, PolarFilter& filt,
                         detail::AnisoRhs& k1, detail::AnisoRhs& k2, long* rejections) {
    const int N = s.N;
    for (int attempt = 0; attempt <= ctl.max_rejections; ++attempt) {
        RadialSurface mid = s;
        bool ok = true;
        for (size_t q = 0; q < s.r.size(); ++q) {
            mid.r[q] = s.r[q] + dt * k1.rdot[q];
            if (!(mid.r[q] > 0.0) || !std::isfinite(mid.r[q])) ok = false;
        }
        if (ok) {
            filt.apply(mid);
            try {
                detail::aniso_rhs(mid, k2, false);
                RadialSurface out = s;
                for (size_t q = 0; q < s.r.size(); ++q) {
                    out.r[q] = s.r[q] + 0.5 * dt * (k1.rdot[q] + k2.rdot[q]);
                    if (!(out.r[q] > 0.0) || !std::isfinite(out.r[q])) ok = false;
                }
                if (ok) {
                    filt.apply(out);
                    out.t = dd_add(s.t, dt);
                    s = std::move(out);
                    return dt;
                }
            } catch (const numerical_error&) {
                ok = false;
            }
        }
        if (rejections) ++(*rejections);
        dt *= 0.5;
        (void)N;
    }
    throw numerical_error("aniso_step: step rejected too many times");
}

inline AnisoRun run_aniso(RadialSurface s, const AnisoControl& ctl = {}) {
    if (s.sym.k != 2) throw std::invalid_argument("run_aniso: only k=2 is supported");
    for (double v : s.r)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("run_aniso: invalid surface");

    AnisoRun rec;
    rec.sym = s.sym;
    rec.N = s.N;
    PolarFilter filt(s.N);
    filt.apply(s);  // project initial data onto the resolvable basis
    const double V0 = quotient_volume(s);

    detail::AnisoRhs k1, k2, mon;
    auto push_snapshot = [&](const RadialSurface& q) {
        rec.snapshots.push_back({q.t, q.r});
        detail::aniso_rhs(q, mon, true);
        rec.kconv_series.push_back(mon.min_kconv);
        if (!mon.convex) rec.convexity_lost = true;
        rec.width_series.push_back(surface_widths(q));
    };
    push_snapshot(s);

    double next_snap = ctl.snap_defolds;
    while (true) {
        if (rec.steps >= ctl.max_steps)
            throw numerical_error("run_aniso: max step count reached before the stop rule");
        detail::aniso_rhs(s, k1, false);
        double dt = ctl.c_cfl * k1.dt_limit;
        if (ctl.t_stop) {
            double left = dd_diff(DDouble{*ctl.t_stop}, s.t);
            if (left <= 0.0) {
                rec.reached_extinction = false;
                break;
            }
            dt = std::min(dt, left);
        }
        aniso_step(s, dt, ctl, filt, k1, k2, &rec.rejections);
        ++rec.steps;

        double efolds = (2.0 / 3.0) * std::log(V0 / quotient_volume(s));
        if (efolds >= next_snap) {
            push_snapshot(s);
            next_snap += ctl.snap_defolds;
        }
        if (efolds >= ctl.depth_efolds) {
            if (dd_diff(rec.snapshots.back().t, s.t) != 0.0) push_snapshot(s);
            rec.v23_efolds = efolds;
            break;
        }
    }

    if (rec.reached_extinction) {
        // extinction time via a linear fit of V^{2/3} over the tail snapshots
        int nfit = std::min<int>(ctl.extinction_fit_points, static_cast<int>(rec.snapshots.size()));
        const DDouble t_last = rec.snapshots.back().t;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int q = static_cast<int>(rec.snapshots.size()) - nfit;
             q < static_cast<int>(rec.snapshots.size()); ++q) {
            RadialSurface tmp;
            tmp.N = s.N;
            tmp.sym = s.sym;
            tmp.r = rec.snapshots[q].r;
            double x = dd_diff(rec.snapshots[q].t, t_last);
            double y = std::pow(quotient_volume(tmp), 2.0 / 3.0);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double slope = (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
        double icpt = (sy - slope * sx) / nfit;
        if (!(slope < 0.0)) throw numerical_error("run_aniso: volume decay fit failed");
        rec.t_ext = dd_add(t_last, -icpt / slope);

        rec.density_series.resize(rec.snapshots.size());
        for (size_t q = 0; q < rec.snapshots.size(); ++q) {
            RadialSurface tmp;
            tmp.N = s.N;
            tmp.sym = s.sym;
            tmp.r = rec.snapshots[q].r;
            rec.density_series[q] = huisken_density(tmp, dd_diff(rec.t_ext, rec.snapshots[q].t));
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Entropy normalization and the reciprocal width ratio.
// ---------------------------------------------------------------------------

struct NormalizedRun {
    double t_ext = 0;
    double t_prime = 0;
    double lambda = 0;
    double w1 = 0, w2 = 0;  // widths of the normalized flow at time -1
    double mu1 = 0, mu2 = 0;
    double density_min = 0, density_max = 0;
};

inline std::pair<double, double> width_ratio(double w1, double w2) {
    if (!(w1 > 0.0) || !(w2 > 0.0)) throw std::invalid_argument("width_ratio: widths must be positive");
    double i1 = 1.0 / w1, i2 = 1.0 / w2;
    return {i1 / (i1 + i2), i2 / (i1 + i2)};
}

// Locate t' with Theta(t') = (sigma_{n-k} + sigma_{n-k+1})/2 by monotone
// bisection over the snapshot density series, then rescale so that t' maps
// to time -1.
inline NormalizedRun normalize_run(const AnisoRun& rec) {
    if (!rec.reached_extinction)
        throw std::invalid_argument("normalize_run: run did not reach extinction");
    const int n = rec.sym.n, k = rec.sym.k;
    const double target = 0.5 * (sphere_entropy(n - k) + sphere_entropy(n - k + 1));

    double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
    for (double d : rec.density_series) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    // skip the last snapshots where the heat-kernel scale is under-resolved:
    // find the bracketing pair scanning from the start
    size_t lo = rec.density_series.size();
    for (size_t q = 1; q < rec.density_series.size(); ++q) {
        if ((rec.density_series[q - 1] - target) * (rec.density_series[q] - target) <= 0.0) {
            lo = q;
            break;
        }
    }
    if (lo == rec.density_series.size())
        throw numerical_error("normalize_run: density target " + std::to_string(target) +
                              " outside achieved range [" + std::to_string(dmin) + ", " +
                              std::to_string(dmax) + "] (ell outside the workable window)");

    // interpolate in tau = -log(t_ext - t)
    auto tau_of = [&](size_t q) { return -std::log(dd_diff(rec.t_ext, rec.snapshots[q].t)); };
    double ta = tau_of(lo - 1), tb = tau_of(lo);
    double da = rec.density_series[lo - 1], db = rec.density_series[lo];
    double w = (da == db) ? 0.5 : (da - target) / (da - db);
    double tau_p = ta + w * (tb - ta);
    double remaining_p = std::exp(-tau_p);

    NormalizedRun out;
    out.t_ext = rec.t_ext.value();
    out.t_prime = out.t_ext - remaining_p;
    out.lambda = 1.0 / std::sqrt(remaining_p);
    out.density_min = dmin;
    out.density_max = dmax;

    // widths at t', interpolated between the bracketing snapshots in tau
    double w1a = rec.width_series[lo - 1].w1, w1b = rec.width_series[lo].w1;
    double w2a = rec.width_series[lo - 1].w2, w2b = rec.width_series[lo].w2;
    out.w1 = out.lambda * (w1a + w * (w1b - w1a));
    out.w2 = out.lambda * (w2a + w * (w2b - w2a));
    auto mu = width_ratio(out.w1, out.w2);
    out.mu1 = mu.first;
    out.mu2 = mu.second;
    return out;
}

// ---------------------------------------------------------------------------
// Root solve for the reciprocal width ratio map a1 -> mu1.
// ---------------------------------------------------------------------------

struct RatioSearchConfig {
    double a_min = EllipsoidParams::delta_clamp;
    double a_max = 1.0 - EllipsoidParams::delta_clamp;
    double tol_ratio = 0.01;
    int max_evals = 24;
    int grid_fallback = 7;  // coarse scan size when the monotone bracket fails
};

struct RatioSolveResult {
    double a1 = 0;
    double mu1 = 0;
    int evals = 0;
    std::vector<std::pair<double, double>> history;  // (a1, mu1)
};

template <typename EvalFn>
RatioSolveResult solve_for_ratio(double target_mu1, EvalFn eval, const RatioSearchConfig& cfg = {}) {
    RatioSolveResult res;
    auto F = [&](double a) {
        double mu = eval(a);
        ++res.evals;
        res.history.push_back({a, mu});
        return mu;
    };
    double a_lo = cfg.a_min, a_hi = cfg.a_max;
    double f_lo = F(a_lo), f_hi = F(a_hi);
    if (!((f_lo - target_mu1) * (f_hi - target_mu1) <= 0.0)) {
        // monotonicity failed or the target is outside the achievable range:
        // coarse scan for a bracket
        bool found = false;
        double pa = a_lo, pf = f_lo;
        for (int q = 1; q <= cfg.grid_fallback; ++q) {
            double a = a_lo + (a_hi - a_lo) * q / cfg.grid_fallback;
            double f = (q == cfg.grid_fallback) ? f_hi : F(a);
            if ((pf - target_mu1) * (f - target_mu1) <= 0.0) {
                a_lo = pa;
                f_lo = pf;
                a_hi = a;
                f_hi = f;
                found = true;
                break;
            }
            pa = a;
            pf = f;
        }
        if (!found)
            throw numerical_error("solve_for_ratio: target " + std::to_string(target_mu1) +
                                  " outside achieved range [" + std::to_string(std::min(f_lo, f_hi)) +
                                  ", " + std::to_string(std::max(f_lo, f_hi)) + "]");
    }
    // bisection with a secant proposal, bounded away from the bracket edges
    while (res.evals < cfg.max_evals) {
        double a_sec = a_lo + (target_mu1 - f_lo) * (a_hi - a_lo) / (f_hi - f_lo);
        double a_mid = 0.5 * (a_lo + a_hi);
        double a = (std::isfinite(a_sec) && a_sec > a_lo + 0.1 * (a_hi - a_lo) &&
                    a_sec < a_hi - 0.1 * (a_hi - a_lo))
                       ? a_sec
                       : a_mid;
        double f = F(a);
        if (std::abs(f - target_mu1) <= cfg.tol_ratio) {
            res.a1 = a;
            res.mu1 = f;
            return res;
        }
        if ((f_lo - target_mu1) * (f - target_mu1) <= 0.0) {
            a_hi = a;
            f_hi = f;
        } else {
            a_lo = a;
            f_lo = f;
        }
    }
    throw numerical_error("solve_for_ratio: evaluation budget exhausted before |F - mu| <= tol");
}

}  // namespace ovalab
