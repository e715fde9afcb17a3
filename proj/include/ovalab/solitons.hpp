#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ovalab/core.hpp"
#include "ovalab/interp.hpp"
#include "ovalab/ode.hpp"

namespace ovalab {

// ---------------------------------------------------------------------------
// Rotationally symmetric self-shrinker profiles in R^{d+1}. The stationary
// profile r = u(y) solves  u''/(1+u'^2) - (y/2) u' - (d-1)/u + u/2 = 0.
// The compact family is parametrized by the tip position a (u(a) = 0, smooth
// cap); the noncompact family by the asymptotic cone slope b.
// ---------------------------------------------------------------------------

struct ShrinkerProfile {
    double a = 0.0;
    int d = 0;
    std::vector<double> ys;   // ascending, ys.back() ~ a
    std::vector<double> us;   // profile values
    std::vector<double> ups;  // du/dy
    double tol = 0.0;

    double u0() const { return us.front(); }
};

struct TailShrinkerProfile {
    double b = 0.0;
    int d = 0;
    std::vector<double> ys, us, ups;
};

struct BowlProfile {
    int d = 0;         // fiber-plus-one dimension; ODE coefficient is d-1
    double speed = 0;  // translation speed
    std::vector<double> s, Z, Zs;
};

// Compact shrinker by shooting from the smooth cap at y=a. Near the tip the
// graph slope blows up, so the cap is integrated in the inverted chart
// Y(u) (series start Y = a - a u^2/(4d) + ...), switching to the graph chart
// once |u'| <= 10.
inline ShrinkerProfile shrinker_shoot(double a, int d, double tol = 1e-10) {
    if (!(a >= 2.0)) throw std::invalid_argument("shrinker_shoot: a >= 2 required");
    if (d < 2) throw std::invalid_argument("shrinker_shoot: d >= 2 required");
    if (!std::isfinite(a) || !std::isfinite(tol) || tol <= 0)
        throw std::invalid_argument("shrinker_shoot: bad parameters");

    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    opt.h_max = a / 400.0;

    ShrinkerProfile out;
    out.a = a;
    out.d = d;
    out.tol = tol;

    std::vector<double> ys_tip, us_tip, ups_tip;

    // inverted chart: state (Y, Y_u), independent variable u
    const double b2 = -a / (4.0 * d);
    const double b4 = (0.5 * b2 + 8.0 * b2 * b2 * b2) / (4.0 * d + 8.0);
    const double u_start = 1e-4;
    std::array<double, 2> st{a + b2 * u_start * u_start + b4 * std::pow(u_start, 4),
                             2.0 * b2 * u_start + 4.0 * b4 * std::pow(u_start, 3)};
    ys_tip.push_back(a);
    us_tip.push_back(0.0);
    ups_tip.push_back(-std::numeric_limits<double>::infinity());

    double u_sw = 0.0, Y_sw = 0.0, Yu_sw = 0.0;
    auto rhs_inv = [d](double u, const std::array<double, 2>& y) {
        double Y = y[0], Yu = y[1];
        double Yuu = -(1.0 + Yu * Yu) * ((d - 1) * Yu / u + 0.5 * (Y - u * Yu));
        return std::array<double, 2>{Yu, Yuu};
    };
    const double u_limit = 4.0 * std::sqrt(2.0 * (d - 1));
    integrate_ode<2>(rhs_inv, u_start, u_limit, st, opt, [&](double u, const std::array<double, 2>& y) {
        ys_tip.push_back(y[0]);
        us_tip.push_back(u);
        ups_tip.push_back(1.0 / y[1]);
        if (std::abs(y[1]) >= 0.1) {  // graph slope |u'| <= 10 from here on
            u_sw = u;
            Y_sw = y[0];
            Yu_sw = y[1];
            return false;
        }
        return true;
    });
    if (u_sw == 0.0)
        throw numerical_error("shrinker_shoot: inverted chart never reached the graph regime");

    // graph chart: state (u, u'), integrate y downward from the switch point
    std::vector<double> ys_g, us_g, ups_g;
    std::array<double, 2> sg{u_sw, 1.0 / Yu_sw};
    auto rhs_graph = [d](double y, const std::array<double, 2>& v) {
        double u = v[0], up = v[1];
        double upp = (1.0 + up * up) * (0.5 * y * up + (d - 1) / u - 0.5 * u);
        return std::array<double, 2>{up, upp};
    };
    bool blew_up = false;
    integrate_ode<2>(rhs_graph, Y_sw, 0.0, sg, opt, [&](double y, const std::array<double, 2>& v) {
        if (!(v[0] > 1e-8) || v[0] > 10.0 * std::sqrt(2.0 * (d - 1))) {
            blew_up = true;
            return false;
        }
        ys_g.push_back(y);
        us_g.push_back(v[0]);
        ups_g.push_back(v[1]);
        return true;
    });
    if (blew_up)
        throw numerical_error("shrinker_shoot: profile blew up before reaching the axis (parameter outside admissible range)");

    // merge: graph part ascending in y, then the tip part
    for (size_t i = ys_g.size(); i-- > 0;) {
        out.ys.push_back(ys_g[i]);
        out.us.push_back(us_g[i]);
        out.ups.push_back(ups_g[i]);
    }
    for (size_t i = ys_tip.size(); i-- > 0;) {
        if (!out.ys.empty() && ys_tip[i] <= out.ys.back()) continue;
        out.ys.push_back(ys_tip[i]);
        out.us.push_back(us_tip[i]);
        out.ups.push_back(ups_tip[i]);
    }
    return out;
}

// Noncompact shrinker end with asymptotic slope b: integrate inward from
// y = R_max with the cone-plus-correction data u ~ b y + (d-1)/(b y).
inline TailShrinkerProfile tail_shrinker_shoot(double b, int d, double R_max,
                                               double tol = 1e-10) {
    if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("tail_shrinker_shoot: 0 < b <= 1 required");
    if (!(R_max >= 20.0)) throw std::invalid_argument("tail_shrinker_shoot: R_max >= 20 required");
    if (d < 2) throw std::invalid_argument("tail_shrinker_shoot: d >= 2 required");

    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    opt.h_max = R_max / 800.0;

    auto rhs = [d](double y, const std::array<double, 2>& v) {
        double u = v[0], up = v[1];
        double upp = (1.0 + up * up) * (0.5 * y * up + (d - 1) / u - 0.5 * u);
        return std::array<double, 2>{up, upp};
    };
    // cone end with two correction orders: u ~ b y + c1/y + c3/y^3
    const double c1 = (d - 1) / b;
    const double c3 = -c1 / (1.0 + b * b) - (d - 1) * c1 / (2.0 * b * b);
    std::array<double, 2> st{b * R_max + c1 / R_max + c3 / std::pow(R_max, 3),
                             b - c1 / (R_max * R_max) - 3.0 * c3 / std::pow(R_max, 4)};

    TailShrinkerProfile out;
    out.b = b;
    out.d = d;
    out.ys.push_back(R_max);
    out.us.push_back(st[0]);
    out.ups.push_back(st[1]);
    integrate_ode<2>(rhs, R_max, 1e-6, st, opt, [&](double y, const std::array<double, 2>& v) {
        if (!(v[0] > 0.0)) throw numerical_error("tail_shrinker_shoot: profile hit the axis");
        out.ys.push_back(y);
        out.us.push_back(v[0]);
        out.ups.push_back(v[1]);
        return true;
    });
    std::reverse(out.ys.begin(), out.ys.end());
    std::reverse(out.us.begin(), out.us.end());
    std::reverse(out.ups.begin(), out.ups.end());

    // convexity audit on [1, 0.95 R_max]; the few samples nearest R_max sit in
    // the boundary layer where the truncated cone data relaxes onto the profile
    int bad = 0;
    for (size_t i = 1; i < out.ys.size(); ++i) {
        if (out.ys[i] < 1.0 || out.ys[i] > 0.95 * R_max) continue;
        if (out.ups[i] < out.ups[i - 1] - 1e-7) ++bad;
    }
    if (bad > 0) throw numerical_error("tail_shrinker_shoot: loss of convexity on [1, R_max]");
    return out;
}

// Bowl translator profile: Z''/(1+Z'^2) + ((d-1)/s) Z' + speed = 0 with
// Z(0) = Z'(0) = 0, series-started at the removable singularity.
inline BowlProfile bowl_solve(int d, double speed, double S_max, double tol = 1e-11,
                              int nsamples = 1001) {
    if (d < 2) throw std::invalid_argument("bowl_solve: d >= 2 required");
    if (!(speed > 0.0) || !std::isfinite(speed) || !std::isfinite(S_max) || S_max <= 0)
        throw std::invalid_argument("bowl_solve: speed > 0 and finite S_max required");

    const double alpha = -speed / (2.0 * d);
    const double beta = 2.0 * alpha * alpha * alpha / (d + 2.0);

    BowlProfile out;
    out.d = d;
    out.speed = speed;
    out.s.resize(nsamples);
    out.Z.resize(nsamples);
    out.Zs.resize(nsamples);

    const double s0 = std::min(1e-4, S_max * 1e-4);
    std::array<double, 2> st{alpha * s0 * s0 + beta * std::pow(s0, 4),
                             2.0 * alpha * s0 + 4.0 * beta * std::pow(s0, 3)};
    auto rhs = [d, speed](double s, const std::array<double, 2>& v) {
        double Zs = v[1];
        double Zss = -(1.0 + Zs * Zs) * ((d - 1) * Zs / s + speed);
        return std::array<double, 2>{Zs, Zss};
    };
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    opt.h_max = S_max / 800.0;

    double prev = s0;
    std::vector<double> xs{0.0, s0}, zz{0.0, st[0]}, dz{0.0, st[1]};
    integrate_ode<2>(rhs, s0, S_max, st, opt, [&](double s, const std::array<double, 2>& v) {
        if (s > prev) {
            xs.push_back(s);
            zz.push_back(v[0]);
            dz.push_back(v[1]);
            prev = s;
        }
        return true;
    });
    Pchip zi(xs, zz), di(xs, dz);
    for (int j = 0; j < nsamples; ++j) {
        double s = S_max * j / (nsamples - 1);
        out.s[j] = s;
        if (j == 0) {
            out.Z[j] = 0.0;
            out.Zs[j] = 0.0;
        } else {
            out.Z[j] = zi(s);
            out.Zs[j] = di(s);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cylindrical foliation leaves: the d-dimensional shrinkers shifted by eta
// along the symmetry axes and rotated into SO(k) x SO(n+1-k) symmetry.
// ---------------------------------------------------------------------------

enum class LeafKind { shifted_compact, shifted_tail, cylinder };

struct FoliationLeaf {
    LeafKind kind = LeafKind::cylinder;
    double a = 0.0;  // compact parameter
    double b = 0.0;  // tail slope
    double eta = 0.0;
    SymmetryClass sym;
    ShrinkerProfile compact_profile;  // populated for shifted_compact
    TailShrinkerProfile tail_profile; // populated for shifted_tail
};

inline FoliationLeaf make_compact_leaf(double a, double eta, const SymmetryClass& sym,
                                       double tol = 1e-10) {
    if (!(eta > 0.0)) throw std::invalid_argument("make_compact_leaf: eta > 0 required");
    FoliationLeaf leaf;
    leaf.kind = LeafKind::shifted_compact;
    leaf.a = a;
    leaf.eta = eta;
    leaf.sym = sym;
    leaf.compact_profile = shrinker_shoot(a, sym.tip_dim(), tol);
    return leaf;
}

inline FoliationLeaf make_tail_leaf(double b, double eta, const SymmetryClass& sym,
                                    double R_max = 40.0, double tol = 1e-10) {
    if (!(eta > 0.0)) throw std::invalid_argument("make_tail_leaf: eta > 0 required");
    FoliationLeaf leaf;
    leaf.kind = LeafKind::shifted_tail;
    leaf.b = b;
    leaf.eta = eta;
    leaf.sym = sym;
    leaf.tail_profile = tail_shrinker_shoot(b, sym.tip_dim(), R_max, tol);
    return leaf;
}

inline FoliationLeaf make_cylinder_leaf(const SymmetryClass& sym) {
    FoliationLeaf leaf;
    leaf.kind = LeafKind::cylinder;
    leaf.sym = sym;
    return leaf;
}

struct FoliationSample {
    double y1 = 0.0;   // axis coordinate of the rotated hypersurface point
    double arc = 0.0;  // profile coordinate on the underlying revolution surface
    double value = 0.0;  // H_Gamma - <y, nu>/2
};

// Shrinker-quantity H - <y,nu>/2 of a leaf at given axis positions. The mean
// curvature of the rotated hypersurface is assembled from the revolution
// surface's curvature (computed from sampled profile data by finite
// differences) plus the fibered-rotation term (k-1)<e1,nu>/y1.
inline std::vector<FoliationSample> foliation_divergence(const FoliationLeaf& leaf,
                                                         const std::vector<double>& y1_samples) {
    const int k = leaf.sym.k;
    const int d = leaf.sym.tip_dim();
    std::vector<FoliationSample> out;

    if (leaf.kind == LeafKind::cylinder) {
        // H = (n-k)/R = R/2 = <y,nu>/2 identically on the cylinder of radius R
        const double R = leaf.sym.cylinder_radius();
        for (double y1 : y1_samples) {
            double H = (leaf.sym.n - leaf.sym.k) / R;
            out.push_back({y1, y1, H - 0.5 * R});
        }
        return out;
    }

    const double threshold = 2.0 * (k - 1) / leaf.eta;
    const std::vector<double>& ys =
        (leaf.kind == LeafKind::shifted_compact) ? leaf.compact_profile.ys : leaf.tail_profile.ys;
    const std::vector<double>& us =
        (leaf.kind == LeafKind::shifted_compact) ? leaf.compact_profile.us : leaf.tail_profile.us;
    const std::vector<double>& ups =
        (leaf.kind == LeafKind::shifted_compact) ? leaf.compact_profile.ups : leaf.tail_profile.ups;
    // the compact profile's last sample has infinite slope; clip it for the
    // slope interpolant (samples near the cap are excluded by the domain rule)
    size_t nfin = ys.size();
    while (nfin > 0 && !std::isfinite(ups[nfin - 1])) --nfin;
    Pchip uprof(ys, us);
    Pchip sprof(std::vector<double>(ys.begin(), ys.begin() + nfin),
                std::vector<double>(ups.begin(), ups.begin() + nfin));

    for (double y1 : y1_samples) {
        if (y1 < threshold)
            throw std::invalid_argument("foliation_divergence: sample below y1 >= 2(k-1)/eta");
        double ytilde = y1 - leaf.eta;  // profile coordinate of the unshifted surface
        if (ytilde < ys.front() + 1e-9 || ytilde > sprof.xmax() - 1e-9)
            throw std::invalid_argument("foliation_divergence: sample outside the leaf domain");

        double u = uprof(ytilde);
        double up = sprof(ytilde);
        double upp = sprof.deriv(ytilde);

        double w = std::sqrt(1.0 + up * up);
        double H_rev = -upp / (w * w * w) + (d - 1) / (u * w);   // revolution surface in R^{d+1}
        double nu_e1 = -up / w;                                   // axis component of the outward normal
        double H_leaf = H_rev + (k - 1) * nu_e1 / y1;
        // position on the rotated hypersurface: axis part y1, fiber radius u
        double y_dot_nu = y1 * nu_e1 + u * (1.0 / w);
        out.push_back({y1, ytilde, H_leaf - 0.5 * y_dot_nu});
    }
    return out;
}

}  // namespace ovalab
