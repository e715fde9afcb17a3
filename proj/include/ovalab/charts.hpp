#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ovalab/core.hpp"
#include "ovalab/curve.hpp"
#include "ovalab/curve_flow.hpp"
#include "ovalab/interp.hpp"

namespace ovalab {

// ---------------------------------------------------------------------------
// Renormalized snapshot charts. The graph chart samples u(rho) on a uniform
// rho grid; the inverse chart samples Y(u) near the tip, where the graph
// slope blows up. Both are views of the same polyline.
// ---------------------------------------------------------------------------

struct ProfileSamples {
    std::vector<double> rho, u;     // graph chart
    std::vector<double> u_grid, Y;  // inverse chart (u ascending from the tip)
    double tau = 0.0;               // -log(t_ext - t)
    double width = 0.0;             // tip abscissa of the renormalized curve
    double u0 = 0.0;                // u at rho = 0
    double tip_H = 0.0;             // renormalized mean curvature at the tip
    std::vector<Vec2> nodes;        // renormalized polyline
    SymmetryClass sym;
};

struct TipZoom {
    std::vector<double> s, Z;
    double tau = 0.0;
};

struct RenormalizeOptions {
    int graph_samples = 513;
    int inverse_samples = 513;
    double inverse_u_frac = 0.95;  // inverse chart covers [0, frac * u(0)]
};

struct RenormalizedTrajectory {
    std::vector<ProfileSamples> samples;
    int dropped = 0;
};

inline ProfileSamples renormalize_snapshot(const RunSnapshot& snap, DDouble t_ext,
                                           const SymmetryClass& sym,
                                           const RenormalizeOptions& opt = {}) {
    double remaining = dd_diff(t_ext, snap.t);
    if (!(remaining > 0.0)) throw numerical_error("renormalize_snapshot: snapshot at or past extinction");
    const double lam = 1.0 / std::sqrt(remaining);

    ProfileSamples p;
    p.sym = sym;
    p.tau = -std::log(remaining);
    p.nodes.resize(snap.nodes.size());
    for (size_t i = 0; i < snap.nodes.size(); ++i) p.nodes[i] = lam * snap.nodes[i];

    QuotientCurve rq{p.nodes, DDouble{p.tau}, Frame::renormalized, sym};
    std::string defect = curve_defect(rq);
    if (!defect.empty()) throw numerical_error("renormalize_snapshot: " + defect);

    p.width = p.nodes.back().x;
    p.u0 = p.nodes.front().y;
    p.tip_H = tip_mean_curvature(rq, curve_geometry(rq));

    std::vector<double> rr(p.nodes.size()), yy(p.nodes.size());
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        rr[i] = p.nodes[i].x;
        yy[i] = p.nodes[i].y;
    }
    Pchip graph(rr, yy);
    p.rho.resize(opt.graph_samples);
    p.u.resize(opt.graph_samples);
    for (int j = 0; j < opt.graph_samples; ++j) {
        p.rho[j] = p.width * j / (opt.graph_samples - 1);
        p.u[j] = (j == 0) ? p.u0 : (j == opt.graph_samples - 1 ? 0.0 : graph(p.rho[j]));
    }

    // inverse chart: ascend from the tip
    std::vector<double> ua(p.nodes.size()), Ya(p.nodes.size());
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        ua[i] = p.nodes[p.nodes.size() - 1 - i].y;
        Ya[i] = p.nodes[p.nodes.size() - 1 - i].x;
    }
    Pchip inv(ua, Ya);
    const double u_hi = opt.inverse_u_frac * p.u0;
    p.u_grid.resize(opt.inverse_samples);
    p.Y.resize(opt.inverse_samples);
    for (int j = 0; j < opt.inverse_samples; ++j) {
        p.u_grid[j] = u_hi * j / (opt.inverse_samples - 1);
        p.Y[j] = (j == 0) ? p.width : inv(p.u_grid[j]);
    }
    return p;
}

inline RenormalizedTrajectory renormalize_trajectory(const RunRecord& rec,
                                                     const RenormalizeOptions& opt = {}) {
    RenormalizedTrajectory out;
    double last_tau = -std::numeric_limits<double>::infinity();
    for (const auto& snap : rec.snapshots) {
        try {
            ProfileSamples p = renormalize_snapshot(snap, rec.t_ext, rec.sym, opt);
            if (!(p.tau > last_tau)) {  // tau must be strictly increasing
                ++out.dropped;
                continue;
            }
            last_tau = p.tau;
            out.samples.push_back(std::move(p));
        } catch (const numerical_error&) {
            ++out.dropped;
        }
    }
    return out;
}

// Undo the parabolic rescaling of one snapshot (exact inverse map).
inline std::vector<Vec2> unrenormalize_nodes(const ProfileSamples& p, DDouble t_ext, DDouble t) {
    double remaining = dd_diff(t_ext, t);
    double lam = 1.0 / std::sqrt(remaining);
    std::vector<Vec2> out(p.nodes.size());
    for (size_t i = 0; i < p.nodes.size(); ++i) out[i] = (1.0 / lam) * p.nodes[i];
    return out;
}

// ---------------------------------------------------------------------------
// Tip zoom:  Z(s) = |tau|^{1/2} ( Y(|tau|^{-1/2} s) - Y(0) ).
// An explicit tau may be supplied when the zoom scale should come from an
// effective age rather than the snapshot clock.
// ---------------------------------------------------------------------------

inline TipZoom zoom_tip(const ProfileSamples& p, double s_max = 5.0, int samples = 257,
                        std::optional<double> tau_override = std::nullopt) {
    double tau = tau_override.value_or(p.tau);
    double at = std::abs(tau);
    if (!(at > 0.0)) throw std::invalid_argument("zoom_tip: |tau| must be positive");
    double u_needed = s_max / std::sqrt(at);
    // data sufficiency is judged on the underlying polyline, not the resampled grid
    int have = 0;
    for (const auto& q : p.nodes)
        if (q.y <= u_needed) ++have;
    if (have < 8) throw std::invalid_argument("zoom_tip: tip chart has fewer than 8 samples");

    Pchip inv(p.u_grid, p.Y);
    TipZoom z;
    z.tau = tau;
    z.s.resize(samples);
    z.Z.resize(samples);
    const double Y0 = p.Y.front();
    for (int j = 0; j < samples; ++j) {
        double s = s_max * j / (samples - 1);
        double u = s / std::sqrt(at);
        z.s[j] = s;
        z.Z[j] = (j == 0) ? 0.0 : std::sqrt(at) * (inv(std::min(u, inv.xmax())) - Y0);
    }
    return z;
}

}  // namespace ovalab
