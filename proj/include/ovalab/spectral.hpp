#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ovalab/charts.hpp"
#include "ovalab/core.hpp"
#include "ovalab/interp.hpp"
#include "ovalab/quadrature.hpp"

namespace ovalab {

// ---------------------------------------------------------------------------
// Even polynomials p(rho) = sum_j a_j rho^{2j}, the exact-algebra path for
// the radial Ornstein-Uhlenbeck eigenfunctions.
// ---------------------------------------------------------------------------

struct EvenPoly {
    std::vector<double> a;  // coefficients of rho^{2j}

    double operator()(double rho) const {
        double r2 = rho * rho, acc = 0.0, pw = 1.0;
        for (double c : a) {
            acc += c * pw;
            pw *= r2;
        }
        return acc;
    }
};

inline EvenPoly operator*(double c, const EvenPoly& p) {
    EvenPoly q = p;
    for (double& v : q.a) v *= c;
    return q;
}

// L = d^2/drho^2 + ((k-1)/rho) d/drho - (rho/2) d/drho + 1, exactly on even
// polynomials: (Lp)_j = a_{j+1} (2j+2)(2j+k) + a_j (1-j).
inline EvenPoly apply_L(const EvenPoly& p, int k) {
    EvenPoly q;
    q.a.assign(p.a.size(), 0.0);
    for (size_t j = 0; j < p.a.size(); ++j) {
        double c = p.a[j] * (1.0 - static_cast<double>(j));
        if (j + 1 < p.a.size()) c += p.a[j + 1] * (2.0 * j + 2.0) * (2.0 * j + k);
        q.a[j] = c;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Gaussian-weighted spectral frame: the quadrature for
// inner(f,g) = int_0^inf f g e^{-rho^2/4} rho^{k-1} drho and the three
// normalized eigenfunctions psi_{+1} (constant), psi_0 = c0 (rho^2 - 2k),
// psi_{-1} = c_{-1} (rho^4 - (8+4k) rho^2 + (8+4k) k).
// ---------------------------------------------------------------------------

struct SpectralFrame {
    int k = 2;
    QuadRule rule;  // nodes rho_i, weights for the Gaussian radial measure
    EvenPoly psi_p1, psi_0, psi_m1;
    double c_p1 = 0, c_0 = 0, c_m1 = 0;

    double rho_max() const { return rule.nodes.back(); }
};

template <typename F>
double inner_H(F&& f, const SpectralFrame& fr) {
    double acc = 0.0;
    for (size_t i = 0; i < fr.rule.nodes.size(); ++i) {
        double v = f(fr.rule.nodes[i]);
        if (!std::isfinite(v)) throw numerical_error("inner_H: non-finite integrand at a quadrature node");
        acc += fr.rule.weights[i] * v;
    }
    return acc;
}

template <typename F, typename G>
double inner_H(F&& f, G&& g, const SpectralFrame& fr) {
    return inner_H([&](double r) { return f(r) * g(r); }, fr);
}

template <typename F>
double norm_H(F&& f, const SpectralFrame& fr) {
    return std::sqrt(inner_H([&](double r) { double v = f(r); return v * v; }, fr));
}

inline SpectralFrame build_frame(int k, int m) {
    if (k < 1) throw std::invalid_argument("build_frame: k >= 1 required");
    if (m < 8) throw std::invalid_argument("build_frame: quadrature size m >= 8 required");
    SpectralFrame fr;
    fr.k = k;
    fr.rule = gauss_radial_gaussian(m, k);

    EvenPoly one{{1.0}};
    EvenPoly neutral{{-2.0 * k, 1.0}};
    EvenPoly second{{(8.0 + 4.0 * k) * k, -(8.0 + 4.0 * k), 1.0}};

    fr.c_p1 = 1.0 / norm_H(one, fr);
    fr.c_0 = 1.0 / norm_H(neutral, fr);
    fr.c_m1 = 1.0 / norm_H(second, fr);
    fr.psi_p1 = fr.c_p1 * one;
    fr.psi_0 = fr.c_0 * neutral;
    fr.psi_m1 = fr.c_m1 * second;
    return fr;
}

// Sampled-data path for L: centered differences on a uniform grid, with the
// even-extension limit k f''(0) + f(0) on the axis.
inline std::vector<double> apply_L_sampled(const std::vector<double>& rho,
                                           const std::vector<double>& f, int k) {
    const size_t n = rho.size();
    if (n < 5 || f.size() != n) throw std::invalid_argument("apply_L_sampled: need >= 5 matching samples");
    const double h = rho[1] - rho[0];
    for (size_t i = 1; i < n; ++i)
        if (std::abs(rho[i] - rho[i - 1] - h) > 1e-9 * h)
            throw std::invalid_argument("apply_L_sampled: grid must be uniform");
    std::vector<double> out(n);
    auto d1 = [&](size_t i) { return (f[i + 1] - f[i - 1]) / (2.0 * h); };
    auto d2 = [&](size_t i) { return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h); };
    for (size_t i = 0; i < n; ++i) {
        if (i == 0) {
            if (rho[0] != 0.0) throw std::invalid_argument("apply_L_sampled: grid must start at rho=0");
            double fpp = 2.0 * (f[1] - f[0]) / (h * h);  // even extension
            out[0] = k * fpp + f[0];
        } else if (i == n - 1) {
            double fp = (f[i] - f[i - 1]) / h;
            double fpp = (f[i] - 2.0 * f[i - 1] + f[i - 2]) / (h * h);
            out[i] = fpp + ((k - 1) / rho[i] - 0.5 * rho[i]) * fp + f[i];
        } else {
            out[i] = d2(i) + ((k - 1) / rho[i] - 0.5 * rho[i]) * d1(i) + f[i];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Truncated projection of a renormalized profile onto the three-mode basis.
// ---------------------------------------------------------------------------

// C^2 cutoff: 1 on s<=1, 0 on s>=2, quintic in between (fixed so results are
// bit-reproducible).
inline double cutoff_c2(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double t = s - 1.0;
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

struct Projection {
    double a_p1 = 0, a_0 = 0, a_m1 = 0;
    double residual_norm = 0;
};

inline Projection project_truncated(const ProfileSamples& p, double rho_cut,
                                    const SpectralFrame& fr) {
    if (rho_cut <= 0.0) throw std::invalid_argument("project_truncated: rho_cut > 0 required");
    if (p.rho.back() < 2.0 * rho_cut * (1.0 - 1e-12))
        throw std::invalid_argument("project_truncated: profile does not cover [0, 2 rho_cut]");
    const double cyl = p.sym.cylinder_radius();
    Pchip graph(p.rho, p.u);
    auto vhat = [&](double r) {
        if (r >= 2.0 * rho_cut) return 0.0;
        double u = (r <= p.rho.back()) ? graph(r) : 0.0;
        return (u - cyl) * cutoff_c2(r / rho_cut);
    };
    Projection pr;
    pr.a_p1 = inner_H(vhat, fr.psi_p1, fr);
    pr.a_0 = inner_H(vhat, fr.psi_0, fr);
    pr.a_m1 = inner_H(vhat, fr.psi_m1, fr);
    double total = inner_H(vhat, vhat, fr);
    double expl = pr.a_p1 * pr.a_p1 + pr.a_0 * pr.a_0 + pr.a_m1 * pr.a_m1;
    pr.residual_norm = std::sqrt(std::max(0.0, total - expl));
    return pr;
}

// Default truncation radius: stay inside the resolved cylindrical region,
// rho_cut = min(sqrt(age)/2, largest rho with u >= 0.3 * cylinder radius).
inline double default_rho_cut(const ProfileSamples& p, double age) {
    const double theta = 0.3 * p.sym.cylinder_radius();
    double r_theta = p.rho.back();
    for (size_t i = 0; i < p.rho.size(); ++i) {
        if (p.u[i] < theta) {
            r_theta = p.rho[i];
            break;
        }
    }
    return std::min(0.5 * std::sqrt(std::abs(age)), r_theta);
}

// ---------------------------------------------------------------------------
// Neutral-mode coefficient law.
// ---------------------------------------------------------------------------

// c = <psi_0^2, psi_0> / (2 sqrt(2(n-k))), computed from the frame.
inline double neutral_mode_constant(const SpectralFrame& fr, const SymmetryClass& sym) {
    double cubic = inner_H([&](double r) { double v = fr.psi_0(r); return v * v * v; }, fr);
    return cubic / (2.0 * sym.cylinder_radius());
}

inline double alpha0_prediction(double tau, const SymmetryClass& sym, const SpectralFrame& fr) {
    if (!(tau < 0.0)) throw std::invalid_argument("alpha0_prediction: tau < 0 required");
    return -1.0 / (neutral_mode_constant(fr, sym) * std::abs(tau));
}

struct ModeTrace {
    std::vector<double> taus;       // effective ages (negative)
    std::vector<double> alpha0;     // measured neutral-mode coefficients
    std::vector<double> predicted;  // -1/(c |tau|)
    std::vector<double> residual;   // orthogonal remainder norms
    double c = 0.0;
};

}  // namespace ovalab
