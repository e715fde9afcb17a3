#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ovalab/core.hpp"

namespace ovalab {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Symmetric tridiagonal QL with implicit shifts, accumulating eigenvectors.
// d: diagonal, e: subdiagonal (e[0] unused). z starts as identity.
inline void tql2(std::vector<double>& d, std::vector<double>& e, std::vector<std::vector<double>>& z) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 64) throw numerical_error("tql2: no convergence");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int kk = 0; kk < n; ++kk) {
                        f = z[kk][i + 1];
                        z[kk][i + 1] = s * z[kk][i] + c * f;
                        z[kk][i] = c * z[kk][i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

// Gauss rule for the weight s^alpha e^{-s} on (0, inf) via the Jacobi matrix
// of the generalized Laguerre recurrence (Golub-Welsch).
inline QuadRule gauss_laguerre(int m, double alpha) {
    if (m < 1) throw std::invalid_argument("gauss_laguerre: m >= 1");
    if (m > 200) throw std::invalid_argument("gauss_laguerre: m > 200 not supported (recurrence breakdown)");
    if (alpha <= -1.0) throw std::invalid_argument("gauss_laguerre: alpha > -1 required");

    std::vector<double> d(m), e(m, 0.0);
    for (int j = 0; j < m; ++j) d[j] = 2.0 * j + alpha + 1.0;
    for (int j = 1; j < m; ++j) e[j] = std::sqrt(j * (j + alpha));

    std::vector<std::vector<double>> z(m, std::vector<double>(m, 0.0));
    for (int j = 0; j < m; ++j) z[j][j] = 1.0;
    detail::tql2(d, e, z);

    // sort ascending
    std::vector<int> idx(m);
    for (int j = 0; j < m; ++j) idx[j] = j;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });

    const double mu0 = std::tgamma(alpha + 1.0);
    QuadRule q;
    q.nodes.resize(m);
    q.weights.resize(m);
    for (int j = 0; j < m; ++j) {
        q.nodes[j] = d[idx[j]];
        double v0 = z[0][idx[j]];
        q.weights[j] = mu0 * v0 * v0;
    }
    return q;
}

// Quadrature for the Gaussian-weighted radial measure
// e^{-rho^2/4} rho^{k-1} drho on (0, inf): substitute s = rho^2/4, which
// turns the weight into 2^{k-1} s^{k/2-1} e^{-s} ds.
inline QuadRule gauss_radial_gaussian(int m, int k) {
    if (k < 1) throw std::invalid_argument("gauss_radial_gaussian: k >= 1");
    QuadRule s = gauss_laguerre(m, 0.5 * k - 1.0);
    QuadRule q;
    q.nodes.resize(m);
    q.weights.resize(m);
    const double pref = std::pow(2.0, k - 1);
    for (int j = 0; j < m; ++j) {
        q.nodes[j] = 2.0 * std::sqrt(s.nodes[j]);
        q.weights[j] = pref * s.weights[j];
    }
    return q;
}

}  // namespace ovalab
