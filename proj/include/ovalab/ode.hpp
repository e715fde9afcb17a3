#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ovalab/core.hpp"

namespace ovalab {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-4;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 2'000'000;
};

// Adaptive Cash-Karp RK45. F: (double x, const std::array<double,N>&) -> array.
// Observer is called after every accepted step; returning false stops early.
template <size_t N, typename F, typename Obs>
void integrate_ode(F f, double x0, double x1, std::array<double, N>& y, const OdeOptions& opt,
                   Obs observer) {
    static constexpr double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
    static constexpr double b21 = 0.2;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static constexpr double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                            b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                            c6 = 512.0 / 1771.0;
    static constexpr double dc1 = c1 - 2825.0 / 27648.0, dc3 = c3 - 18575.0 / 48384.0,
                            dc4 = c4 - 13525.0 / 55296.0, dc5 = -277.0 / 14336.0,
                            dc6 = c6 - 0.25;

    const double dir = (x1 >= x0) ? 1.0 : -1.0;
    double x = x0;
    double h = dir * std::min(std::abs(opt.h_init), std::abs(x1 - x0));
    long steps = 0;

    std::array<double, N> k1, k2, k3, k4, k5, k6, yt, yerr, ynew;
    while (dir * (x1 - x) > 0.0) {
        if (++steps > opt.max_steps) throw numerical_error("integrate_ode: step budget exhausted");
        if (dir * (x + h - x1) > 0.0) h = x1 - x;

        k1 = f(x, y);
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + h * b21 * k1[i];
        k2 = f(x + a2 * h, yt);
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
        k3 = f(x + a3 * h, yt);
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
        k4 = f(x + a4 * h, yt);
        for (size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
        k5 = f(x + a5 * h, yt);
        for (size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i]);
        k6 = f(x + a6 * h, yt);

        double errmax = 0.0;
        for (size_t i = 0; i < N; ++i) {
            ynew[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            yerr[i] = h * (dc1 * k1[i] + dc3 * k3[i] + dc4 * k4[i] + dc5 * k5[i] + dc6 * k6[i]);
            double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            errmax = std::max(errmax, std::abs(yerr[i]) / sc);
        }
        if (!std::isfinite(errmax)) throw numerical_error("integrate_ode: non-finite state");

        if (errmax <= 1.0) {
            x += h;
            y = ynew;
            if (!observer(x, y)) return;
            double grow = (errmax > 1e-10) ? 0.9 * std::pow(errmax, -0.2) : 5.0;
            h *= std::min(5.0, grow);
            if (std::abs(h) > opt.h_max) h = dir * opt.h_max;
        } else {
            h *= std::max(0.1, 0.9 * std::pow(errmax, -0.25));
            if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(x)))
                throw numerical_error("integrate_ode: step underflow");
        }
    }
}

template <size_t N, typename F>
void integrate_ode(F f, double x0, double x1, std::array<double, N>& y, const OdeOptions& opt) {
    integrate_ode<N>(f, x0, x1, y, opt, [](double, const std::array<double, N>&) { return true; });
}

}  // namespace ovalab
