#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ovalab {

// ---------------------------------------------------------------------------
// Monotone cubic (Fritsch-Carlson) interpolation on a strictly increasing
// abscissa. Used for node redistribution and chart resampling, where
// overshoot-free behavior matters more than formal order.
// ---------------------------------------------------------------------------

class Pchip {
  public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip: need >= 2 matching points");
        for (size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i + 1] > x_[i])) throw std::invalid_argument("Pchip: abscissa not increasing");
        d_.resize(n);
        if (n == 2) {
            double s = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            d_[0] = d_[1] = s;
            return;
        }
        std::vector<double> h(n - 1), del(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            del[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        for (size_t i = 1; i + 1 < n; ++i) {
            if (del[i - 1] * del[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                double w1 = 2.0 * h[i] + h[i - 1];
                double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        d_[0] = edge_slope(h[0], h[1], del[0], del[1]);
        d_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }

    double operator()(double xq) const {
        size_t i = locate(xq);
        double h = x_[i + 1] - x_[i];
        double t = (xq - x_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
    }

    double deriv(double xq) const {
        size_t i = locate(xq);
        double h = x_[i + 1] - x_[i];
        double t = (xq - x_[i]) / h;
        double t2 = t * t;
        double dh00 = (6 * t2 - 6 * t) / h, dh10 = 3 * t2 - 4 * t + 1;
        double dh01 = (-6 * t2 + 6 * t) / h, dh11 = 3 * t2 - 2 * t;
        return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
    }

    double xmin() const { return x_.front(); }
    double xmax() const { return x_.back(); }

  private:
    static double edge_slope(double h0, double h1, double del0, double del1) {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) return 0.0;
        if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0)) return 3.0 * del0;
        return d;
    }

    size_t locate(double xq) const {
        if (xq <= x_.front()) return 0;
        if (xq >= x_.back()) return x_.size() - 2;
        auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        return static_cast<size_t>(it - x_.begin()) - 1;
    }

    std::vector<double> x_, y_, d_;
};

// Linear interpolation helper for short lookups.
inline double lerp_lookup(const std::vector<double>& x, const std::vector<double>& y, double xq) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("lerp_lookup: bad table");
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    size_t i = static_cast<size_t>(it - x.begin()) - 1;
    double t = (xq - x[i]) / (x[i + 1] - x[i]);
    return (1.0 - t) * y[i] + t * y[i + 1];
}

}  // namespace ovalab
