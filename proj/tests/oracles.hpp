#pragma once

// Test-only oracles, deliberately independent of the library code paths they
// check: an adaptive Dormand-Prince scalar integrator, central finite
// differences and a brute-force grid minimizer for tiny QPs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Adaptive RK45 (Dormand-Prince) for scalar y' = f(s, y) from s0 to s1.
inline double rk45(const std::function<double(double, double)>& f, double s0, double y0,
                   double s1, double rel_tol = 1e-10, double abs_tol = 1e-12) {
    double s = s0;
    double y = y0;
    double h = (s1 - s0) / 64.0;
    const double h_min = (s1 - s0) * 1e-14;
    int guard = 0;
    while (s < s1 && ++guard < 2000000) {
        h = std::min(h, s1 - s);
        const double k1 = f(s, y);
        const double k2 = f(s + h / 5.0, y + h * (k1 / 5.0));
        const double k3 = f(s + 3.0 * h / 10.0, y + h * (3.0 * k1 / 40.0 + 9.0 * k2 / 40.0));
        const double k4 =
            f(s + 4.0 * h / 5.0, y + h * (44.0 * k1 / 45.0 - 56.0 * k2 / 15.0 + 32.0 * k3 / 9.0));
        const double k5 = f(s + 8.0 * h / 9.0,
                            y + h * (19372.0 * k1 / 6561.0 - 25360.0 * k2 / 2187.0 +
                                     64448.0 * k3 / 6561.0 - 212.0 * k4 / 729.0));
        const double k6 =
            f(s + h, y + h * (9017.0 * k1 / 3168.0 - 355.0 * k2 / 33.0 + 46732.0 * k3 / 5247.0 +
                              49.0 * k4 / 176.0 - 5103.0 * k5 / 18656.0));
        const double y5 = y + h * (35.0 * k1 / 384.0 + 500.0 * k3 / 1113.0 + 125.0 * k4 / 192.0 -
                                   2187.0 * k5 / 6784.0 + 11.0 * k6 / 84.0);
        const double k7 = f(s + h, y5);
        const double y4 = y + h * (5179.0 * k1 / 57600.0 + 7571.0 * k3 / 16695.0 +
                                   393.0 * k4 / 640.0 - 92097.0 * k5 / 339200.0 +
                                   187.0 * k6 / 2100.0 + k7 / 40.0);
        const double err = std::abs(y5 - y4);
        const double tol = abs_tol + rel_tol * std::max(std::abs(y), std::abs(y5));
        if (err <= tol || h <= h_min) {
            s += h;
            y = y5;
        }
        const double factor =
            err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
        h *= std::clamp(factor, 0.2, 4.0);
        h = std::max(h, h_min);
    }
    if (guard >= 2000000) throw std::runtime_error("rk45 oracle stalled");
    return y;
}

/// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct GridQpResult {
    std::vector<double> u;
    bool feasible = false;
};

/// Exhaustive minimizer of |u - u_nom|^2 on a regular grid subject to
/// a_i . u >= b_i, for 2-variable problems.
inline GridQpResult grid_qp_2d(const std::vector<double>& u_nom,
                               const std::vector<std::vector<double>>& a,
                               const std::vector<double>& b, double lo, double hi,
                               double resolution) {
    GridQpResult res;
    res.u = {0.0, 0.0};
    double best = 1e300;
    const int n = static_cast<int>(std::llround((hi - lo) / resolution));
    for (int i = 0; i <= n; ++i) {
        const double x = lo + resolution * i;
        for (int j = 0; j <= n; ++j) {
            const double y = lo + resolution * j;
            bool ok = true;
            for (std::size_t r = 0; r < a.size(); ++r) {
                if (a[r][0] * x + a[r][1] * y < b[r]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            const double dx = x - u_nom[0];
            const double dy = y - u_nom[1];
            const double cost = dx * dx + dy * dy;
            if (cost < best) {
                best = cost;
                res.u = {x, y};
                res.feasible = true;
            }
        }
    }
    return res;
}

}  // namespace oracle
