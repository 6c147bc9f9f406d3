#include "tcbf/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "tcbf/matops.hpp"

namespace tcbf::nominal {

namespace {

/// Falling factorial k!/(k-o)! — coefficient of the o-th derivative of tau^k.
double dcoef(int k, int o) {
    double c = 1.0;
    for (int i = 0; i < o; ++i) c *= static_cast<double>(k - i);
    return c;
}

/// Row of the o-th derivative at normalized position tau for one segment of
/// duration T, written into dst starting at column offset.
void derivative_row(mat::Matrix& a, std::size_t row, std::size_t offset, double tau, int o,
                    double duration) {
    const double scale = 1.0 / std::pow(duration, o);
    for (int k = o; k < 8; ++k)
        a(row, offset + static_cast<std::size_t>(k)) =
            scale * dcoef(k, o) * std::pow(tau, k - o);
}

mat::Matrix snap_gram(double duration) {
    mat::Matrix h(8, 8);
    for (int j = 4; j < 8; ++j)
        for (int k = 4; k < 8; ++k)
            h(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) =
                dcoef(j, 4) * dcoef(k, 4) / (static_cast<double>(j + k - 7) *
                                             std::pow(duration, 7));
    return h;
}

}  // namespace

std::vector<double> allocate_times(const std::vector<Vec3>& waypoints, double avg_speed) {
    if (waypoints.size() < 2) throw std::invalid_argument("allocate_times needs >= 2 waypoints");
    if (avg_speed <= 0.0) throw std::invalid_argument("allocate_times needs avg_speed > 0");
    std::vector<double> durations(waypoints.size() - 1);
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
        durations[i] = std::max(0.2, (waypoints[i + 1] - waypoints[i]).norm() / avg_speed);
    return durations;
}

PolyTrajectory min_snap(const std::vector<Vec3>& waypoints, const std::vector<double>& durations,
                        const BoundaryConditions& bc) {
    if (waypoints.size() < 2) throw std::invalid_argument("min_snap needs >= 2 waypoints");
    if (durations.size() != waypoints.size() - 1)
        throw std::invalid_argument("min_snap needs one duration per segment");
    for (double d : durations)
        if (d <= 0.0) throw std::invalid_argument("min_snap durations must be positive");

    const std::size_t n = durations.size();
    const std::size_t nc = 8 * n;
    const bool pin_jerk = bc.j_start.has_value() || bc.j_end.has_value();
    const std::size_t m = 2 * n + 4 * (n - 1) + 4 + (pin_jerk ? 2 : 0);

    PolyTrajectory traj;
    traj.segments.resize(n);
    traj.waypoints = waypoints;
    for (std::size_t i = 0; i < n; ++i) {
        traj.segments[i].duration = durations[i];
        traj.total_time += durations[i];
    }

    // One KKT system [2H A'; A 0] per axis; only the right-hand side differs.
    const std::size_t dim = nc + m;
    for (int axis = 0; axis < 3; ++axis) {
        mat::Matrix kkt(dim, dim);
        mat::Vector rhs(dim, 0.0);

        for (std::size_t i = 0; i < n; ++i) {
            const mat::Matrix h = snap_gram(durations[i]);
            for (std::size_t r = 0; r < 8; ++r)
                for (std::size_t c = 0; c < 8; ++c)
                    kkt(8 * i + r, 8 * i + c) = 2.0 * h(r, c);
        }

        mat::Matrix a(m, nc);
        mat::Vector b(m, 0.0);
        std::size_t row = 0;
        const auto axis_of = [axis](const Vec3& v) {
            return axis == 0 ? v.x : (axis == 1 ? v.y : v.z);
        };

        for (std::size_t i = 0; i < n; ++i) {  // endpoint interpolation
            derivative_row(a, row, 8 * i, 0.0, 0, durations[i]);
            b[row++] = axis_of(waypoints[i]);
            derivative_row(a, row, 8 * i, 1.0, 0, durations[i]);
            b[row++] = axis_of(waypoints[i + 1]);
        }
        for (std::size_t i = 1; i < n; ++i) {  // derivative continuity, orders 1-4
            for (int o = 1; o <= 4; ++o) {
                derivative_row(a, row, 8 * (i - 1), 1.0, o, durations[i - 1]);
                const double lead = dcoef(o, o) / std::pow(durations[i], o);
                a(row, 8 * i + static_cast<std::size_t>(o)) = -lead;
                b[row++] = 0.0;
            }
        }
        derivative_row(a, row, 0, 0.0, 1, durations[0]);
        b[row++] = axis_of(bc.v_start);
        derivative_row(a, row, 0, 0.0, 2, durations[0]);
        b[row++] = axis_of(bc.a_start);
        derivative_row(a, row, 8 * (n - 1), 1.0, 1, durations[n - 1]);
        b[row++] = axis_of(bc.v_end);
        derivative_row(a, row, 8 * (n - 1), 1.0, 2, durations[n - 1]);
        b[row++] = axis_of(bc.a_end);
        if (pin_jerk) {
            derivative_row(a, row, 0, 0.0, 3, durations[0]);
            b[row++] = bc.j_start ? axis_of(*bc.j_start) : 0.0;
            derivative_row(a, row, 8 * (n - 1), 1.0, 3, durations[n - 1]);
            b[row++] = bc.j_end ? axis_of(*bc.j_end) : 0.0;
        }

        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < nc; ++c) {
                kkt(nc + r, c) = a(r, c);
                kkt(c, nc + r) = a(r, c);
            }
        for (std::size_t r = 0; r < m; ++r) rhs[nc + r] = b[r];

        mat::Vector sol = solve_linear(kkt, rhs);
        // One refinement pass keeps constraint residuals tight even when the
        // duration spread makes the KKT matrix badly scaled.
        {
            mat::Vector resid(dim, 0.0);
            for (std::size_t r = 0; r < dim; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < dim; ++c) s += kkt(r, c) * sol[c];
                resid[r] = rhs[r] - s;
            }
            const mat::Vector corr = solve_linear(kkt, resid);
            for (std::size_t i = 0; i < dim; ++i) sol[i] += corr[i];
        }

        double max_residual = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < nc; ++c) s += a(r, c) * sol[c];
            max_residual = std::max(max_residual, std::abs(s - b[r]));
        }
        if (max_residual > 1e-9 * std::max(1.0, mat::max_abs(b)))
            throw std::runtime_error("min_snap constraint residual too large: " +
                                     std::to_string(max_residual));

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 8; ++k)
                traj.segments[i].coeffs[static_cast<std::size_t>(axis)][k] = sol[8 * i + k];
    }
    return traj;
}

double snap_cost(const PolyTrajectory& traj) {
    double cost = 0.0;
    for (const auto& seg : traj.segments) {
        const mat::Matrix h = snap_gram(seg.duration);
        for (const auto& c : seg.coeffs)
            for (std::size_t j = 4; j < 8; ++j)
                for (std::size_t k = 4; k < 8; ++k) cost += c[j] * h(j, k) * c[k];
    }
    return cost;
}

Vec3 eval_traj(const PolyTrajectory& traj, double t, int order) {
    if (order < 0 || order > 4) throw std::invalid_argument("eval_traj supports orders 0-4");
    if (traj.segments.empty()) throw std::invalid_argument("empty trajectory");

    if (t > traj.total_time) {
        if (order == 0) return eval_traj(traj, traj.total_time, 0);
        return Vec3{};  // terminal hover
    }
    t = std::max(t, 0.0);

    std::size_t i = 0;
    double start = 0.0;
    while (i + 1 < traj.segments.size() && t > start + traj.segments[i].duration) {
        start += traj.segments[i].duration;
        ++i;
    }
    const auto& seg = traj.segments[i];
    const double tau = std::clamp((t - start) / seg.duration, 0.0, 1.0);
    const double scale = 1.0 / std::pow(seg.duration, order);

    Vec3 out;
    for (int axis = 0; axis < 3; ++axis) {
        double v = 0.0;
        double tp = 1.0;
        for (int k = order; k < 8; ++k) {
            v += dcoef(k, order) * seg.coeffs[static_cast<std::size_t>(axis)]
                                              [static_cast<std::size_t>(k)] * tp;
            tp *= tau;
        }
        v *= scale;
        if (axis == 0)
            out.x = v;
        else if (axis == 1)
            out.y = v;
        else
            out.z = v;
    }
    return out;
}

double desired_yaw(const PolyTrajectory& traj, double t) {
    const double step = traj.total_time / 2048.0;
    double tb = std::min(t, traj.total_time);
    while (tb >= 0.0) {
        const Vec3 v = eval_traj(traj, tb, 1);
        if (std::hypot(v.x, v.y) >= 1e-6) return std::atan2(v.y, v.x);
        tb -= step;
    }
    return 0.0;
}

}  // namespace tcbf::nominal
