#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tcbf/vec3.hpp"

namespace tcbf::nominal {

/// Boundary derivatives pinned at the two ends of the trajectory. Velocity
/// and acceleration are always constrained; jerk only when provided.
struct BoundaryConditions {
    Vec3 v_start, a_start;
    Vec3 v_end, a_end;
    std::optional<Vec3> j_start;
    std::optional<Vec3> j_end;
};

/// Piecewise degree-7 polynomial per axis, parameterized on the unit interval
/// per segment. Value/derivative continuity holds through order 4 at the
/// interior knots.
struct PolyTrajectory {
    struct Segment {
        double duration = 0.0;
        std::array<std::array<double, 8>, 3> coeffs{};  // [axis][power]
    };
    std::vector<Segment> segments;
    std::vector<Vec3> waypoints;
    double total_time = 0.0;
};

/// duration_i = |w_{i+1} - w_i| / avg_speed, floored at 0.2 s.
std::vector<double> allocate_times(const std::vector<Vec3>& waypoints, double avg_speed);

/// Equality-constrained minimum of the integrated squared snap, solved through
/// the per-axis KKT system. Interpolates the waypoints, keeps derivatives 1-4
/// continuous at interior knots and pins the boundary derivatives.
PolyTrajectory min_snap(const std::vector<Vec3>& waypoints, const std::vector<double>& durations,
                        const BoundaryConditions& bc = {});

/// Snap objective of a trajectory, for optimality comparisons.
double snap_cost(const PolyTrajectory& traj);

/// Derivative of the given order (0-4) at time t. t is clamped to [0, T];
/// beyond T the reference holds the terminal position with zero derivatives.
Vec3 eval_traj(const PolyTrajectory& traj, double t, int order = 0);

/// Heading from the planar desired velocity; below 1e-6 m/s the last
/// well-defined heading (scanning backwards) is held, 0 if none exists.
double desired_yaw(const PolyTrajectory& traj, double t);

}  // namespace tcbf::nominal
