#pragma once

#include <array>
#include <string>
#include <vector>

#include "tcbf/barrier.hpp"
#include "tcbf/scenario.hpp"
#include "tcbf/trajectory.hpp"

namespace tcbf::sim {

/// Classical RK4 step for a scalar ODE x' = f(t, x).
template <class F>
double rk4_scalar_step(F&& f, double t, double x, double dt) {
    const double k1 = f(t, x);
    const double k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const double k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const double k4 = f(t + dt, x + dt * k3);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// RK4 step of the rigid-body dynamics under a constant wrench. The rotation
/// is integrated as a raw matrix and projected back onto SO(3) afterwards.
quad::ConcreteState rk4_quad_step(const quad::QuadParams& params, const quad::ConcreteState& x,
                                  const quad::WrenchInput& u, double dt);

struct JointState {
    quad::ConcreteState x2;
    abstraction::AbstractState x1;
};

/// Joint step for Tracked witness mode: the shadow abstract state integrates
/// under the interface input recomputed at every RK stage.
JointState rk4_joint_step(const quad::QuadParams& params,
                          const simfn::SimulationCertificate& cert, const JointState& s,
                          const quad::WrenchInput& u, double dt);

struct LogRow {
    double t = 0.0;
    quad::ConcreteState state;
    abstraction::AbstractState witness_state;
    quad::WrenchInput u_nom;
    quad::WrenchInput u_cmd;   // post-filter
    quad::WrenchInput u_real;  // post-saturation
    std::array<double, 4> rotor_sq{};
    double v_sim = 0.0;
    unsigned activity = 0;
    double du_norm = 0.0;
    double slack = 0.0;
    bool mix_saturated = false;
    bool qp_infeasible = false;
    std::vector<double> b2;  // per obstacle
    std::vector<double> h;   // per obstacle
};

struct TrajectoryLog {
    double dt = 0.0;
    std::size_t n_obstacles = 0;
    std::vector<LogRow> rows;
    std::vector<Vec3> waypoints;        // RRT* output
    nominal::PolyTrajectory reference;  // min-snap trajectory being tracked
};

/// Full pipeline: plan, time-allocate, min-snap, then the single-rate loop
/// controller -> (filter) -> motor mixing -> RK4. Deterministic per seed.
TrajectoryLog run(const Scenario& sc);

struct MetricsSummary {
    double min_true_clearance = 0.0;
    double argmin_true_t = 0.0;
    double min_inflated_clearance = 0.0;
    double argmin_inflated_t = 0.0;
    std::vector<double> min_b2_per_obstacle;
    double min_b2_overall = 0.0;
    double argmin_b2_t = 0.0;
    double initial_min_b2 = 0.0;
    double final_min_b2 = 0.0;
    double intervention_energy = 0.0;  // integral of |u* - u_nom| dt
    double slack_total = 0.0;          // integral of slack dt
    double slack_max = 0.0;
    int saturation_events = 0;
    int qp_infeasible_events = 0;
    double final_goal_distance = 0.0;
};

MetricsSummary metrics(const TrajectoryLog& log, const Scenario& sc);

struct AuditCheck {
    std::string name;
    bool applicable = true;
    bool pass = false;
    double worst = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool all_pass = false;  // over applicable checks
};

/// Finite-difference re-verification of the barrier and decay inequalities
/// from a saved log, without re-simulating. Barrier bound checks only apply
/// to filtered runs; the decay check only constrains Tracked-witness runs
/// (V is identically zero otherwise).
AuditReport audit(const TrajectoryLog& log, const Scenario& sc);

}  // namespace tcbf::sim
