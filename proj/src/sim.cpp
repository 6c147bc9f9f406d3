#include "tcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcbf::sim {

namespace {

using quad::ConcreteState;
using quad::StateDeriv;
using quad::WrenchInput;

ConcreteState state_axpy(const ConcreteState& x, double h, const StateDeriv& d) {
    ConcreteState y = x;
    y.p += h * d.dp;
    y.v += h * d.dv;
    y.R = y.R + d.dR * h;
    y.omega += h * d.domega;
    return y;
}

StateDeriv combine(const StateDeriv& k1, const StateDeriv& k2, const StateDeriv& k3,
                   const StateDeriv& k4) {
    StateDeriv d;
    d.dp = (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp) / 6.0;
    d.dv = (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) / 6.0;
    d.dR = (k1.dR + k2.dR * 2.0 + k3.dR * 2.0 + k4.dR) * (1.0 / 6.0);
    d.domega = (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega) / 6.0;
    return d;
}

}  // namespace

ConcreteState rk4_quad_step(const quad::QuadParams& params, const ConcreteState& x,
                            const WrenchInput& u, double dt) {
    const StateDeriv k1 = quad::dynamics(params, x, u);
    const StateDeriv k2 = quad::dynamics(params, state_axpy(x, 0.5 * dt, k1), u);
    const StateDeriv k3 = quad::dynamics(params, state_axpy(x, 0.5 * dt, k2), u);
    const StateDeriv k4 = quad::dynamics(params, state_axpy(x, dt, k3), u);
    ConcreteState y = state_axpy(x, dt, combine(k1, k2, k3, k4));
    y.R = quad::reorthonormalize(y.R);
    return y;
}

namespace {

struct JointDeriv {
    StateDeriv d2;
    abstraction::AbstractDeriv d1;
};

JointDeriv joint_dynamics(const quad::QuadParams& params,
                          const simfn::SimulationCertificate& cert, const JointState& s,
                          const WrenchInput& u) {
    JointDeriv d;
    d.d2 = quad::dynamics(params, s.x2, u);
    const Vec3 u1 = simfn::interface_F(cert, s.x1, s.x2, u, params);
    d.d1 = abstraction::di_dynamics(s.x1, u1);
    return d;
}

JointState joint_axpy(const JointState& s, double h, const JointDeriv& d) {
    JointState y;
    y.x2 = state_axpy(s.x2, h, d.d2);
    y.x1.p = s.x1.p + h * d.d1.dp;
    y.x1.v = s.x1.v + h * d.d1.dv;
    return y;
}

}  // namespace

JointState rk4_joint_step(const quad::QuadParams& params,
                          const simfn::SimulationCertificate& cert, const JointState& s,
                          const WrenchInput& u, double dt) {
    const JointDeriv k1 = joint_dynamics(params, cert, s, u);
    const JointDeriv k2 = joint_dynamics(params, cert, joint_axpy(s, 0.5 * dt, k1), u);
    const JointDeriv k3 = joint_dynamics(params, cert, joint_axpy(s, 0.5 * dt, k2), u);
    const JointDeriv k4 = joint_dynamics(params, cert, joint_axpy(s, dt, k3), u);
    JointDeriv sum;
    sum.d2 = combine(k1.d2, k2.d2, k3.d2, k4.d2);
    sum.d1.dp = (k1.d1.dp + 2.0 * k2.d1.dp + 2.0 * k3.d1.dp + k4.d1.dp) / 6.0;
    sum.d1.dv = (k1.d1.dv + 2.0 * k2.d1.dv + 2.0 * k3.d1.dv + k4.d1.dv) / 6.0;
    JointState y = joint_axpy(s, dt, sum);
    y.x2.R = quad::reorthonormalize(y.x2.R);
    return y;
}

TrajectoryLog run(const Scenario& sc) {
    sc.validate();

    TrajectoryLog log;
    log.dt = sc.dt;
    log.n_obstacles = sc.obstacles.size();
    log.waypoints = nominal::rrt_star(sc.planner, sc.start, sc.goal, sc.obstacles);
    const auto durations = nominal::allocate_times(log.waypoints, sc.avg_speed);
    log.reference = nominal::min_snap(log.waypoints, durations);

    const auto cert = build_certificate(sc);
    TransferredBarrier barrier = build_barrier(sc, cert);
    const bool filtered = sc.mode == RunMode::Filtered;
    const bool tracked = sc.witness == WitnessKind::Tracked;

    nominal::Se3Controller controller(sc.quad, sc.controller, sc.dt);

    JointState state;
    state.x2.p = sc.start;
    state.x2.v = Vec3{};
    state.x1.p = sc.start + sc.tracked_offset_p;
    state.x1.v = sc.tracked_offset_v;

    const auto steps = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
    log.rows.reserve(steps + 1);

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        nominal::Reference ref;
        ref.p = nominal::eval_traj(log.reference, t, 0);
        ref.v = nominal::eval_traj(log.reference, t, 1);
        ref.a = nominal::eval_traj(log.reference, t, 2);
        ref.yaw = nominal::desired_yaw(log.reference, t);

        const WrenchInput u_nom = controller.compute(state.x2, ref);

        const simfn::WitnessMode mode =
            tracked ? simfn::WitnessMode::tracked_at(state.x1) : simfn::WitnessMode::exact();

        LogRow row;
        row.t = t;
        row.state = state.x2;
        row.witness_state = simfn::witness(mode, state.x2);
        row.u_nom = u_nom;
        row.v_sim = simfn::V(cert, row.witness_state, state.x2);

        WrenchInput u_cmd = u_nom;
        if (filtered) {
            const FilterResult fr =
                safety_filter(barrier, sc.quad, mode, state.x2, u_nom, sc.obstacles);
            u_cmd = fr.u;
            row.b2 = fr.b2_values;
            row.activity = fr.activity_mask;
            row.du_norm = fr.modification_norm;
            row.slack = fr.slack;
            row.qp_infeasible = fr.infeasible;
        } else {
            row.b2.reserve(sc.obstacles.size());
            for (const auto& obs : sc.obstacles) row.b2.push_back(b2(barrier, mode, state.x2, obs));
        }
        row.u_cmd = u_cmd;

        const auto mix = quad::motor_mixing(sc.quad, u_cmd);
        row.u_real = mix.realized;
        row.rotor_sq = mix.omega_sq;
        row.mix_saturated = mix.saturated;

        row.h.reserve(sc.obstacles.size());
        for (const auto& obs : sc.obstacles) {
            row.h.push_back(abstraction::h({state.x2.p, state.x2.v}, obs));
        }
        log.rows.push_back(std::move(row));

        if (k == steps) break;
        if (tracked) {
            state = rk4_joint_step(sc.quad, cert, state, mix.realized, sc.dt);
        } else {
            state.x2 = rk4_quad_step(sc.quad, state.x2, mix.realized, sc.dt);
            state.x1 = {state.x2.p, state.x2.v};
        }
        if (!state.x2.finite()) throw std::runtime_error("simulation diverged at t = " +
                                                         std::to_string(t));
    }
    return log;
}

MetricsSummary metrics(const TrajectoryLog& log, const Scenario& sc) {
    MetricsSummary m;
    m.min_true_clearance = std::numeric_limits<double>::infinity();
    m.min_inflated_clearance = std::numeric_limits<double>::infinity();
    m.min_b2_overall = std::numeric_limits<double>::infinity();
    m.min_b2_per_obstacle.assign(sc.obstacles.size(),
                                 std::numeric_limits<double>::infinity());
    if (sc.obstacles.empty()) {
        m.min_true_clearance = m.min_inflated_clearance = 0.0;
        m.min_b2_overall = 0.0;
    }

    for (const auto& row : log.rows) {
        for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
            const auto& obs = sc.obstacles[i];
            const double dist = (row.state.p - obs.center).norm();
            const double true_c = dist - obs.geometric_radius;
            const double infl_c = dist - obs.inflated_radius();
            if (true_c < m.min_true_clearance) {
                m.min_true_clearance = true_c;
                m.argmin_true_t = row.t;
            }
            if (infl_c < m.min_inflated_clearance) {
                m.min_inflated_clearance = infl_c;
                m.argmin_inflated_t = row.t;
            }
            if (i < row.b2.size()) {
                m.min_b2_per_obstacle[i] = std::min(m.min_b2_per_obstacle[i], row.b2[i]);
                if (row.b2[i] < m.min_b2_overall) {
                    m.min_b2_overall = row.b2[i];
                    m.argmin_b2_t = row.t;
                }
            }
        }
        m.intervention_energy += row.du_norm * log.dt;
        m.slack_total += row.slack * log.dt;
        m.slack_max = std::max(m.slack_max, row.slack);
        m.saturation_events += row.mix_saturated ? 1 : 0;
        m.qp_infeasible_events += row.qp_infeasible ? 1 : 0;
    }
    if (!log.rows.empty()) {
        const auto& first = log.rows.front();
        const auto& last = log.rows.back();
        m.initial_min_b2 = first.b2.empty()
                               ? 0.0
                               : *std::min_element(first.b2.begin(), first.b2.end());
        m.final_min_b2 =
            last.b2.empty() ? 0.0 : *std::min_element(last.b2.begin(), last.b2.end());
        m.final_goal_distance = (last.state.p - sc.goal).norm();
    }
    return m;
}

AuditReport audit(const TrajectoryLog& log, const Scenario& sc) {
    AuditReport rep;
    const bool filtered = sc.mode == RunMode::Filtered;
    const double eps_dt = 10.0 * log.dt;
    const auto cert = build_certificate(sc);
    const auto phi = build_margin(sc, cert);
    const auto residual = sc.margin.r_coeff > 0.0
                              ? margin::KFunction::linear(sc.margin.r_coeff)
                              : margin::KFunction::zero();

    {
        AuditCheck c;
        c.name = "rotation_orthonormality";
        c.threshold = 1e-6;
        c.worst = 0.0;
        for (const auto& row : log.rows) c.worst = std::max(c.worst, row.state.rotation_defect());
        c.pass = c.worst <= c.threshold;
        c.detail = "max |R'R - I| over the run";
        rep.checks.push_back(c);
    }

    {
        AuditCheck c;
        c.name = "lemma1_lower_bound";
        c.applicable = filtered && !sc.obstacles.empty() && log.rows.size() > 1;
        c.threshold = -eps_dt;
        c.worst = std::numeric_limits<double>::infinity();
        if (c.applicable) {
            for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
                const auto& row = log.rows[k];
                const auto& next = log.rows[k + 1];
                const double v = row.v_sim;
                const double dphi_av =
                    v <= 0.0 ? 0.0 : phi.derivative(v) * cert.alpha_v(v);
                for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
                    const double fd = (next.b2[i] - row.b2[i]) / log.dt;
                    const double b1_val =
                        abstraction::b1(row.witness_state, sc.obstacles[i], sc.cbf);
                    const double rhs = -sc.cbf.k2 * b1_val + dphi_av - residual(v);
                    c.worst = std::min(c.worst, fd - rhs);
                }
            }
            c.pass = c.worst >= c.threshold;
        }
        c.detail = "min over steps of db2/dt - (-alpha_b(b1) + phi'(V) alpha_V(V) - r(V))";
        rep.checks.push_back(c);
    }

    {
        AuditCheck c;
        c.name = "theorem2_cbf_bound";
        c.applicable = filtered && !sc.obstacles.empty() && log.rows.size() > 1;
        c.threshold = -eps_dt;
        c.worst = std::numeric_limits<double>::infinity();
        if (c.applicable) {
            for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
                for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
                    const double fd = (log.rows[k + 1].b2[i] - log.rows[k].b2[i]) / log.dt;
                    c.worst = std::min(c.worst, fd + sc.cbf.k2 * log.rows[k].b2[i]);
                }
            }
            c.pass = c.worst >= c.threshold;
        }
        c.detail = "min over steps of db2/dt + alpha_b(b2)";
        rep.checks.push_back(c);
    }

    {
        AuditCheck c;
        c.name = "forward_invariance";
        c.applicable = filtered && !sc.obstacles.empty() && !log.rows.empty();
        c.threshold = -1e-3;
        c.worst = std::numeric_limits<double>::infinity();
        if (c.applicable) {
            bool any = false;
            for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
                if (log.rows.front().b2[i] < 0.0) continue;  // started unsafe, not claimed
                any = true;
                for (const auto& row : log.rows) c.worst = std::min(c.worst, row.b2[i]);
            }
            c.applicable = any;
            c.pass = c.worst >= c.threshold;
        }
        c.detail = "min b2 over obstacles that start with b2(0) >= 0";
        rep.checks.push_back(c);
    }

    {
        AuditCheck c;
        c.name = "decay_inequality";
        c.applicable = sc.witness == WitnessKind::Tracked && log.rows.size() > 1;
        c.threshold = eps_dt;
        c.worst = 0.0;
        if (c.applicable) {
            for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
                const double fd = (log.rows[k + 1].v_sim - log.rows[k].v_sim) / log.dt;
                c.worst = std::max(c.worst, fd + cert.alpha_v(log.rows[k].v_sim));
            }
            c.pass = c.worst <= c.threshold;
        }
        c.detail = "max over steps of dV/dt + alpha_V(V)";
        rep.checks.push_back(c);
    }

    {
        AuditCheck c;
        c.name = "witness_simulation_value";
        c.applicable = sc.witness == WitnessKind::Exact;
        c.threshold = 1e-12;
        c.worst = 0.0;
        if (c.applicable) {
            for (const auto& row : log.rows) c.worst = std::max(c.worst, std::abs(row.v_sim));
            c.pass = c.worst <= c.threshold;
        }
        c.detail = "V must vanish identically on the exact witness graph";
        rep.checks.push_back(c);
    }

    rep.all_pass = true;
    for (const auto& c : rep.checks)
        if (c.applicable && !c.pass) rep.all_pass = false;
    return rep;
}

}  // namespace tcbf::sim
