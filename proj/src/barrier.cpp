#include "tcbf/barrier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcbf {

namespace {

using abstraction::AbstractGrad;
using simfn::Vec6;

double dot6(const Vec6& a, const Vec6& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += a[i] * b[i];
    return s;
}

Vec6 grad_as_vec6(const AbstractGrad& g) {
    return {g.wrt_p.x, g.wrt_p.y, g.wrt_p.z, g.wrt_v.x, g.wrt_v.y, g.wrt_v.z};
}

/// phi'(V) * w with the convention 0 * inf = 0; on the witness graph the
/// gradient factor vanishes identically and the margin slope may blow up.
double margin_times(double dphi, double w) {
    if (w == 0.0) return 0.0;
    return dphi * w;
}

}  // namespace

TransferredBarrier make_transferred_barrier(const simfn::SimulationCertificate& certificate,
                                            const margin::MarginFunction& margin_fn,
                                            const abstraction::ExpCbfParams& cbf, double k_e,
                                            const margin::KFunction& residual,
                                            double verify_s_max) {
    cbf.validate();
    if (k_e <= 0.0) throw std::invalid_argument("k_e must be > 0");
    const auto alpha_b = margin::KFunction::linear(cbf.k2);
    const auto alpha_v = margin::KFunction::linear(certificate.c_v);
    const auto report = margin::verify_margin_inequality(margin_fn, alpha_b, alpha_v, residual,
                                                         0.0, verify_s_max, 1000);
    if (!report.pass)
        throw std::invalid_argument("margin fails the transfer inequality (min residual " +
                                    std::to_string(report.min_residual) + " at s = " +
                                    std::to_string(report.argmin_s) + ")");
    return {certificate, margin_fn, cbf, k_e, residual};
}

double b2(const TransferredBarrier& barrier, const simfn::WitnessMode& mode,
          const quad::ConcreteState& x2, const abstraction::Obstacle& obstacle) {
    const auto x1 = simfn::witness(mode, x2);
    const double v = simfn::V(barrier.certificate, x1, x2);
    return abstraction::b1(x1, obstacle, barrier.cbf) - barrier.margin_fn.value(v);
}

qp::QpRow constraint_row(const TransferredBarrier& barrier, const quad::QuadParams& params,
                         const simfn::WitnessMode& mode, const quad::ConcreteState& x2,
                         const abstraction::Obstacle& obstacle) {
    const auto x1 = simfn::witness(mode, x2);
    const double v = simfn::V(barrier.certificate, x1, x2);
    const double dphi = barrier.margin_fn.derivative(v);
    const Vec6 grad_b = grad_as_vec6(abstraction::grad_b1(x1, obstacle, barrier.cbf));
    const Vec6 grad_v_x2 = simfn::grad_V(barrier.certificate, x1, x2).wrt_x2;

    const auto ca = quad::control_affine(params, x2);

    // Thrust column of f_{2,1} through the witness Jacobian and the V gradient.
    const auto pushed_f = simfn::witness_jacobian_apply(
        mode, quad::StateDeriv{Vec3{}, ca.dv_df, Mat3::zero(), Vec3{}});
    const Vec6 pf{pushed_f.dp.x, pushed_f.dp.y, pushed_f.dp.z,
                  pushed_f.dv.x, pushed_f.dv.y, pushed_f.dv.z};
    const Vec6 gv_f{0.0, 0.0, 0.0, ca.dv_df.x, ca.dv_df.y, ca.dv_df.z};

    qp::QpRow row;
    row.a.assign(4, 0.0);
    row.a[0] = dot6(grad_b, pf) - margin_times(dphi, dot6(grad_v_x2, gv_f));
    // Moment columns have zero translational blocks, so both terms vanish and
    // a[1..3] stay 0; kept explicit for the general control-affine shape.

    const auto pushed_drift = simfn::witness_jacobian_apply(mode, ca.drift);
    const Vec6 pd{pushed_drift.dp.x, pushed_drift.dp.y, pushed_drift.dp.z,
                  pushed_drift.dv.x, pushed_drift.dv.y, pushed_drift.dv.z};
    // grad_x2 V . f_{2,0} only sees the (p, v) blocks of the drift.
    const Vec6 gv_drift{ca.drift.dp.x, ca.drift.dp.y, ca.drift.dp.z,
                        ca.drift.dv.x, ca.drift.dv.y, ca.drift.dv.z};

    const double b2_val = abstraction::b1(x1, obstacle, barrier.cbf) -
                          barrier.margin_fn.value(v);
    row.beta = -barrier.k_e * b2_val + barrier.residual(v) - dot6(grad_b, pd) +
               margin_times(dphi, dot6(grad_v_x2, gv_drift));
    return row;
}

FilterResult safety_filter(const TransferredBarrier& barrier, const quad::QuadParams& params,
                           const simfn::WitnessMode& mode, const quad::ConcreteState& x2,
                           const quad::WrenchInput& u_nom,
                           const std::vector<abstraction::Obstacle>& obstacles,
                           const FilterConfig& config) {
    FilterResult res;
    const auto x1 = simfn::witness(mode, x2);
    res.v = simfn::V(barrier.certificate, x1, x2);

    qp::QpProblem problem;
    problem.u_nom = {u_nom.f, u_nom.M.x, u_nom.M.y, u_nom.M.z};
    problem.lower = {0.0, -params.m_max, -params.m_max, -params.m_max};
    problem.upper = {params.f_max, params.m_max, params.m_max, params.m_max};
    if (config.use_slack_fallback) problem.slack_weight = config.slack_weight;

    res.b2_values.reserve(obstacles.size());
    res.min_b2 = std::numeric_limits<double>::infinity();
    bool all_slack_ok = true;
    for (const auto& obs : obstacles) {
        res.b2_values.push_back(b2(barrier, mode, x2, obs));
        res.min_b2 = std::min(res.min_b2, res.b2_values.back());
        auto row = constraint_row(barrier, params, mode, x2, obs);
        const double s = mat::dot(row.a, problem.u_nom) - row.beta;
        if (s < config.inactive_margin) all_slack_ok = false;
        problem.rows.push_back(std::move(row));
    }
    if (obstacles.empty()) res.min_b2 = std::numeric_limits<double>::infinity();

    if (all_slack_ok) {
        for (std::size_t i = 0; i < 4; ++i) {
            const double lo_ok = problem.u_nom[i] >= problem.lower[i];
            const double hi_ok = problem.u_nom[i] <= problem.upper[i];
            if (!lo_ok || !hi_ok) {
                all_slack_ok = false;
                break;
            }
        }
    }
    if (all_slack_ok) {
        res.u = u_nom;  // bit-for-bit, no QP
        return res;
    }

    const auto sol = qp::qp_solve(problem);
    res.qp_ran = true;
    res.qp_status = sol.status;
    if (sol.status == qp::QpStatus::Infeasible) {
        res.infeasible = true;
        res.u = u_nom;
        return res;
    }
    res.u.f = sol.u[0];
    res.u.M = {sol.u[1], sol.u[2], sol.u[3]};
    res.slack = sol.slack;
    for (std::size_t i : sol.active)
        if (i < obstacles.size()) res.activity_mask |= 1u << i;
    double dn = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double di = sol.u[i] - problem.u_nom[i];
        dn += di * di;
    }
    res.modification_norm = std::sqrt(dn);
    return res;
}

}  // namespace tcbf
