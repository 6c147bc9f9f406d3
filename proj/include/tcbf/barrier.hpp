#pragma once

#include <vector>

#include "tcbf/abstraction.hpp"
#include "tcbf/margin.hpp"
#include "tcbf/qp.hpp"
#include "tcbf/simfn.hpp"

namespace tcbf {

/// Barrier transferred from the double integrator to the quadrotor:
/// b2(x2) = b1(witness(x2)) - phi(V(witness(x2), x2)), enforced through the
/// constraint rows of the safety QP.
struct TransferredBarrier {
    simfn::SimulationCertificate certificate;
    margin::MarginFunction margin_fn;
    abstraction::ExpCbfParams cbf;
    double k_e = 1.0;  // rate alpha_e(s) = k_e s used in the QP right-hand side
    margin::KFunction residual = margin::KFunction::zero();  // r term, zero under H1
};

/// Builds the barrier and verifies the margin inequality for this pairing of
/// alpha_b (= k2 s), the certificate's alpha_V and the configured residual.
/// Throws if the margin fails the sampled check.
TransferredBarrier make_transferred_barrier(const simfn::SimulationCertificate& certificate,
                                            const margin::MarginFunction& margin_fn,
                                            const abstraction::ExpCbfParams& cbf, double k_e,
                                            const margin::KFunction& residual,
                                            double verify_s_max = 10.0);

double b2(const TransferredBarrier& barrier, const simfn::WitnessMode& mode,
          const quad::ConcreteState& x2, const abstraction::Obstacle& obstacle);

/// One QP row a . (f, M) >= beta for one obstacle. With the exact witness the
/// moment entries vanish and the thrust coefficient is grad_v b1 . R e3 / m.
qp::QpRow constraint_row(const TransferredBarrier& barrier, const quad::QuadParams& params,
                         const simfn::WitnessMode& mode, const quad::ConcreteState& x2,
                         const abstraction::Obstacle& obstacle);

struct FilterConfig {
    double slack_weight = 1e6;
    bool use_slack_fallback = true;
    double inactive_margin = 1e-9;  // rows this slack above the bound skip the QP
};

struct FilterResult {
    quad::WrenchInput u;             // safe input
    std::vector<double> b2_values;   // per obstacle
    double min_b2 = 0.0;
    double v = 0.0;
    unsigned activity_mask = 0;      // bit i set when row i is active at the optimum
    double modification_norm = 0.0;  // |u - u_nom| over the (f, M) 4-vector
    double slack = 0.0;
    bool qp_ran = false;
    bool infeasible = false;
    qp::QpStatus qp_status = qp::QpStatus::Optimal;
};

/// Safety filter: witness, simulation value, margin terms, one constraint row
/// per obstacle, box bounds from the plant limits, then the projection QP.
/// When every row already holds at u_nom with slack, u_nom is returned
/// bit-for-bit and no QP is solved.
FilterResult safety_filter(const TransferredBarrier& barrier, const quad::QuadParams& params,
                           const simfn::WitnessMode& mode, const quad::ConcreteState& x2,
                           const quad::WrenchInput& u_nom,
                           const std::vector<abstraction::Obstacle>& obstacles,
                           const FilterConfig& config = {});

}  // namespace tcbf
