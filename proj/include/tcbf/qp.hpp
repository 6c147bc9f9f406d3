#pragma once

#include <optional>
#include <vector>

#include "tcbf/matops.hpp"

namespace tcbf::qp {

/// One inequality a . u >= beta.
struct QpRow {
    mat::Vector a;
    double beta = 0.0;
};

/// min |u - u_nom|^2  s.t.  rows, box bounds. The Hessian is always the
/// identity (plain projection), which is what a minimally invasive safety
/// filter needs. Box bounds are expanded into rows internally.
///
/// If slack_weight is set and the hard problem is infeasible, the solve is
/// repeated with one shared slack variable xi >= 0 relaxing the inequality
/// rows (not the box), penalized by slack_weight * xi^2.
struct QpProblem {
    mat::Vector u_nom;
    std::vector<QpRow> rows;
    mat::Vector lower;  // empty = unbounded; -inf entries allowed
    mat::Vector upper;
    std::optional<double> slack_weight;
};

enum class QpStatus { Optimal, OptimalWithSlack, Infeasible };

struct QpSolution {
    mat::Vector u;
    QpStatus status = QpStatus::Infeasible;
    double slack = 0.0;
    /// Multipliers for the expanded row list: problem rows first, then lower
    /// bounds, then upper bounds (finite ones only, in index order).
    mat::Vector lambda;
    std::vector<std::size_t> active;
    int iterations = 0;
    int most_violated_row = -1;  // expanded-row index when infeasible
};

/// Dual active-set projection onto the feasible polyhedron. Starts from the
/// unconstrained optimum u_nom and adds violated rows one at a time; finite
/// because the dual objective strictly increases.
QpSolution qp_solve(const QpProblem& problem);

struct KktResiduals {
    double stationarity = 0.0;    // |u - u_nom - sum lambda_i a_i|_inf
    double primal = 0.0;          // max constraint violation
    double complementarity = 0.0; // max |lambda_i (a_i.u - beta_i)|
    double dual = 0.0;            // max(0, -min lambda)
};

/// Expanded-row KKT residuals of a solution, for audits and tests.
KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution);

}  // namespace tcbf::qp
