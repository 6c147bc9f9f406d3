#include "tcbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcbf::qp {

namespace {

constexpr double kFeasTol = 1e-12;
constexpr double kDirTol = 1e-14;

std::vector<QpRow> expand_rows(const QpProblem& p) {
    const std::size_t d = p.u_nom.size();
    std::vector<QpRow> rows = p.rows;
    for (const auto& r : rows)
        if (r.a.size() != d) throw std::invalid_argument("QP row dimension mismatch");
    const auto unit = [d](std::size_t i, double sign) {
        mat::Vector e(d, 0.0);
        e[i] = sign;
        return e;
    };
    if (!p.lower.empty()) {
        if (p.lower.size() != d) throw std::invalid_argument("QP lower bound size mismatch");
        for (std::size_t i = 0; i < d; ++i)
            if (std::isfinite(p.lower[i])) rows.push_back({unit(i, 1.0), p.lower[i]});
    }
    if (!p.upper.empty()) {
        if (p.upper.size() != d) throw std::invalid_argument("QP upper bound size mismatch");
        for (std::size_t i = 0; i < d; ++i)
            if (std::isfinite(p.upper[i])) rows.push_back({unit(i, -1.0), -p.upper[i]});
    }
    if (!p.lower.empty() && !p.upper.empty()) {
        for (std::size_t i = 0; i < d; ++i)
            if (p.lower[i] > p.upper[i])
                throw std::invalid_argument("QP box bounds inconsistent (lower > upper)");
    }
    return rows;
}

struct ActiveSet {
    std::vector<std::size_t> idx;
    mat::Vector lambda;
};

/// Core solve on an explicit row list; identity Hessian, start at u0.
QpSolution solve_rows(const mat::Vector& u0, const std::vector<QpRow>& rows) {
    const std::size_t d = u0.size();
    const std::size_t m = rows.size();
    QpSolution sol;
    sol.u = u0;
    sol.lambda.assign(m, 0.0);

    ActiveSet w;
    const int max_iter = 100 * static_cast<int>(m + 1);

    for (int iter = 0; iter < max_iter; ++iter) {
        sol.iterations = iter;
        // Most violated inactive row.
        int p = -1;
        double worst = -kFeasTol;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::find(w.idx.begin(), w.idx.end(), i) != w.idx.end()) continue;
            const double s = mat::dot(rows[i].a, sol.u) - rows[i].beta;
            const double scale = std::max(1.0, std::abs(rows[i].beta));
            if (s < worst * scale) {
                worst = s / scale;
                p = static_cast<int>(i);
            }
        }
        if (p < 0) {
            sol.status = QpStatus::Optimal;
            sol.active = w.idx;
            for (std::size_t k = 0; k < w.idx.size(); ++k) sol.lambda[w.idx[k]] = w.lambda[k];
            return sol;
        }

        const mat::Vector& ap = rows[static_cast<std::size_t>(p)].a;
        double sp = mat::dot(ap, sol.u) - rows[static_cast<std::size_t>(p)].beta;
        double lambda_p = 0.0;

        // Bring row p to the boundary, dropping blocking active rows on the way.
        while (true) {
            const std::size_t k = w.idx.size();
            mat::Vector rho(k, 0.0);
            mat::Vector z = ap;
            if (k > 0) {
                mat::Matrix gram(k, k);
                mat::Vector atp(k, 0.0);
                for (std::size_t i = 0; i < k; ++i) {
                    atp[i] = mat::dot(rows[w.idx[i]].a, ap);
                    for (std::size_t j = 0; j < k; ++j)
                        gram(i, j) = mat::dot(rows[w.idx[i]].a, rows[w.idx[j]].a);
                }
                rho = mat::solve_linear(gram, atp);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t c = 0; c < d; ++c) z[c] -= rho[i] * rows[w.idx[i]].a[c];
            }
            const double z2 = mat::dot(z, z);
            const double ap2 = std::max(mat::dot(ap, ap), 1e-300);

            double t_full = std::numeric_limits<double>::infinity();
            if (z2 > kDirTol * ap2) t_full = -sp / z2;

            double t_drop = std::numeric_limits<double>::infinity();
            std::size_t drop_pos = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (rho[i] > kDirTol) {
                    const double t = w.lambda[i] / rho[i];
                    if (t < t_drop) {
                        t_drop = t;
                        drop_pos = i;
                    }
                }
            }

            const double t = std::min(t_full, t_drop);
            if (!std::isfinite(t)) {
                sol.status = QpStatus::Infeasible;
                sol.most_violated_row = p;
                sol.active = w.idx;
                for (std::size_t i = 0; i < w.idx.size(); ++i) sol.lambda[w.idx[i]] = w.lambda[i];
                return sol;
            }

            for (std::size_t c = 0; c < d; ++c) sol.u[c] += t * z[c];
            for (std::size_t i = 0; i < k; ++i) w.lambda[i] -= t * rho[i];
            lambda_p += t;
            sp += t * z2;

            if (t == t_full && t_full <= t_drop) {
                w.idx.push_back(static_cast<std::size_t>(p));
                w.lambda.push_back(lambda_p);
                break;
            }
            w.idx.erase(w.idx.begin() + static_cast<std::ptrdiff_t>(drop_pos));
            w.lambda.erase(w.lambda.begin() + static_cast<std::ptrdiff_t>(drop_pos));
        }
    }
    throw std::runtime_error("qp_solve exceeded the iteration cap");
}

}  // namespace

QpSolution qp_solve(const QpProblem& problem) {
    const auto rows = expand_rows(problem);
    QpSolution sol = solve_rows(problem.u_nom, rows);
    if (sol.status == QpStatus::Optimal || !problem.slack_weight) return sol;

    // Soft retry: extend with xi_tilde = sqrt(w) xi so the Hessian stays the
    // identity. Inequality rows receive + xi_tilde / sqrt(w); box rows do not.
    const double w = *problem.slack_weight;
    if (w <= 0.0) throw std::invalid_argument("slack weight must be positive");
    const double sw = std::sqrt(w);
    const std::size_t d = problem.u_nom.size();
    const std::size_t n_ineq = problem.rows.size();

    std::vector<QpRow> soft_rows;
    soft_rows.reserve(rows.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        QpRow r = rows[i];
        r.a.push_back(i < n_ineq ? 1.0 / sw : 0.0);
        soft_rows.push_back(std::move(r));
    }
    QpRow nonneg;
    nonneg.a.assign(d + 1, 0.0);
    nonneg.a[d] = 1.0;
    soft_rows.push_back(nonneg);

    mat::Vector u0 = problem.u_nom;
    u0.push_back(0.0);
    QpSolution ext = solve_rows(u0, soft_rows);
    if (ext.status != QpStatus::Optimal) return sol;  // genuinely infeasible

    QpSolution out;
    out.status = QpStatus::OptimalWithSlack;
    out.u.assign(ext.u.begin(), ext.u.end() - 1);
    out.slack = ext.u.back() / sw;
    out.lambda.assign(ext.lambda.begin(), ext.lambda.end() - 1);
    for (std::size_t i : ext.active)
        if (i < rows.size()) out.active.push_back(i);
    out.iterations = ext.iterations;
    return out;
}

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution) {
    const auto rows = expand_rows(problem);
    KktResiduals res;
    const std::size_t d = problem.u_nom.size();

    mat::Vector grad(d);
    for (std::size_t c = 0; c < d; ++c) grad[c] = solution.u[c] - problem.u_nom[c];
    for (std::size_t i = 0; i < rows.size() && i < solution.lambda.size(); ++i)
        for (std::size_t c = 0; c < d; ++c) grad[c] -= solution.lambda[i] * rows[i].a[c];
    res.stationarity = mat::max_abs(grad);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        double s = mat::dot(rows[i].a, solution.u) - rows[i].beta;
        if (solution.status == QpStatus::OptimalWithSlack && i < problem.rows.size())
            s += solution.slack;
        res.primal = std::max(res.primal, -s);
        if (i < solution.lambda.size()) {
            res.complementarity = std::max(res.complementarity,
                                           std::abs(solution.lambda[i] * s));
            res.dual = std::max(res.dual, -solution.lambda[i]);
        }
    }
    return res;
}

}  // namespace tcbf::qp
