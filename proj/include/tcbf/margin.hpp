#pragma once

#include <string>
#include <vector>

#include "tcbf/kfun.hpp"

namespace tcbf::margin {

/// Tolerances and grid sizes used by the synthesis routines. Defaults match
/// the documented contracts; override per call site when experimenting.
struct ToleranceConfig {
    double picard_tol = 1e-8;
    int picard_max_iter = 50;
    int picard_grid_n = 512;
    double ode_blowup = 1e12;
    double verify_tol = 1e-9;
    double quadrature_tol = 1e-12;
    double root_tol = 1e-13;
};

/// Margin function phi: value and derivative of a class-K-infinity function
/// that converts a transferred barrier into a valid one. Closed forms come
/// from the linear-rate comparison ODE; Tabulated wraps a numerical solution
/// with cubic Hermite interpolation between knots and linear extrapolation
/// outside them.
class MarginFunction {
public:
    enum class Kind { PowerLaw, LinearPlusPower, LogCase, Tabulated };

    static MarginFunction power_law(double eta, double s0, double lambda);
    static MarginFunction linear_plus_power(double eta, double s0, double lambda, double c_r,
                                            double c_v);
    static MarginFunction log_case(double eta, double s0, double c_r, double c_v);
    static MarginFunction tabulated(std::vector<double> s, std::vector<double> y,
                                    std::vector<double> yp);

    double value(double s) const;
    double derivative(double s) const;

    Kind kind() const noexcept { return kind_; }
    double eta() const noexcept { return eta_; }
    double s0() const noexcept { return s0_; }

    /// Strict increase and zero-at-zero, sampled on [lo, hi].
    bool is_class_k_on(double lo, double hi, int n = 1000) const;

private:
    MarginFunction() = default;

    Kind kind_ = Kind::PowerLaw;
    double eta_ = 0.0;
    double s0_ = 1.0;
    double lambda_ = 1.0;
    double c_r_ = 0.0;
    double c_v_ = 1.0;
    std::vector<double> grid_s_;
    std::vector<double> grid_y_;
    std::vector<double> grid_yp_;
};

/// Data of the scalar comparison ODE y' = (alpha_b(y) + r(s)) / alpha_v(s),
/// y(s0) = eta, posed on [s0, inf) with s0 > 0.
struct ComparisonProblem {
    KFunction alpha_b = KFunction::zero();
    KFunction alpha_v = KFunction::zero();
    KFunction r = KFunction::zero();
    double s0 = 1.0;
    double eta = 0.0;
};

/// Minimal margin for r == 0 and linear rates: eta * (s/s0)^lambda,
/// lambda = c_b / c_v. The same formula extends the function below s0.
MarginFunction closed_form_power(double eta, double s0, double lambda);

/// Closed form for linear alpha_b, alpha_v and linear residual r(s) = c_r s.
/// Routes |lambda - 1| < 1e-10 to the logarithmic branch.
MarginFunction closed_form_linear_r(double eta, double s0, double c_b, double c_v, double c_r);

struct PicardResult {
    MarginFunction margin;
    int iterations = 0;
    double gap = 0.0;  // sup-norm distance between the last two iterates
};

/// Fixed-point iteration for the comparison ODE on a uniform grid with
/// trapezoid quadrature. Converges for locally Lipschitz alpha_b; fails with
/// an exception after max_iter non-converged iterations.
PicardResult picard_solve(const ComparisonProblem& problem, double s_max, double tol, int max_iter,
                          int grid_n = 512);

/// Fixed-step classical RK4 tabulation of the comparison ODE. Serves as the
/// in-library oracle every closed form is checked against.
MarginFunction integrate_comparison_ode(const ComparisonProblem& problem, double s_max,
                                        double step);

/// Quadrature/root-finding solution for r == 0 via the antiderivatives
/// F(x) = int 1/alpha_b and G(s) = int 1/alpha_v:
/// y(s) = F^{-1}(F(eta) + G(s) - G(s0)). Requires eta > 0.
MarginFunction separated_solution(const ComparisonProblem& problem, double s_max, double xhat,
                                  double shat, int grid_n = 512);

struct MarginVerifyReport {
    double min_residual = 0.0;
    double argmin_s = 0.0;
    bool pass = false;
};

/// Grid check of phi'(s) alpha_v(s) - alpha_b(phi(s)) - r(s) >= -tol.
MarginVerifyReport verify_margin_inequality(const MarginFunction& phi, const KFunction& alpha_b,
                                            const KFunction& alpha_v, const KFunction& r,
                                            double s_lo, double s_hi, int grid_n,
                                            double tol = 1e-9);

struct LinearPhiResidual {
    double c_r = 0.0;
    bool valid_class_k = false;  // c_r > 0, i.e. c_phi > 0 and c_v > c_b
};

/// Residual coefficient a linear phi(s) = c_phi s needs to satisfy the margin
/// identity exactly: c_r = c_phi (c_v - c_b).
LinearPhiResidual linear_phi_residual(double c_phi, double c_b, double c_v);

struct MinimalityReport {
    bool precondition_met = false;  // candidate satisfies the margin inequality
    bool pass = false;              // candidate >= minimal solution - tol on the grid
    double min_gap = 0.0;
    double argmin_s = 0.0;
    std::string note;
};

/// Comparison-theorem check: any candidate satisfying the margin inequality
/// with candidate(s0) >= eta dominates the ODE solution pointwise.
MinimalityReport pointwise_minimality_check(const MarginFunction& candidate,
                                            const ComparisonProblem& problem, double s_max,
                                            int grid_n, double tol = 1e-9);

}  // namespace tcbf::margin
