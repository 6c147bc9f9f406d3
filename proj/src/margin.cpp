#include "tcbf/margin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace tcbf::margin {

namespace {

double hermite_eval(double s, const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<double>& yps, bool want_derivative) {
    if (s <= xs.front()) {
        return want_derivative ? yps.front() : ys.front() + yps.front() * (s - xs.front());
    }
    if (s >= xs.back()) {
        return want_derivative ? yps.back() : ys.back() + yps.back() * (s - xs.back());
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double h = xs[i + 1] - xs[i];
    const double t = (s - xs[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    if (!want_derivative) {
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * ys[i] + h10 * h * yps[i] + h01 * ys[i + 1] + h11 * h * yps[i + 1];
    }
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * ys[i] + d10 * yps[i] + d01 * ys[i + 1] + d11 * yps[i + 1];
}

double ode_rhs(const ComparisonProblem& p, double s, double y) {
    const double av = p.alpha_v(s);
    if (av <= 0.0)
        throw std::runtime_error("alpha_v vanishes at s = " + std::to_string(s) +
                                 "; comparison ODE undefined");
    return (p.alpha_b(std::max(y, 0.0)) + p.r(s)) / av;
}

void check_problem(const ComparisonProblem& p) {
    if (p.s0 <= 0.0) throw std::invalid_argument("comparison problem needs s0 > 0");
    if (p.eta < 0.0) throw std::invalid_argument("comparison problem needs eta >= 0");
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fb, double fm, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, fm, flm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    const double mid = 0.5 * (lo + hi);
    return sign * adaptive_simpson(f, lo, hi, f(lo), f(hi), f(mid), tol, 48);
}

}  // namespace

MarginFunction MarginFunction::power_law(double eta, double s0, double lambda) {
    if (s0 <= 0.0) throw std::invalid_argument("margin power law needs s0 > 0");
    if (lambda <= 0.0) throw std::invalid_argument("margin power law needs lambda > 0");
    if (eta < 0.0) throw std::invalid_argument("margin power law needs eta >= 0");
    MarginFunction m;
    m.kind_ = Kind::PowerLaw;
    m.eta_ = eta;
    m.s0_ = s0;
    m.lambda_ = lambda;
    return m;
}

MarginFunction MarginFunction::linear_plus_power(double eta, double s0, double lambda, double c_r,
                                                 double c_v) {
    if (s0 <= 0.0 || lambda <= 0.0 || c_v <= 0.0 || c_r < 0.0 || eta < 0.0)
        throw std::invalid_argument("linear_plus_power margin parameter out of range");
    if (std::abs(lambda - 1.0) < 1e-10)
        throw std::invalid_argument("lambda == 1 belongs to the log branch");
    MarginFunction m;
    m.kind_ = Kind::LinearPlusPower;
    m.eta_ = eta;
    m.s0_ = s0;
    m.lambda_ = lambda;
    m.c_r_ = c_r;
    m.c_v_ = c_v;
    return m;
}

MarginFunction MarginFunction::log_case(double eta, double s0, double c_r, double c_v) {
    if (s0 <= 0.0 || c_v <= 0.0 || c_r < 0.0 || eta < 0.0)
        throw std::invalid_argument("log_case margin parameter out of range");
    MarginFunction m;
    m.kind_ = Kind::LogCase;
    m.eta_ = eta;
    m.s0_ = s0;
    m.lambda_ = 1.0;
    m.c_r_ = c_r;
    m.c_v_ = c_v;
    return m;
}

MarginFunction MarginFunction::tabulated(std::vector<double> s, std::vector<double> y,
                                         std::vector<double> yp) {
    if (s.size() < 2 || s.size() != y.size() || s.size() != yp.size())
        throw std::invalid_argument("tabulated margin needs >= 2 matching samples");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) throw std::invalid_argument("tabulated margin grid must increase");
    MarginFunction m;
    m.kind_ = Kind::Tabulated;
    m.s0_ = s.front();
    m.eta_ = y.front();
    m.grid_s_ = std::move(s);
    m.grid_y_ = std::move(y);
    m.grid_yp_ = std::move(yp);
    return m;
}

double MarginFunction::value(double s) const {
    switch (kind_) {
        case Kind::PowerLaw:
            return s <= 0.0 ? 0.0 : eta_ * std::pow(s / s0_, lambda_);
        case Kind::LinearPlusPower: {
            if (s <= 0.0) return 0.0;
            const double pw = std::pow(s / s0_, lambda_);
            return eta_ * pw +
                   c_r_ / (c_v_ * (1.0 - lambda_)) * (s - pw * s0_);
        }
        case Kind::LogCase:
            return s <= 0.0 ? 0.0 : eta_ * s / s0_ + (c_r_ / c_v_) * s * std::log(s / s0_);
        case Kind::Tabulated:
            return hermite_eval(s, grid_s_, grid_y_, grid_yp_, false);
    }
    return 0.0;
}

double MarginFunction::derivative(double s) const {
    switch (kind_) {
        case Kind::PowerLaw: {
            if (s <= 0.0) {
                if (lambda_ > 1.0) return 0.0;
                if (lambda_ == 1.0) return eta_ / s0_;
                return eta_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            }
            return eta_ * lambda_ / s0_ * std::pow(s / s0_, lambda_ - 1.0);
        }
        case Kind::LinearPlusPower: {
            const double k = c_r_ / (c_v_ * (1.0 - lambda_));
            if (s <= 0.0) {
                if (lambda_ > 1.0) return k;
                const double lead = eta_ / s0_ - k;  // sign of the (s/s0)^(lambda-1) blow-up
                if (lead == 0.0) return k;
                return std::copysign(std::numeric_limits<double>::infinity(), lead);
            }
            const double pw = std::pow(s / s0_, lambda_ - 1.0);
            return eta_ * lambda_ / s0_ * pw + k * (1.0 - lambda_ * pw);
        }
        case Kind::LogCase:
            if (s <= 0.0) return -std::numeric_limits<double>::infinity();
            return eta_ / s0_ + (c_r_ / c_v_) * (std::log(s / s0_) + 1.0);
        case Kind::Tabulated:
            return hermite_eval(s, grid_s_, grid_y_, grid_yp_, true);
    }
    return 0.0;
}

bool MarginFunction::is_class_k_on(double lo, double hi, int n) const {
    if (std::abs(value(0.0)) > 1e-9) return false;
    double prev = value(lo);
    for (int i = 1; i < n; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = value(s);
        if (v <= prev) return false;
        prev = v;
    }
    return true;
}

MarginFunction closed_form_power(double eta, double s0, double lambda) {
    return MarginFunction::power_law(eta, s0, lambda);
}

MarginFunction closed_form_linear_r(double eta, double s0, double c_b, double c_v, double c_r) {
    if (s0 <= 0.0) throw std::invalid_argument("closed_form_linear_r needs s0 > 0");
    if (c_b <= 0.0 || c_v <= 0.0)
        throw std::invalid_argument("closed_form_linear_r needs c_b > 0 and c_v > 0");
    if (c_r < 0.0) throw std::invalid_argument("closed_form_linear_r needs c_r >= 0");
    const double lambda = c_b / c_v;
    if (c_r == 0.0) return MarginFunction::power_law(eta, s0, lambda);
    if (std::abs(lambda - 1.0) < 1e-10) return MarginFunction::log_case(eta, s0, c_r, c_v);
    return MarginFunction::linear_plus_power(eta, s0, lambda, c_r, c_v);
}

MarginFunction integrate_comparison_ode(const ComparisonProblem& problem, double s_max,
                                        double step) {
    check_problem(problem);
    if (step <= 0.0) throw std::invalid_argument("integrate_comparison_ode needs step > 0");
    if (s_max < problem.s0) throw std::invalid_argument("s_max must be >= s0");

    ToleranceConfig cfg;
    std::vector<double> xs{problem.s0};
    std::vector<double> ys{problem.eta};
    std::vector<double> yps{ode_rhs(problem, problem.s0, problem.eta)};

    double s = problem.s0;
    double y = problem.eta;
    while (s < s_max - 1e-15 * std::max(1.0, s_max)) {
        const double h = std::min(step, s_max - s);
        const double k1 = ode_rhs(problem, s, y);
        const double k2 = ode_rhs(problem, s + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = ode_rhs(problem, s + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = ode_rhs(problem, s + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
        if (!std::isfinite(y) || std::abs(y) > cfg.ode_blowup)
            throw std::runtime_error("comparison ODE blow-up; last valid s = " +
                                     std::to_string(xs.back()));
        xs.push_back(s);
        ys.push_back(y);
        yps.push_back(ode_rhs(problem, s, y));
    }
    if (xs.size() < 2) {  // degenerate interval [s0, s0]
        xs.push_back(problem.s0 * (1.0 + 1e-9) + 1e-15);
        ys.push_back(y);
        yps.push_back(yps.front());
    }
    return MarginFunction::tabulated(std::move(xs), std::move(ys), std::move(yps));
}

PicardResult picard_solve(const ComparisonProblem& problem, double s_max, double tol, int max_iter,
                          int grid_n) {
    check_problem(problem);
    if (tol <= 0.0) throw std::invalid_argument("picard_solve needs tol > 0");
    if (grid_n < 2) throw std::invalid_argument("picard_solve needs grid_n >= 2");
    if (s_max <= problem.s0) throw std::invalid_argument("s_max must exceed s0");

    const std::size_t n = static_cast<std::size_t>(grid_n);
    std::vector<double> xs(n);
    const double h = (s_max - problem.s0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) xs[i] = problem.s0 + h * static_cast<double>(i);

    std::vector<double> y(n, problem.eta);  // y_0 == eta
    std::vector<double> g(n), next(n);
    double gap = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) g[i] = ode_rhs(problem, xs[i], y[i]);
        next[0] = problem.eta;
        for (std::size_t i = 1; i < n; ++i)
            next[i] = next[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
        gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(next[i] - y[i]));
        y.swap(next);
        if (gap <= tol) {
            ++iter;
            break;
        }
    }
    if (gap > tol)
        throw std::runtime_error("picard_solve did not converge after " +
                                 std::to_string(max_iter) + " iterations (gap " +
                                 std::to_string(gap) + ")");
    for (std::size_t i = 0; i < n; ++i) g[i] = ode_rhs(problem, xs[i], y[i]);
    PicardResult res{MarginFunction::tabulated(std::move(xs), std::move(y), std::move(g)), iter,
                     gap};
    return res;
}

MarginFunction separated_solution(const ComparisonProblem& problem, double s_max, double xhat,
                                  double shat, int grid_n) {
    check_problem(problem);
    if (!problem.r.is_zero())
        throw std::invalid_argument("separated_solution requires r == 0");
    if (problem.eta <= 0.0)
        throw std::invalid_argument(
            "separated_solution rejects eta = 0: F(x) = int 1/alpha_b diverges at 0");
    if (xhat <= 0.0 || shat <= 0.0)
        throw std::invalid_argument("separated_solution needs positive reference points");
    if (grid_n < 2 || s_max < problem.s0)
        throw std::invalid_argument("separated_solution grid out of range");

    ToleranceConfig cfg;
    const auto inv_ab = [&](double u) { return 1.0 / problem.alpha_b(u); };
    const auto inv_av = [&](double t) { return 1.0 / problem.alpha_v(t); };
    const auto F = [&](double x) { return integrate(inv_ab, xhat, x, cfg.quadrature_tol); };
    const auto G = [&](double s) { return integrate(inv_av, shat, s, cfg.quadrature_tol); };

    const double f_eta = F(problem.eta);
    const double g_s0 = G(problem.s0);

    // Monotone inversion of F by bracketed Newton (F' = 1/alpha_b > 0).
    const auto f_inverse = [&](double w, double guess) {
        double lo = guess;
        double hi = guess;
        double f_lo = F(lo);
        while (f_lo > w) {
            lo *= 0.5;
            if (lo < 1e-300) throw std::runtime_error("separated_solution: F inversion underflow");
            f_lo = F(lo);
        }
        double f_hi = F(hi);
        while (f_hi < w) {
            hi *= 2.0;
            if (hi > 1e300) throw std::runtime_error("separated_solution: F inversion overflow");
            f_hi = F(hi);
        }
        double x = std::clamp(guess, lo, hi);
        for (int it = 0; it < 200; ++it) {
            const double fx = F(x);
            if (std::abs(fx - w) <= cfg.root_tol * (1.0 + std::abs(w)) &&
                (hi - lo) <= 1e-12 * std::max(1.0, x))
                break;
            if (fx < w)
                lo = x;
            else
                hi = x;
            double xn = x + (w - fx) * problem.alpha_b(x);  // Newton with F' = 1/alpha_b
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (std::abs(xn - x) <= 1e-16 * std::max(1.0, std::abs(x))) {
                x = xn;
                break;
            }
            x = xn;
        }
        return x;
    };

    const std::size_t n = static_cast<std::size_t>(grid_n);
    std::vector<double> xs(n), ys(n), yps(n);
    const double span = s_max - problem.s0;
    double guess = problem.eta;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = n == 1 ? problem.s0
                                : problem.s0 + span * static_cast<double>(i) /
                                      static_cast<double>(n - 1);
        xs[i] = s;
        const double w = f_eta + G(s) - g_s0;
        const double y = i == 0 ? problem.eta : f_inverse(w, guess);
        guess = y;
        ys[i] = y;
        yps[i] = ode_rhs(problem, s, y);
    }
    return MarginFunction::tabulated(std::move(xs), std::move(ys), std::move(yps));
}

MarginVerifyReport verify_margin_inequality(const MarginFunction& phi, const KFunction& alpha_b,
                                            const KFunction& alpha_v, const KFunction& r,
                                            double s_lo, double s_hi, int grid_n, double tol) {
    if (grid_n < 100) throw std::invalid_argument("verify_margin_inequality needs grid_n >= 100");
    MarginVerifyReport rep;
    rep.min_residual = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
        const double s =
            s_lo + (s_hi - s_lo) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
        const double av = alpha_v(s);
        const double dp = phi.derivative(s);
        // phi' may be +inf where alpha_v vanishes; the product is defined as 0 there.
        const double lead = av == 0.0 ? 0.0 : dp * av;
        const double res = lead - alpha_b(phi.value(s)) - r(s);
        if (res < rep.min_residual) {
            rep.min_residual = res;
            rep.argmin_s = s;
        }
    }
    rep.pass = rep.min_residual >= -tol;
    return rep;
}

LinearPhiResidual linear_phi_residual(double c_phi, double c_b, double c_v) {
    LinearPhiResidual out;
    out.c_r = c_phi * (c_v - c_b);
    out.valid_class_k = out.c_r > 0.0 && c_phi > 0.0;
    return out;
}

MinimalityReport pointwise_minimality_check(const MarginFunction& candidate,
                                            const ComparisonProblem& problem, double s_max,
                                            int grid_n, double tol) {
    check_problem(problem);
    MinimalityReport rep;
    const auto verify = verify_margin_inequality(candidate, problem.alpha_b, problem.alpha_v,
                                                 problem.r, problem.s0, s_max,
                                                 std::max(grid_n, 100), tol);
    rep.precondition_met = verify.pass && candidate.value(problem.s0) >= problem.eta - tol;
    if (!rep.precondition_met)
        rep.note = "precondition unmet: candidate fails the margin inequality or starts below eta";

    const double step = (s_max - problem.s0) / 2048.0;
    const MarginFunction y = integrate_comparison_ode(problem, s_max, std::max(step, 1e-9));
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
        const double s = problem.s0 + (s_max - problem.s0) * static_cast<double>(i) /
                                          static_cast<double>(grid_n - 1);
        const double gap = candidate.value(s) - y.value(s);
        if (gap < rep.min_gap) {
            rep.min_gap = gap;
            rep.argmin_s = s;
        }
    }
    rep.pass = rep.min_gap >= -tol;
    return rep;
}

}  // namespace tcbf::margin
