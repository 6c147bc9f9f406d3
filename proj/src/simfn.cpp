#include "tcbf/simfn.hpp"

#include <cmath>
#include <stdexcept>

namespace tcbf::simfn {

namespace {

mat::Matrix interface_error_matrix(const InterfaceGains& g) {
    mat::Matrix a(6, 6);
    for (int i = 0; i < 3; ++i) a(static_cast<std::size_t>(i), static_cast<std::size_t>(i + 3)) = 1.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            a(static_cast<std::size_t>(r + 3), static_cast<std::size_t>(c)) = -g.kp(r, c);
            a(static_cast<std::size_t>(r + 3), static_cast<std::size_t>(c + 3)) = -g.kv(r, c);
        }
    return a;
}

Vec6 mat_vec6(const mat::Matrix& m, const Vec6& x) {
    Vec6 y{};
    for (std::size_t r = 0; r < 6; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 6; ++c) s += m(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

double dot6(const Vec6& a, const Vec6& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += a[i] * b[i];
    return s;
}

Vec3 accel(const QuadParams& params, const ConcreteState& x2, const WrenchInput& u2) {
    return Vec3{0.0, 0.0, -params.gravity} + (u2.f / params.mass) * x2.R.col(2);
}

}  // namespace

SimulationCertificate build_certificate(const InterfaceGains& gains, const mat::Matrix& q) {
    if (q.rows() != 6 || q.cols() != 6)
        throw std::invalid_argument("certificate Q must be 6x6");
    if (!q.is_symmetric(1e-12)) throw std::invalid_argument("certificate Q must be symmetric");
    if (!mat::is_positive_definite(q))
        throw std::invalid_argument("certificate Q must be positive definite");

    const mat::Matrix a = interface_error_matrix(gains);
    if (!mat::is_hurwitz(a))
        throw std::invalid_argument("interface gains do not yield a Hurwitz error matrix");

    SimulationCertificate cert;
    cert.gains = gains;
    cert.q = q;
    cert.p = mat::solve_lyapunov(a, q);
    cert.lyapunov_residual = (a.transposed() * cert.p + cert.p * a + q).max_abs();

    const auto p_eig = mat::sym_eig(cert.p);
    const auto q_eig = mat::sym_eig(q);
    cert.p_eig_min = p_eig.eigenvalues.front();
    cert.p_eig_max = p_eig.eigenvalues.back();
    cert.q_eig_min = q_eig.eigenvalues.front();
    if (cert.p_eig_min <= 0.0)
        throw std::runtime_error("Lyapunov solution is not positive definite");
    cert.c_v = cert.q_eig_min / cert.p_eig_max;
    cert.gamma_coeff = 1.0 / std::sqrt(cert.p_eig_min);
    return cert;
}

Vec6 error_z(const AbstractState& x1, const ConcreteState& x2) {
    const Vec3 ep = x2.p - x1.p;
    const Vec3 ev = x2.v - x1.v;
    return {ep.x, ep.y, ep.z, ev.x, ev.y, ev.z};
}

double V(const SimulationCertificate& cert, const AbstractState& x1, const ConcreteState& x2) {
    const Vec6 z = error_z(x1, x2);
    return dot6(z, mat_vec6(cert.p, z));
}

GradV grad_V(const SimulationCertificate& cert, const AbstractState& x1,
             const ConcreteState& x2) {
    const Vec6 z = error_z(x1, x2);
    const Vec6 pz = mat_vec6(cert.p, z);
    GradV g;
    for (std::size_t i = 0; i < 6; ++i) {
        g.wrt_x2[i] = 2.0 * pz[i];
        g.wrt_x1[i] = -2.0 * pz[i];
    }
    return g;
}

AbstractState witness(const WitnessMode& mode, const ConcreteState& x2) {
    if (mode.is_exact()) return {x2.p, x2.v};
    return mode.tracked;
}

abstraction::AbstractDeriv witness_jacobian_apply(const WitnessMode& mode,
                                                  const quad::StateDeriv& f2) {
    if (mode.is_exact()) return {f2.dp, f2.dv};
    return {};
}

Vec3 interface_F(const SimulationCertificate& cert, const AbstractState& x1,
                 const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params) {
    const Vec3 ep = x2.p - x1.p;
    const Vec3 ev = x2.v - x1.v;
    return accel(params, x2, u2) + cert.gains.kp * ep + cert.gains.kv * ev;
}

Vec6 mismatch_delta(const SimulationCertificate& cert, const WitnessMode& mode,
                    const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params) {
    const AbstractState x1 = witness(mode, x2);
    const auto pushed = witness_jacobian_apply(mode, quad::dynamics(params, x2, u2));
    const Vec3 u1 = interface_F(cert, x1, x2, u2, params);
    const auto f1 = abstraction::di_dynamics(x1, u1);
    const Vec3 dp = pushed.dp - f1.dp;
    const Vec3 dv = pushed.dv - f1.dv;
    return {dp.x, dp.y, dp.z, dv.x, dv.y, dv.z};
}

DecayReport check_decay(const SimulationCertificate& cert, const AbstractState& x1,
                        const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params) {
    DecayReport rep;
    rep.v = V(cert, x1, x2);

    const Vec3 u1 = interface_F(cert, x1, x2, u2, params);
    const auto f1 = abstraction::di_dynamics(x1, u1);
    const Vec3 a2 = accel(params, x2, u2);
    // zdot = (v2 - v1, a2 - u1); Vdot = 2 z'P zdot
    const Vec6 z = error_z(x1, x2);
    const Vec6 zdot{x2.v.x - f1.dp.x, x2.v.y - f1.dp.y, x2.v.z - f1.dp.z,
                    a2.x - f1.dv.x,   a2.y - f1.dv.y,   a2.z - f1.dv.z};
    rep.vdot = 2.0 * dot6(mat_vec6(cert.p, z), zdot);
    rep.residual = rep.vdot + cert.alpha_v(rep.v);
    rep.output_gap = (x2.p - x1.p).norm() - cert.gamma(rep.v);
    rep.pass = rep.residual <= 1e-9 * (1.0 + std::abs(rep.vdot)) && rep.output_gap <= 1e-12;
    return rep;
}

}  // namespace tcbf::simfn
