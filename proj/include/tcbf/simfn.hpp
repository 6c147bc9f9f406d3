#pragma once

#include <array>
#include <cstdint>

#include "tcbf/abstraction.hpp"
#include "tcbf/matops.hpp"
#include "tcbf/quadrotor.hpp"

namespace tcbf::simfn {

using abstraction::AbstractState;
using quad::ConcreteState;
using quad::QuadParams;
using quad::WrenchInput;

using Vec6 = std::array<double, 6>;

/// Position/velocity feedback gains of the control interface. The induced
/// error matrix A = [[0, I], [-Kp, -Kv]] must be Hurwitz.
struct InterfaceGains {
    Mat3 kp = Mat3::identity();
    Mat3 kv = Mat3::identity();
};

/// Quadratic tracking certificate V(x1, x2) = z'Pz with z = (p2-p1, v2-v1),
/// P solving A'P + PA = -Q. Carries the derived linear decay rate and the
/// square-root output-bound coefficient.
struct SimulationCertificate {
    InterfaceGains gains;
    mat::Matrix q;  // 6x6 symmetric PD
    mat::Matrix p;  // 6x6 symmetric PD, Lyapunov solution
    double c_v = 0.0;          // lambda_min(Q) / lambda_max(P)
    double gamma_coeff = 0.0;  // 1 / sqrt(lambda_min(P))
    double lyapunov_residual = 0.0;
    double p_eig_min = 0.0;
    double p_eig_max = 0.0;
    double q_eig_min = 0.0;

    double gamma(double v) const { return gamma_coeff * std::sqrt(std::max(v, 0.0)); }
    double alpha_v(double v) const { return c_v * v; }
};

/// How the abstract counterpart of a concrete state is produced.
///  - ExactArgmin: the minimizer of V, i.e. (p2, v2); V is identically zero
///    on the witness graph and the margin term is inert.
///  - TrackedAbstract: a shadow abstract state integrated alongside under the
///    interface input; V > 0 exercises the margin and mismatch paths.
struct WitnessMode {
    enum class Kind : std::uint8_t { ExactArgmin, TrackedAbstract };
    Kind kind = Kind::ExactArgmin;
    AbstractState tracked;  // only meaningful for TrackedAbstract

    static WitnessMode exact() { return {}; }
    static WitnessMode tracked_at(const AbstractState& x1) {
        WitnessMode m;
        m.kind = Kind::TrackedAbstract;
        m.tracked = x1;
        return m;
    }
    bool is_exact() const { return kind == Kind::ExactArgmin; }
};

SimulationCertificate build_certificate(const InterfaceGains& gains, const mat::Matrix& q);

/// Joint error coordinates z = (p2 - p1, v2 - v1).
Vec6 error_z(const AbstractState& x1, const ConcreteState& x2);

double V(const SimulationCertificate& cert, const AbstractState& x1, const ConcreteState& x2);

struct GradV {
    Vec6 wrt_x1;  // (d/dp1, d/dv1) = -2Pz
    Vec6 wrt_x2;  // (d/dp2, d/dv2) = +2Pz; attitude and rate blocks are zero
};

GradV grad_V(const SimulationCertificate& cert, const AbstractState& x1, const ConcreteState& x2);

AbstractState witness(const WitnessMode& mode, const ConcreteState& x2);

/// Pushforward of a concrete tangent through the witness map. ExactArgmin
/// selects the (v, dv) blocks; a tracked abstract state has no pointwise
/// dependence on x2, so its Jacobian is the zero map.
abstraction::AbstractDeriv witness_jacobian_apply(const WitnessMode& mode,
                                                  const quad::StateDeriv& f2);

/// Abstract acceleration produced by the control interface:
/// (f/m) R e3 - g e3 + Kp (p2-p1) + Kv (v2-v1).
Vec3 interface_F(const SimulationCertificate& cert, const AbstractState& x1,
                 const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params);

/// Dynamics mismatch DPi f2 - f1(witness, F). Identically zero in ExactArgmin
/// mode; generally nonzero for a tracked abstract state.
Vec6 mismatch_delta(const SimulationCertificate& cert, const WitnessMode& mode,
                    const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params);

struct DecayReport {
    double v = 0.0;
    double vdot = 0.0;
    double residual = 0.0;    // vdot + alpha_v(V); PASS iff <= 1e-9 (1 + |vdot|)
    double output_gap = 0.0;  // |p2 - p1| - gamma(V); PASS iff <= 1e-12
    bool pass = false;
};

DecayReport check_decay(const SimulationCertificate& cert, const AbstractState& x1,
                        const ConcreteState& x2, const WrenchInput& u2, const QuadParams& params);

/// Sampled suprema used to eyeball the stationarity / approximate-pushforward
/// residual bounds. These are Monte Carlo estimates over a box, reported as
/// evidence only, never as certificates.
struct MismatchBoundEstimate {
    double sup_grad_b1_delta = 0.0;      // sup |grad b1 . delta|
    double sup_ratio_vs_v = 0.0;         // sup |grad b1 . delta| / max(V, eps)
    double sup_combined = 0.0;           // sup |(grad b1 - phi' grad V) . delta|
    double sup_combined_ratio = 0.0;
    int samples = 0;
};

}  // namespace tcbf::simfn
