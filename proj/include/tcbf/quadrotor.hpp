#pragma once

#include <array>
#include <stdexcept>

#include "tcbf/vec3.hpp"

namespace tcbf::quad {

/// Rigid-body quadrotor state. R is kept as a raw rotation matrix and
/// re-orthonormalized after every integration step.
struct ConcreteState {
    Vec3 p;
    Vec3 v;
    Mat3 R = Mat3::identity();
    Vec3 omega;

    bool finite() const { return p.finite() && v.finite() && R.finite() && omega.finite(); }
    double rotation_defect() const;  // max-abs of R'R - I
};

struct QuadParams {
    double mass = 1.0;      // kg
    double gravity = 9.81;  // m/s^2
    Mat3 inertia = Mat3::diag(0.01, 0.01, 0.02);  // kg m^2
    double arm_length = 0.2;   // m
    double k_f = 1.0;          // thrust coefficient, N per (rad/s)^2
    double k_m = 0.1;          // rotor drag coefficient, N m per (rad/s)^2
    double f_max = 4.0 * 9.81; // N, thrust box bound (default 4 m g)
    double m_max = 1.0;        // N m, per-axis moment box bound

    Mat3 inertia_inv() const { return inverse(inertia); }

    void validate() const {
        if (mass <= 0.0 || gravity <= 0.0 || arm_length <= 0.0 || k_f <= 0.0 || k_m <= 0.0)
            throw std::invalid_argument("quadrotor parameters must be positive");
        if (f_max <= 0.0 || m_max <= 0.0)
            throw std::invalid_argument("actuation bounds must be positive");
        const Mat3 d = inertia - inertia.transposed();
        if (d.max_abs() > 1e-12 || inertia.det() <= 0.0)
            throw std::invalid_argument("inertia must be symmetric positive definite");
    }
};

/// Total thrust along the body z-axis plus body moments.
struct WrenchInput {
    double f = 0.0;
    Vec3 M;

    bool finite() const { return std::isfinite(f) && M.finite(); }
};

struct StateDeriv {
    Vec3 dp;
    Vec3 dv;
    Mat3 dR;
    Vec3 domega;
};

Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& s);

StateDeriv dynamics(const QuadParams& params, const ConcreteState& x, const WrenchInput& u);

/// Control-affine split f2 = drift + columns * u. Only the thrust column
/// touches the translational block and only the moment columns touch the
/// body-rate block.
struct ControlAffine {
    StateDeriv drift;   // dynamics at u = 0
    Vec3 dv_df;         // R e3 / m
    Mat3 domega_dM;     // J^{-1}
};

ControlAffine control_affine(const QuadParams& params, const ConcreteState& x);

/// Gram-Schmidt projection of a near-rotation back onto SO(3).
Mat3 reorthonormalize(const Mat3& r);

struct MotorMixResult {
    std::array<double, 4> omega_sq{};  // squared rotor speeds
    bool saturated = false;            // some component was clamped at zero
    WrenchInput realized;              // wrench actually produced after clamping
};

/// Invert the mixing map (f, M) -> rotor speeds squared. Negative components
/// are clamped to zero and the realized wrench is recomputed through the
/// forward map, so the dynamics always consume something producible.
MotorMixResult motor_mixing(const QuadParams& params, const WrenchInput& u);

}  // namespace tcbf::quad
