#include "tcbf/quadrotor.hpp"

#include <cmath>

namespace tcbf::quad {

double ConcreteState::rotation_defect() const {
    return max_abs_diff(R.transposed() * R, Mat3::identity());
}

Mat3 hat(const Vec3& w) {
    Mat3 s;
    s(0, 1) = -w.z;
    s(0, 2) = w.y;
    s(1, 0) = w.z;
    s(1, 2) = -w.x;
    s(2, 0) = -w.y;
    s(2, 1) = w.x;
    return s;
}

Vec3 vee(const Mat3& s) { return {s(2, 1), s(0, 2), s(1, 0)}; }

StateDeriv dynamics(const QuadParams& params, const ConcreteState& x, const WrenchInput& u) {
    StateDeriv d;
    d.dp = x.v;
    d.dv = Vec3{0.0, 0.0, -params.gravity} + (u.f / params.mass) * x.R.col(2);
    d.dR = x.R * hat(x.omega);
    const Vec3 j_omega = params.inertia * x.omega;
    d.domega = params.inertia_inv() * (u.M - x.omega.cross(j_omega));
    return d;
}

ControlAffine control_affine(const QuadParams& params, const ConcreteState& x) {
    ControlAffine ca;
    ca.drift = dynamics(params, x, WrenchInput{});
    ca.dv_df = x.R.col(2) / params.mass;
    ca.domega_dM = params.inertia_inv();
    return ca;
}

Mat3 reorthonormalize(const Mat3& r) {
    Vec3 c0 = r.col(0);
    c0 = c0 / c0.norm();
    Vec3 c1 = r.col(1);
    c1 = c1 - c0 * c1.dot(c0);
    c1 = c1 / c1.norm();
    const Vec3 c2 = c0.cross(c1);
    return Mat3::from_cols(c0, c1, c2);
}

MotorMixResult motor_mixing(const QuadParams& params, const WrenchInput& u) {
    const double kf = params.k_f;
    const double km = params.k_m;
    const double l = params.arm_length;
    // Mixing matrix rows: thrust, roll, pitch, yaw.
    //   [ kf    kf   kf    kf ]
    //   [ 0     kf l 0    -kf l ]
    //   [-kf l  0    kf l  0 ]
    //   [-km    km  -km    km ]
    // Analytic inverse of the fixed sparsity pattern:
    MotorMixResult res;
    const double f = u.f;
    const double mx = u.M.x;
    const double my = u.M.y;
    const double mz = u.M.z;
    res.omega_sq[0] = 0.25 * (f / kf - 2.0 * my / (kf * l) - mz / km);
    res.omega_sq[1] = 0.25 * (f / kf + 2.0 * mx / (kf * l) + mz / km);
    res.omega_sq[2] = 0.25 * (f / kf + 2.0 * my / (kf * l) - mz / km);
    res.omega_sq[3] = 0.25 * (f / kf - 2.0 * mx / (kf * l) + mz / km);

    for (double& w : res.omega_sq) {
        if (w < 0.0) {
            w = 0.0;
            res.saturated = true;
        }
    }

    if (!res.saturated) {
        res.realized = u;
        return res;
    }
    const auto& w = res.omega_sq;
    res.realized.f = kf * (w[0] + w[1] + w[2] + w[3]);
    res.realized.M = {kf * l * (w[1] - w[3]), kf * l * (w[2] - w[0]),
                      km * (-w[0] + w[1] - w[2] + w[3])};
    return res;
}

}  // namespace tcbf::quad
