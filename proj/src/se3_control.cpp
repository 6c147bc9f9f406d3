#include "tcbf/se3_control.hpp"

#include <cmath>

namespace tcbf::nominal {

quad::WrenchInput Se3Controller::compute(const quad::ConcreteState& x, const Reference& ref) {
    const Vec3 e_p = x.p - ref.p;
    const Vec3 e_v = x.v - ref.v;

    const Vec3 f_des = params_.mass * (ref.a + Vec3{0.0, 0.0, params_.gravity}) -
                       gains_.kp_pos * e_p - gains_.kv_vel * e_v;
    const double f_norm = f_des.norm();
    if (f_norm <= 1e-9)
        throw std::runtime_error("SE(3) controller: degenerate desired force");

    const Vec3 b_zd = f_des / f_norm;
    const Vec3 heading{std::cos(ref.yaw), std::sin(ref.yaw), 0.0};
    Mat3 r_d;
    const Vec3 cross = b_zd.cross(heading);
    if (cross.norm() <= 1e-9) {
        // Desired thrust parallel to the heading: yaw is momentarily
        // unconstrained, keep the previous desired attitude.
        if (!prev_rd_) throw std::runtime_error("SE(3) controller: yaw singularity at startup");
        r_d = *prev_rd_;
    } else {
        const Vec3 b_yd = cross / cross.norm();
        const Vec3 b_xd = b_yd.cross(b_zd);
        r_d = Mat3::from_cols(b_xd, b_yd, b_zd);
    }

    const Mat3 err = r_d.transposed() * x.R - x.R.transposed() * r_d;
    const Vec3 e_r = 0.5 * quad::vee(err);

    Vec3 omega_d;
    if (prev_rd_) {
        const Mat3 rd_dot = (r_d - *prev_rd_) * (1.0 / rate_dt_);
        const Mat3 w = r_d.transposed() * rd_dot;
        omega_d = quad::vee((w - w.transposed()) * 0.5);
    }
    prev_rd_ = r_d;

    const Vec3 e_omega = x.omega - x.R.transposed() * r_d * omega_d;

    quad::WrenchInput u;
    u.f = f_des.dot(x.R.col(2));
    u.M = params_.inertia * (-gains_.kr_att * e_r - gains_.komega_rate * e_omega);
    return u;
}

}  // namespace tcbf::nominal
