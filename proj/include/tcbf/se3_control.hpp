#pragma once

#include <optional>
#include <stdexcept>

#include "tcbf/quadrotor.hpp"
#include "tcbf/vec3.hpp"

namespace tcbf::nominal {

struct Se3Gains {
    double kp_pos = 16.0;
    double kv_vel = 8.0;
    double kr_att = 500.0;
    double komega_rate = 60.0;

    void validate() const {
        if (kp_pos <= 0.0 || kv_vel <= 0.0 || kr_att <= 0.0 || komega_rate <= 0.0)
            throw std::invalid_argument("SE(3) gains must be positive");
    }
};

/// Reference sample handed to the controller each tick.
struct Reference {
    Vec3 p;
    Vec3 v;
    Vec3 a;
    double yaw = 0.0;
};

/// Geometric tracking controller. Builds the desired force from the position
/// and velocity errors, turns it into a desired attitude together with the
/// yaw heading, and produces thrust along the current body z-axis plus a
/// moment from the rotation and rate errors. The desired angular rate is
/// recovered by finite-differencing the desired rotation at the controller
/// rate, so the controller keeps the previous desired rotation as state.
class Se3Controller {
public:
    Se3Controller(const quad::QuadParams& params, const Se3Gains& gains, double rate_dt)
        : params_(params), gains_(gains), rate_dt_(rate_dt) {
        gains_.validate();
        if (rate_dt <= 0.0) throw std::invalid_argument("controller rate must be positive");
    }

    quad::WrenchInput compute(const quad::ConcreteState& x, const Reference& ref);

    void reset() { prev_rd_.reset(); }

private:
    quad::QuadParams params_;
    Se3Gains gains_;
    double rate_dt_;
    std::optional<Mat3> prev_rd_;
};

}  // namespace tcbf::nominal
