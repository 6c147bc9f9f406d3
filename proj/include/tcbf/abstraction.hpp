#pragma once

#include <stdexcept>

#include "tcbf/vec3.hpp"

namespace tcbf::abstraction {

/// State of the 3D double integrator: position and velocity.
struct AbstractState {
    Vec3 p;
    Vec3 v;

    bool finite() const { return p.finite() && v.finite(); }
};

struct AbstractDeriv {
    Vec3 dp;
    Vec3 dv;
};

/// Spherical obstacle. The geometric radius is the physical body; the
/// inflation is the extra margin baked into the barrier, so clearance can be
/// reported against both.
struct Obstacle {
    Vec3 center;
    double geometric_radius = 0.5;
    double inflation = 0.3;

    double inflated_radius() const { return geometric_radius + inflation; }

    void validate() const {
        if (geometric_radius <= 0.0) throw std::invalid_argument("obstacle radius must be > 0");
        if (inflation < 0.0) throw std::invalid_argument("obstacle inflation must be >= 0");
        if (!center.finite()) throw std::invalid_argument("obstacle center must be finite");
    }
};

/// Gains of the degree-2 exponential barrier b = h' + k1 h with rate
/// alpha_b(s) = k2 s.
struct ExpCbfParams {
    double k1 = 1.0;
    double k2 = 1.0;

    void validate() const {
        if (k1 <= 0.0 || k2 <= 0.0) throw std::invalid_argument("CBF gains must be > 0");
    }
};

inline AbstractDeriv di_dynamics(const AbstractState& x, const Vec3& u) { return {x.v, u}; }

/// Distance-squared safety function h = |p - c|^2 - rho^2 (rho inflated).
double h(const AbstractState& x, const Obstacle& obs);

struct AbstractGrad {
    Vec3 wrt_p;
    Vec3 wrt_v;
};

AbstractGrad grad_h(const AbstractState& x, const Obstacle& obs);

/// Zeroing barrier b1 = h' + k1 h = 2(p-c).v + k1 h.
double b1(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params);

AbstractGrad grad_b1(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params);

/// Affine constraint a.u >= beta on the abstract input enforcing
/// b1' >= -k2 b1.
struct CbfRow {
    Vec3 a;
    double beta = 0.0;
};

CbfRow abstract_cbf_row(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params);

}  // namespace tcbf::abstraction
