#include "tcbf/abstraction.hpp"

namespace tcbf::abstraction {

double h(const AbstractState& x, const Obstacle& obs) {
    const Vec3 d = x.p - obs.center;
    const double rho = obs.inflated_radius();
    return d.squared_norm() - rho * rho;
}

AbstractGrad grad_h(const AbstractState& x, const Obstacle& obs) {
    return {2.0 * (x.p - obs.center), Vec3{}};
}

double b1(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params) {
    const Vec3 d = x.p - obs.center;
    return 2.0 * d.dot(x.v) + params.k1 * h(x, obs);
}

AbstractGrad grad_b1(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params) {
    const Vec3 d = x.p - obs.center;
    return {2.0 * x.v + 2.0 * params.k1 * d, 2.0 * d};
}

CbfRow abstract_cbf_row(const AbstractState& x, const Obstacle& obs, const ExpCbfParams& params) {
    const AbstractGrad g = grad_b1(x, obs, params);
    // b1' = grad_p b1 . v + grad_v b1 . u >= -k2 b1
    return {g.wrt_v, -params.k2 * b1(x, obs, params) - g.wrt_p.dot(x.v)};
}

}  // namespace tcbf::abstraction
