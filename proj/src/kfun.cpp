#include "tcbf/kfun.hpp"

#include <algorithm>
#include <cmath>

namespace tcbf::margin {

KFunction KFunction::tabulated(std::vector<double> s, std::vector<double> v, double slope_lo,
                               double slope_hi) {
    if (s.size() != v.size() || s.size() < 2)
        throw std::invalid_argument("tabulated K function needs >= 2 matching samples");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1] || v[i] <= v[i - 1])
            throw std::invalid_argument("tabulated K function grid must be strictly increasing");
    KFunction k;
    k.kind_ = Kind::Tabulated;
    k.grid_s_ = std::move(s);
    k.grid_v_ = std::move(v);
    k.slope_lo_ = slope_lo;
    k.slope_hi_ = slope_hi;
    return k;
}

double KFunction::operator()(double s) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Linear:
            return coeff_ * s;
        case Kind::PowerLaw:
            return s <= 0.0 ? 0.0 : coeff_ * std::pow(s, exponent_);
        case Kind::Tabulated: {
            if (s <= grid_s_.front()) return grid_v_.front() + slope_lo_ * (s - grid_s_.front());
            if (s >= grid_s_.back()) return grid_v_.back() + slope_hi_ * (s - grid_s_.back());
            const auto it = std::upper_bound(grid_s_.begin(), grid_s_.end(), s);
            const std::size_t i = static_cast<std::size_t>(it - grid_s_.begin()) - 1;
            const double t = (s - grid_s_[i]) / (grid_s_[i + 1] - grid_s_[i]);
            return grid_v_[i] + t * (grid_v_[i + 1] - grid_v_[i]);
        }
    }
    return 0.0;
}

bool KFunction::is_class_k_on(double lo, double hi, int n) const {
    if (is_zero()) return false;
    if (std::abs((*this)(0.0)) > 1e-9) return false;
    double prev = (*this)(lo);
    for (int i = 1; i < n; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = (*this)(s);
        if (v <= prev) return false;
        prev = v;
    }
    return true;
}

}  // namespace tcbf::margin
