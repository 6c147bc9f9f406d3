#pragma once

#include <stdexcept>
#include <vector>

namespace tcbf::margin {

/// Scalar comparison function on [0, inf). The usual class-K variants are
/// Linear and PowerLaw; Tabulated covers numerically constructed ones. The
/// zero function is admitted as a degenerate "extended K" member because the
/// exact-pushforward case needs a residual term that is identically zero.
class KFunction {
public:
    enum class Kind { Zero, Linear, PowerLaw, Tabulated };

    static KFunction zero() { return KFunction(); }

    static KFunction linear(double coeff) {
        if (coeff <= 0.0) throw std::invalid_argument("linear K function needs coeff > 0");
        KFunction k;
        k.kind_ = Kind::Linear;
        k.coeff_ = coeff;
        return k;
    }

    static KFunction power_law(double coeff, double exponent) {
        if (coeff <= 0.0 || exponent <= 0.0)
            throw std::invalid_argument("power-law K function needs coeff > 0 and exponent > 0");
        KFunction k;
        k.kind_ = Kind::PowerLaw;
        k.coeff_ = coeff;
        k.exponent_ = exponent;
        return k;
    }

    /// Monotone grid of (s, value) samples; evaluation interpolates linearly
    /// and extrapolates with the given endpoint slopes.
    static KFunction tabulated(std::vector<double> s, std::vector<double> v, double slope_lo,
                               double slope_hi);

    Kind kind() const noexcept { return kind_; }
    bool is_zero() const noexcept { return kind_ == Kind::Zero; }
    double linear_coeff() const noexcept { return coeff_; }

    double operator()(double s) const;

    /// Samples n points on (lo, hi] and checks value(0) == 0 plus strict increase.
    bool is_class_k_on(double lo, double hi, int n = 1000) const;

private:
    KFunction() = default;

    Kind kind_ = Kind::Zero;
    double coeff_ = 0.0;
    double exponent_ = 1.0;
    std::vector<double> grid_s_;
    std::vector<double> grid_v_;
    double slope_lo_ = 0.0;
    double slope_hi_ = 0.0;
};

}  // namespace tcbf::margin
