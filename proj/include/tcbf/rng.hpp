#pragma once

#include <cstdint>
#include <random>

namespace tcbf {

/// Deterministic uniform generator. The double conversion is done by hand so
/// sampled sequences are stable across standard libraries, which the
/// bit-identical-output guarantee depends on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Symmetric interval [-half, half].
    double symmetric(double half) { return uniform(-half, half); }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace tcbf
