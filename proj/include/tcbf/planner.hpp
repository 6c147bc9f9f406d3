#pragma once

#include <cstdint>
#include <vector>

#include "tcbf/abstraction.hpp"
#include "tcbf/vec3.hpp"

namespace tcbf::nominal {

struct PlannerConfig {
    double step_length = 0.8;        // m
    double goal_bias = 0.1;          // probability of sampling the goal
    int max_iterations = 4000;
    std::uint64_t rng_seed = 1;
    Vec3 bounds_min{-1.0, -3.0, 0.2};
    Vec3 bounds_max{11.0, 3.0, 3.0};
    /// Rewire radius gamma * (log n / n)^{1/3}; <= 0 derives gamma from the
    /// workspace volume.
    double rewire_gamma = 0.0;
    double goal_tolerance = 1e-9;  // connect when within step_length of goal

    void validate() const;
};

/// Smallest distance between segment [a, b] and a point.
double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p);

/// True when the segment keeps strictly positive distance to every inflated
/// sphere.
bool segment_clears(const Vec3& a, const Vec3& b,
                    const std::vector<abstraction::Obstacle>& obstacles);

/// RRT* geometric planning from start to goal. Deterministic for a fixed
/// seed; throws when start/goal are inside inflated obstacles or no path is
/// found within the iteration budget.
std::vector<Vec3> rrt_star(const PlannerConfig& config, const Vec3& start, const Vec3& goal,
                           const std::vector<abstraction::Obstacle>& obstacles);

}  // namespace tcbf::nominal
