#include "tcbf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tcbf/rng.hpp"

namespace tcbf::nominal {

void PlannerConfig::validate() const {
    if (step_length <= 0.0) throw std::invalid_argument("planner step_length must be > 0");
    if (goal_bias < 0.0 || goal_bias > 1.0)
        throw std::invalid_argument("planner goal_bias must be in [0, 1]");
    if (max_iterations <= 0) throw std::invalid_argument("planner max_iterations must be > 0");
    for (int i = 0; i < 3; ++i)
        if (bounds_min[i] >= bounds_max[i])
            throw std::invalid_argument("planner workspace bounds are empty");
}

double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
    const Vec3 ab = b - a;
    const double denom = ab.squared_norm();
    double t = denom > 0.0 ? (p - a).dot(ab) / denom : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

bool segment_clears(const Vec3& a, const Vec3& b,
                    const std::vector<abstraction::Obstacle>& obstacles) {
    for (const auto& obs : obstacles)
        if (segment_point_distance(a, b, obs.center) <= obs.inflated_radius()) return false;
    return true;
}

namespace {

struct Node {
    Vec3 p;
    int parent = -1;
    double cost = 0.0;
};

bool point_free(const Vec3& p, const std::vector<abstraction::Obstacle>& obstacles) {
    for (const auto& obs : obstacles)
        if ((p - obs.center).norm() <= obs.inflated_radius()) return false;
    return true;
}

}  // namespace

std::vector<Vec3> rrt_star(const PlannerConfig& config, const Vec3& start, const Vec3& goal,
                           const std::vector<abstraction::Obstacle>& obstacles) {
    config.validate();
    if (!point_free(start, obstacles))
        throw std::invalid_argument("planner start lies inside an inflated obstacle");
    if (!point_free(goal, obstacles))
        throw std::invalid_argument("planner goal lies inside an inflated obstacle");

    double gamma = config.rewire_gamma;
    if (gamma <= 0.0) {
        const Vec3 ext = config.bounds_max - config.bounds_min;
        const double volume = ext.x * ext.y * ext.z;
        const double unit_ball = 4.0 / 3.0 * 3.14159265358979323846;
        gamma = 2.0 * std::pow(1.0 + 1.0 / 3.0, 1.0 / 3.0) *
                std::pow(volume / unit_ball, 1.0 / 3.0);
    }

    Rng rng(config.rng_seed);
    std::vector<Node> tree{{start, -1, 0.0}};
    int best_goal_parent = -1;
    double best_goal_cost = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        Vec3 sample;
        if (rng.uniform01() < config.goal_bias) {
            sample = goal;
        } else {
            sample = {rng.uniform(config.bounds_min.x, config.bounds_max.x),
                      rng.uniform(config.bounds_min.y, config.bounds_max.y),
                      rng.uniform(config.bounds_min.z, config.bounds_max.z)};
        }

        int nearest = 0;
        double nearest_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const double d2 = (tree[i].p - sample).squared_norm();
            if (d2 < nearest_d2) {
                nearest_d2 = d2;
                nearest = static_cast<int>(i);
            }
        }

        Vec3 direction = sample - tree[static_cast<std::size_t>(nearest)].p;
        const double dist = direction.norm();
        if (dist < 1e-12) continue;
        const Vec3 new_p = dist <= config.step_length
                               ? sample
                               : tree[static_cast<std::size_t>(nearest)].p +
                                     direction * (config.step_length / dist);
        if (!point_free(new_p, obstacles)) continue;
        if (!segment_clears(tree[static_cast<std::size_t>(nearest)].p, new_p, obstacles)) continue;

        const double n = static_cast<double>(tree.size());
        const double radius =
            std::max(config.step_length,
                     std::min(gamma * std::pow(std::log(n + 1.0) / (n + 1.0), 1.0 / 3.0),
                              4.0 * config.step_length));

        // Choose the cheapest collision-free parent within the rewire radius.
        int parent = nearest;
        double best_cost = tree[static_cast<std::size_t>(nearest)].cost +
                           (new_p - tree[static_cast<std::size_t>(nearest)].p).norm();
        std::vector<int> near;
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const double d = (tree[i].p - new_p).norm();
            if (d <= radius) {
                near.push_back(static_cast<int>(i));
                const double c = tree[i].cost + d;
                if (c < best_cost && segment_clears(tree[i].p, new_p, obstacles)) {
                    best_cost = c;
                    parent = static_cast<int>(i);
                }
            }
        }

        const int new_index = static_cast<int>(tree.size());
        tree.push_back({new_p, parent, best_cost});

        // Rewire neighbors through the new node where that is cheaper.
        for (int i : near) {
            Node& node = tree[static_cast<std::size_t>(i)];
            const double through = best_cost + (node.p - new_p).norm();
            if (through + 1e-12 < node.cost && segment_clears(new_p, node.p, obstacles)) {
                node.parent = new_index;
                node.cost = through;
            }
        }

        const double goal_d = (new_p - goal).norm();
        if (goal_d <= config.step_length + config.goal_tolerance &&
            segment_clears(new_p, goal, obstacles)) {
            const double total = best_cost + goal_d;
            if (total < best_goal_cost) {
                best_goal_cost = total;
                best_goal_parent = new_index;
            }
        }
    }

    if (best_goal_parent < 0)
        throw std::runtime_error("rrt_star found no path within the iteration budget");

    std::vector<Vec3> path;
    for (int i = best_goal_parent; i >= 0; i = tree[static_cast<std::size_t>(i)].parent)
        path.push_back(tree[static_cast<std::size_t>(i)].p);
    std::reverse(path.begin(), path.end());
    if ((path.back() - goal).norm() > 1e-12) path.push_back(goal);
    return path;
}

}  // namespace tcbf::nominal
