#pragma once

#include <string>
#include <vector>

#include "tcbf/sim.hpp"

#include <nlohmann/json_fwd.hpp>

namespace tcbf::io {

/// Fixed round-trippable formatting for every number we emit; output files
/// must be bit-identical across reruns of the same configuration.
std::string format_double(double v);

void write_waypoints_csv(const std::vector<Vec3>& waypoints, const std::string& path);

/// Reference samples (t, p_d, v_d, a_d, yaw_d) at the given rate.
void write_reference_csv(const nominal::PolyTrajectory& traj, double dt,
                         const std::string& path);

/// One row per control step; column order documented in the README.
void write_log_csv(const sim::TrajectoryLog& log, const std::string& path);

/// Inverse of write_log_csv. The obstacle count is recovered from the header.
sim::TrajectoryLog read_log_csv(const std::string& path);

nlohmann::json metrics_to_json(const sim::MetricsSummary& m);
nlohmann::json audit_to_json(const sim::AuditReport& r);
nlohmann::json certificate_to_json(const simfn::SimulationCertificate& cert);

void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace tcbf::io
