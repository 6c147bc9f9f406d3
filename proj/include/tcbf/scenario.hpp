#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcbf/abstraction.hpp"
#include "tcbf/barrier.hpp"
#include "tcbf/planner.hpp"
#include "tcbf/quadrotor.hpp"
#include "tcbf/se3_control.hpp"
#include "tcbf/simfn.hpp"

#include <nlohmann/json_fwd.hpp>

namespace tcbf::sim {

/// How the margin function for a run is produced. A non-positive lambda means
/// "derive it from the certificate": lambda = k2 / c_V, the smallest exponent
/// the transfer inequality admits for linear rates.
struct MarginSpec {
    enum class Type { Power, LinearR };
    Type type = Type::Power;
    double eta = 1.0;
    double s0 = 1.0;
    double lambda = 0.0;   // <= 0: derive from certificate
    double r_coeff = 0.0;  // residual r(s) = r_coeff s (LinearR and QP right-hand side)
};

enum class RunMode { Nominal, Filtered };
enum class WitnessKind { Exact, Tracked };

/// Complete description of one closed-loop run. Everything that affects the
/// produced trajectory lives here so runs are reproducible from the file.
struct Scenario {
    std::vector<abstraction::Obstacle> obstacles;
    Vec3 start{0.0, 0.0, 1.0};
    Vec3 goal{10.0, 0.0, 1.0};
    quad::QuadParams quad;
    Vec3 kp_diag{1.0, 1.0, 1.0};
    Vec3 kv_diag{1.0, 1.0, 1.0};
    std::vector<double> q_diag = std::vector<double>(6, 1.0);
    MarginSpec margin;
    abstraction::ExpCbfParams cbf;
    double k_e = 0.0;  // <= 0: default to cbf.k2
    nominal::PlannerConfig planner;
    nominal::Se3Gains controller;
    double avg_speed = 1.2;  // m/s, drives time allocation
    double dt = 1e-3;        // s
    double duration = 10.0;  // s
    std::uint64_t seed = 1;
    RunMode mode = RunMode::Filtered;
    WitnessKind witness = WitnessKind::Exact;
    Vec3 tracked_offset_p;  // initial shadow-state offset in Tracked mode
    Vec3 tracked_offset_v;

    void validate() const;

    simfn::InterfaceGains interface_gains() const;
    mat::Matrix q_matrix() const;
};

simfn::SimulationCertificate build_certificate(const Scenario& sc);
margin::MarginFunction build_margin(const Scenario& sc,
                                    const simfn::SimulationCertificate& cert);
TransferredBarrier build_barrier(const Scenario& sc,
                                 const simfn::SimulationCertificate& cert);

inline constexpr int kConfigSchemaVersion = 1;

/// Strict parse: schema_version must match and unknown keys anywhere in the
/// document are rejected with the offending key path in the message.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

}  // namespace tcbf::sim
