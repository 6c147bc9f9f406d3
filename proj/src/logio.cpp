#include "tcbf/logio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tcbf::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void require_stream(const std::ofstream& out, const std::string& path) {
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
}

void put(std::ofstream& out, double v, bool lead_comma = true) {
    if (lead_comma) out << ',';
    out << format_double(v);
}

}  // namespace

void write_waypoints_csv(const std::vector<Vec3>& waypoints, const std::string& path) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "x,y,z\n";
    for (const auto& w : waypoints)
        out << format_double(w.x) << ',' << format_double(w.y) << ',' << format_double(w.z)
            << '\n';
}

void write_reference_csv(const nominal::PolyTrajectory& traj, double dt,
                         const std::string& path) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "t,pd_x,pd_y,pd_z,vd_x,vd_y,vd_z,ad_x,ad_y,ad_z,yaw_d\n";
    const auto steps = static_cast<std::size_t>(traj.total_time / dt) + 1;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec3 p = nominal::eval_traj(traj, t, 0);
        const Vec3 v = nominal::eval_traj(traj, t, 1);
        const Vec3 a = nominal::eval_traj(traj, t, 2);
        out << format_double(t);
        for (double x : {p.x, p.y, p.z, v.x, v.y, v.z, a.x, a.y, a.z}) put(out, x);
        put(out, nominal::desired_yaw(traj, t));
        out << '\n';
    }
}

void write_log_csv(const sim::TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "t,px,py,pz,vx,vy,vz"
           ",r00,r01,r02,r10,r11,r12,r20,r21,r22"
           ",wx,wy,wz,x1_px,x1_py,x1_pz,x1_vx,x1_vy,x1_vz"
           ",f_nom,mx_nom,my_nom,mz_nom,f_cmd,mx_cmd,my_cmd,mz_cmd"
           ",f_real,mx_real,my_real,mz_real,w0_sq,w1_sq,w2_sq,w3_sq"
           ",V,activity,du_norm,slack,mix_saturated,qp_infeasible";
    for (std::size_t i = 0; i < log.n_obstacles; ++i) out << ",b2_" << i;
    for (std::size_t i = 0; i < log.n_obstacles; ++i) out << ",h_" << i;
    out << '\n';

    for (const auto& row : log.rows) {
        out << format_double(row.t);
        for (double v : {row.state.p.x, row.state.p.y, row.state.p.z, row.state.v.x,
                         row.state.v.y, row.state.v.z})
            put(out, v);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) put(out, row.state.R(r, c));
        for (double v : {row.state.omega.x, row.state.omega.y, row.state.omega.z}) put(out, v);
        for (double v : {row.witness_state.p.x, row.witness_state.p.y, row.witness_state.p.z,
                         row.witness_state.v.x, row.witness_state.v.y, row.witness_state.v.z})
            put(out, v);
        for (double v : {row.u_nom.f, row.u_nom.M.x, row.u_nom.M.y, row.u_nom.M.z, row.u_cmd.f,
                         row.u_cmd.M.x, row.u_cmd.M.y, row.u_cmd.M.z, row.u_real.f,
                         row.u_real.M.x, row.u_real.M.y, row.u_real.M.z})
            put(out, v);
        for (double v : row.rotor_sq) put(out, v);
        put(out, row.v_sim);
        out << ',' << row.activity;
        put(out, row.du_norm);
        put(out, row.slack);
        out << ',' << (row.mix_saturated ? 1 : 0) << ',' << (row.qp_infeasible ? 1 : 0);
        for (double v : row.b2) put(out, v);
        for (double v : row.h) put(out, v);
        out << '\n';
    }
}

sim::TrajectoryLog read_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open log file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty log file: " + path);

    std::size_t n_obstacles = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ','))
            if (col.rfind("b2_", 0) == 0) ++n_obstacles;
    }

    sim::TrajectoryLog log;
    log.n_obstacles = n_obstacles;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> f;
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(std::stod(cell));
        const std::size_t expected = 46 + 2 * n_obstacles;
        if (f.size() != expected)
            throw std::runtime_error("log row has " + std::to_string(f.size()) +
                                     " fields, expected " + std::to_string(expected));
        sim::LogRow row;
        std::size_t i = 0;
        row.t = f[i++];
        row.state.p = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.state.v = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) row.state.R(r, c) = f[i++];
        row.state.omega = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.witness_state.p = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.witness_state.v = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.u_nom.f = f[i++];
        row.u_nom.M = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.u_cmd.f = f[i++];
        row.u_cmd.M = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        row.u_real.f = f[i++];
        row.u_real.M = {f[i], f[i + 1], f[i + 2]};
        i += 3;
        for (auto& w : row.rotor_sq) w = f[i++];
        row.v_sim = f[i++];
        row.activity = static_cast<unsigned>(f[i++]);
        row.du_norm = f[i++];
        row.slack = f[i++];
        row.mix_saturated = f[i++] != 0.0;
        row.qp_infeasible = f[i++] != 0.0;
        row.b2.resize(n_obstacles);
        for (auto& v : row.b2) v = f[i++];
        row.h.resize(n_obstacles);
        for (auto& v : row.h) v = f[i++];
        log.rows.push_back(std::move(row));
    }
    if (log.rows.size() > 1) log.dt = log.rows[1].t - log.rows[0].t;
    return log;
}

json metrics_to_json(const sim::MetricsSummary& m) {
    return json{{"min_true_clearance", m.min_true_clearance},
                {"argmin_true_t", m.argmin_true_t},
                {"min_inflated_clearance", m.min_inflated_clearance},
                {"argmin_inflated_t", m.argmin_inflated_t},
                {"min_b2_per_obstacle", m.min_b2_per_obstacle},
                {"min_b2_overall", m.min_b2_overall},
                {"argmin_b2_t", m.argmin_b2_t},
                {"initial_min_b2", m.initial_min_b2},
                {"final_min_b2", m.final_min_b2},
                {"intervention_energy", m.intervention_energy},
                {"slack_total", m.slack_total},
                {"slack_max", m.slack_max},
                {"saturation_events", m.saturation_events},
                {"qp_infeasible_events", m.qp_infeasible_events},
                {"final_goal_distance", m.final_goal_distance}};
}

json audit_to_json(const sim::AuditReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"applicable", c.applicable},
                          {"pass", c.pass},
                          {"worst", c.worst},
                          {"threshold", c.threshold},
                          {"detail", c.detail}});
    return json{{"checks", checks}, {"all_pass", r.all_pass}};
}

json certificate_to_json(const simfn::SimulationCertificate& cert) {
    json p = json::array();
    json q = json::array();
    for (std::size_t r = 0; r < 6; ++r) {
        json pr = json::array();
        json qr = json::array();
        for (std::size_t c = 0; c < 6; ++c) {
            pr.push_back(cert.p(r, c));
            qr.push_back(cert.q(r, c));
        }
        p.push_back(pr);
        q.push_back(qr);
    }
    return json{{"lyapunov_residual", cert.lyapunov_residual},
                {"c_v", cert.c_v},
                {"gamma_coeff", cert.gamma_coeff},
                {"p_eig_min", cert.p_eig_min},
                {"p_eig_max", cert.p_eig_max},
                {"q_eig_min", cert.q_eig_min},
                {"P", p},
                {"Q", q}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    require_stream(out, path);
    out << j.dump(2) << '\n';
}

}  // namespace tcbf::io
