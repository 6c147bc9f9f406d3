#include "tcbf/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tcbf::sim {

using nlohmann::json;

void Scenario::validate() const {
    if (dt <= 0.0 || dt > 0.01)
        throw std::invalid_argument("scenario dt must lie in (0, 0.01]");
    if (duration <= 0.0) throw std::invalid_argument("scenario duration must be positive");
    if (avg_speed <= 0.0) throw std::invalid_argument("scenario avg_speed must be positive");
    if (q_diag.size() != 6) throw std::invalid_argument("scenario q_diag must have 6 entries");
    quad.validate();
    cbf.validate();
    planner.validate();
    controller.validate();
    if (margin.eta < 0.0 || margin.s0 <= 0.0)
        throw std::invalid_argument("margin spec needs eta >= 0 and s0 > 0");
    if (margin.r_coeff < 0.0) throw std::invalid_argument("margin r_coeff must be >= 0");
    for (const auto& obs : obstacles) {
        obs.validate();
        if ((start - obs.center).norm() <= obs.inflated_radius())
            throw std::invalid_argument("scenario start lies inside an inflated obstacle");
        if ((goal - obs.center).norm() <= obs.inflated_radius())
            throw std::invalid_argument("scenario goal lies inside an inflated obstacle");
    }
}

simfn::InterfaceGains Scenario::interface_gains() const {
    simfn::InterfaceGains g;
    g.kp = Mat3::diag(kp_diag.x, kp_diag.y, kp_diag.z);
    g.kv = Mat3::diag(kv_diag.x, kv_diag.y, kv_diag.z);
    return g;
}

mat::Matrix Scenario::q_matrix() const { return mat::Matrix::diag(q_diag); }

simfn::SimulationCertificate build_certificate(const Scenario& sc) {
    return simfn::build_certificate(sc.interface_gains(), sc.q_matrix());
}

margin::MarginFunction build_margin(const Scenario& sc,
                                    const simfn::SimulationCertificate& cert) {
    const double lambda = sc.margin.lambda > 0.0 ? sc.margin.lambda : sc.cbf.k2 / cert.c_v;
    if (sc.margin.type == MarginSpec::Type::Power)
        return margin::MarginFunction::power_law(sc.margin.eta, sc.margin.s0, lambda);
    return margin::closed_form_linear_r(sc.margin.eta, sc.margin.s0, sc.cbf.k2, cert.c_v,
                                        sc.margin.r_coeff);
}

TransferredBarrier build_barrier(const Scenario& sc,
                                 const simfn::SimulationCertificate& cert) {
    const double k_e = sc.k_e > 0.0 ? sc.k_e : sc.cbf.k2;
    const auto residual = sc.margin.r_coeff > 0.0
                              ? margin::KFunction::linear(sc.margin.r_coeff)
                              : margin::KFunction::zero();
    return make_transferred_barrier(cert, build_margin(sc, cert), sc.cbf, k_e, residual);
}

namespace {

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config section '" + where + "' must be an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw std::invalid_argument("unknown config key '" + where + "." + item.key() + "'");
}

Vec3 vec3_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("config key '" + where + "' must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

Scenario scenario_from_json(const json& root) {
    expect_keys(root, {"schema_version", "scenario"}, "<root>");
    if (!root.contains("schema_version") || root["schema_version"].get<int>() != kConfigSchemaVersion)
        throw std::invalid_argument("config schema_version missing or unsupported (expect " +
                                    std::to_string(kConfigSchemaVersion) + ")");
    if (!root.contains("scenario")) throw std::invalid_argument("config missing 'scenario'");
    const json& s = root["scenario"];
    expect_keys(s,
                {"start", "goal", "obstacles", "quad", "interface", "margin", "cbf", "planner",
                 "controller", "avg_speed", "dt", "duration", "seed", "mode", "witness_mode",
                 "tracked_offset_p", "tracked_offset_v"},
                "scenario");

    Scenario sc;
    if (s.contains("start")) sc.start = vec3_from(s["start"], "scenario.start");
    if (s.contains("goal")) sc.goal = vec3_from(s["goal"], "scenario.goal");
    if (s.contains("avg_speed")) sc.avg_speed = s["avg_speed"].get<double>();
    if (s.contains("dt")) sc.dt = s["dt"].get<double>();
    if (s.contains("duration")) sc.duration = s["duration"].get<double>();
    if (s.contains("seed")) sc.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("mode")) {
        const std::string m = s["mode"].get<std::string>();
        if (m == "nominal")
            sc.mode = RunMode::Nominal;
        else if (m == "filtered")
            sc.mode = RunMode::Filtered;
        else
            throw std::invalid_argument("scenario.mode must be 'nominal' or 'filtered'");
    }
    if (s.contains("witness_mode")) {
        const std::string w = s["witness_mode"].get<std::string>();
        if (w == "exact")
            sc.witness = WitnessKind::Exact;
        else if (w == "tracked")
            sc.witness = WitnessKind::Tracked;
        else
            throw std::invalid_argument("scenario.witness_mode must be 'exact' or 'tracked'");
    }
    if (s.contains("tracked_offset_p"))
        sc.tracked_offset_p = vec3_from(s["tracked_offset_p"], "scenario.tracked_offset_p");
    if (s.contains("tracked_offset_v"))
        sc.tracked_offset_v = vec3_from(s["tracked_offset_v"], "scenario.tracked_offset_v");

    if (s.contains("obstacles")) {
        for (std::size_t i = 0; i < s["obstacles"].size(); ++i) {
            const json& o = s["obstacles"][i];
            const std::string where = "scenario.obstacles[" + std::to_string(i) + "]";
            expect_keys(o, {"center", "geometric_radius", "inflation"}, where);
            abstraction::Obstacle obs;
            obs.center = vec3_from(o.at("center"), where + ".center");
            obs.geometric_radius = o.at("geometric_radius").get<double>();
            if (o.contains("inflation")) obs.inflation = o["inflation"].get<double>();
            sc.obstacles.push_back(obs);
        }
    }

    if (s.contains("quad")) {
        const json& q = s["quad"];
        expect_keys(q,
                    {"mass", "gravity", "inertia_diag", "arm_length", "k_f", "k_m", "f_max",
                     "m_max"},
                    "scenario.quad");
        if (q.contains("mass")) sc.quad.mass = q["mass"].get<double>();
        if (q.contains("gravity")) sc.quad.gravity = q["gravity"].get<double>();
        if (q.contains("inertia_diag")) {
            const Vec3 d = vec3_from(q["inertia_diag"], "scenario.quad.inertia_diag");
            sc.quad.inertia = Mat3::diag(d.x, d.y, d.z);
        }
        if (q.contains("arm_length")) sc.quad.arm_length = q["arm_length"].get<double>();
        if (q.contains("k_f")) sc.quad.k_f = q["k_f"].get<double>();
        if (q.contains("k_m")) sc.quad.k_m = q["k_m"].get<double>();
        if (q.contains("f_max")) sc.quad.f_max = q["f_max"].get<double>();
        if (q.contains("m_max")) sc.quad.m_max = q["m_max"].get<double>();
    }

    if (s.contains("interface")) {
        const json& g = s["interface"];
        expect_keys(g, {"kp_diag", "kv_diag", "q_diag"}, "scenario.interface");
        if (g.contains("kp_diag")) sc.kp_diag = vec3_from(g["kp_diag"], "scenario.interface.kp_diag");
        if (g.contains("kv_diag")) sc.kv_diag = vec3_from(g["kv_diag"], "scenario.interface.kv_diag");
        if (g.contains("q_diag")) {
            if (!g["q_diag"].is_array() || g["q_diag"].size() != 6)
                throw std::invalid_argument("scenario.interface.q_diag must have 6 entries");
            sc.q_diag = g["q_diag"].get<std::vector<double>>();
        }
    }

    if (s.contains("margin")) {
        const json& m = s["margin"];
        expect_keys(m, {"type", "eta", "s0", "lambda", "r_coeff"}, "scenario.margin");
        if (m.contains("type")) {
            const std::string t = m["type"].get<std::string>();
            if (t == "power")
                sc.margin.type = MarginSpec::Type::Power;
            else if (t == "linear_r")
                sc.margin.type = MarginSpec::Type::LinearR;
            else
                throw std::invalid_argument("scenario.margin.type must be 'power' or 'linear_r'");
        }
        if (m.contains("eta")) sc.margin.eta = m["eta"].get<double>();
        if (m.contains("s0")) sc.margin.s0 = m["s0"].get<double>();
        if (m.contains("lambda")) {
            if (m["lambda"].is_string()) {
                if (m["lambda"].get<std::string>() != "auto")
                    throw std::invalid_argument("scenario.margin.lambda must be a number or 'auto'");
                sc.margin.lambda = 0.0;
            } else {
                sc.margin.lambda = m["lambda"].get<double>();
            }
        }
        if (m.contains("r_coeff")) sc.margin.r_coeff = m["r_coeff"].get<double>();
    }

    if (s.contains("cbf")) {
        const json& c = s["cbf"];
        expect_keys(c, {"k1", "k2", "k_e"}, "scenario.cbf");
        if (c.contains("k1")) sc.cbf.k1 = c["k1"].get<double>();
        if (c.contains("k2")) sc.cbf.k2 = c["k2"].get<double>();
        if (c.contains("k_e")) sc.k_e = c["k_e"].get<double>();
    }

    if (s.contains("planner")) {
        const json& p = s["planner"];
        expect_keys(p,
                    {"step_length", "goal_bias", "max_iterations", "rewire_gamma", "bounds_min",
                     "bounds_max"},
                    "scenario.planner");
        if (p.contains("step_length")) sc.planner.step_length = p["step_length"].get<double>();
        if (p.contains("goal_bias")) sc.planner.goal_bias = p["goal_bias"].get<double>();
        if (p.contains("max_iterations")) sc.planner.max_iterations = p["max_iterations"].get<int>();
        if (p.contains("rewire_gamma")) sc.planner.rewire_gamma = p["rewire_gamma"].get<double>();
        if (p.contains("bounds_min"))
            sc.planner.bounds_min = vec3_from(p["bounds_min"], "scenario.planner.bounds_min");
        if (p.contains("bounds_max"))
            sc.planner.bounds_max = vec3_from(p["bounds_max"], "scenario.planner.bounds_max");
    }
    sc.planner.rng_seed = sc.seed;

    if (s.contains("controller")) {
        const json& c = s["controller"];
        expect_keys(c, {"kp", "kv", "kr", "komega"}, "scenario.controller");
        if (c.contains("kp")) sc.controller.kp_pos = c["kp"].get<double>();
        if (c.contains("kv")) sc.controller.kv_vel = c["kv"].get<double>();
        if (c.contains("kr")) sc.controller.kr_att = c["kr"].get<double>();
        if (c.contains("komega")) sc.controller.komega_rate = c["komega"].get<double>();
    }

    sc.validate();
    return sc;
}

json scenario_to_json(const Scenario& sc) {
    json s;
    s["start"] = vec3_to(sc.start);
    s["goal"] = vec3_to(sc.goal);
    s["avg_speed"] = sc.avg_speed;
    s["dt"] = sc.dt;
    s["duration"] = sc.duration;
    s["seed"] = sc.seed;
    s["mode"] = sc.mode == RunMode::Nominal ? "nominal" : "filtered";
    s["witness_mode"] = sc.witness == WitnessKind::Exact ? "exact" : "tracked";
    s["tracked_offset_p"] = vec3_to(sc.tracked_offset_p);
    s["tracked_offset_v"] = vec3_to(sc.tracked_offset_v);

    s["obstacles"] = json::array();
    for (const auto& o : sc.obstacles)
        s["obstacles"].push_back({{"center", vec3_to(o.center)},
                                  {"geometric_radius", o.geometric_radius},
                                  {"inflation", o.inflation}});

    s["quad"] = {{"mass", sc.quad.mass},
                 {"gravity", sc.quad.gravity},
                 {"inertia_diag",
                  json::array({sc.quad.inertia(0, 0), sc.quad.inertia(1, 1), sc.quad.inertia(2, 2)})},
                 {"arm_length", sc.quad.arm_length},
                 {"k_f", sc.quad.k_f},
                 {"k_m", sc.quad.k_m},
                 {"f_max", sc.quad.f_max},
                 {"m_max", sc.quad.m_max}};

    s["interface"] = {{"kp_diag", vec3_to(sc.kp_diag)},
                      {"kv_diag", vec3_to(sc.kv_diag)},
                      {"q_diag", sc.q_diag}};

    json lambda;
    if (sc.margin.lambda > 0.0)
        lambda = sc.margin.lambda;
    else
        lambda = "auto";
    s["margin"] = {{"type", sc.margin.type == MarginSpec::Type::Power ? "power" : "linear_r"},
                   {"eta", sc.margin.eta},
                   {"s0", sc.margin.s0},
                   {"lambda", lambda},
                   {"r_coeff", sc.margin.r_coeff}};

    s["cbf"] = {{"k1", sc.cbf.k1}, {"k2", sc.cbf.k2}, {"k_e", sc.k_e}};

    s["planner"] = {{"step_length", sc.planner.step_length},
                    {"goal_bias", sc.planner.goal_bias},
                    {"max_iterations", sc.planner.max_iterations},
                    {"rewire_gamma", sc.planner.rewire_gamma},
                    {"bounds_min", vec3_to(sc.planner.bounds_min)},
                    {"bounds_max", vec3_to(sc.planner.bounds_max)}};

    s["controller"] = {{"kp", sc.controller.kp_pos},
                       {"kv", sc.controller.kv_vel},
                       {"kr", sc.controller.kr_att},
                       {"komega", sc.controller.komega_rate}};

    return json{{"schema_version", kConfigSchemaVersion}, {"scenario", s}};
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    return scenario_from_json(j);
}

void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << scenario_to_json(sc).dump(2) << "\n";
}

}  // namespace tcbf::sim
