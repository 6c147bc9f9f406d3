#include "tcbf/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "tcbf/logio.hpp"
#include "tcbf/margin.hpp"
#include "tcbf/scenario.hpp"
#include "tcbf/sim.hpp"
#include "tcbf/svg.hpp"

namespace tcbf::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<double> dt;
    std::optional<double> duration;
    std::string batch;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_overrides = true) {
    cmd->add_option("--config", opts.config, "configuration file (JSON)")->required();
    cmd->add_option("--out", opts.out, "output directory");
    if (with_overrides) {
        cmd->add_option("--seed", opts.seed, "override scenario seed");
        cmd->add_option("--mode", opts.mode, "override run mode (nominal|filtered)")
            ->check(CLI::IsMember({"nominal", "filtered"}));
        cmd->add_option("--dt", opts.dt, "override step size [s]");
        cmd->add_option("--duration", opts.duration, "override run duration [s]");
    }
}

sim::Scenario load_with_overrides(const CommonOpts& opts) {
    sim::Scenario sc = sim::load_scenario(opts.config);
    if (opts.seed) {
        sc.seed = *opts.seed;
        sc.planner.rng_seed = *opts.seed;
    }
    if (opts.mode) sc.mode = *opts.mode == "nominal" ? sim::RunMode::Nominal : sim::RunMode::Filtered;
    if (opts.dt) sc.dt = *opts.dt;
    if (opts.duration) sc.duration = *opts.duration;
    sc.validate();
    return sc;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.out);
    return (fs::path(opts.out) / name).string();
}

// ---------------------------------------------------------------- margin ---

struct MarginProblemConfig {
    margin::ComparisonProblem problem;
    bool rates_linear = false;
    double c_b = 0.0;
    double c_v = 0.0;
    double c_r = 0.0;
    double s_max = 20.0;
    int grid_n = 512;
    std::string method = "closed_form";
    double ode_step = 0.0;  // <= 0: (s_max - s0) / 2000
    double picard_tol = 1e-8;
    int picard_max_iter = 50;
};

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw std::invalid_argument("unknown config key '" + where + "." + item.key() + "'");
}

margin::KFunction kfun_from_json(const json& j, const std::string& where, double* coeff_out) {
    expect_keys(j, {"type", "coeff", "exponent"}, where);
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero") return margin::KFunction::zero();
    const double coeff = j.at("coeff").get<double>();
    if (coeff_out) *coeff_out = coeff;
    if (type == "linear") return margin::KFunction::linear(coeff);
    if (type == "power") return margin::KFunction::power_law(coeff, j.at("exponent").get<double>());
    throw std::invalid_argument(where + ".type must be zero|linear|power");
}

MarginProblemConfig load_margin_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json root;
    in >> root;
    expect_keys(root, {"schema_version", "margin_problem"}, "<root>");
    if (!root.contains("schema_version") ||
        root["schema_version"].get<int>() != sim::kConfigSchemaVersion)
        throw std::invalid_argument("config schema_version missing or unsupported");
    const json& m = root.at("margin_problem");
    expect_keys(m,
                {"alpha_b", "alpha_v", "r", "eta", "s0", "s_max", "grid_n", "method", "ode_step",
                 "picard_tol", "picard_max_iter"},
                "margin_problem");

    MarginProblemConfig cfg;
    cfg.problem.alpha_b = kfun_from_json(m.at("alpha_b"), "margin_problem.alpha_b", &cfg.c_b);
    cfg.problem.alpha_v = kfun_from_json(m.at("alpha_v"), "margin_problem.alpha_v", &cfg.c_v);
    if (m.contains("r")) cfg.problem.r = kfun_from_json(m["r"], "margin_problem.r", &cfg.c_r);
    cfg.problem.eta = m.at("eta").get<double>();
    cfg.problem.s0 = m.at("s0").get<double>();
    if (m.contains("s_max")) cfg.s_max = m["s_max"].get<double>();
    if (m.contains("grid_n")) cfg.grid_n = m["grid_n"].get<int>();
    if (m.contains("method")) cfg.method = m["method"].get<std::string>();
    if (m.contains("ode_step")) cfg.ode_step = m["ode_step"].get<double>();
    if (m.contains("picard_tol")) cfg.picard_tol = m["picard_tol"].get<double>();
    if (m.contains("picard_max_iter")) cfg.picard_max_iter = m["picard_max_iter"].get<int>();

    cfg.rates_linear = cfg.problem.alpha_b.kind() == margin::KFunction::Kind::Linear &&
                       cfg.problem.alpha_v.kind() == margin::KFunction::Kind::Linear &&
                       (cfg.problem.r.is_zero() ||
                        cfg.problem.r.kind() == margin::KFunction::Kind::Linear);
    return cfg;
}

margin::MarginFunction solve_by_method(const MarginProblemConfig& cfg, const std::string& method) {
    const double step = cfg.ode_step > 0.0 ? cfg.ode_step : (cfg.s_max - cfg.problem.s0) / 2000.0;
    if (method == "closed_form") {
        if (!cfg.rates_linear)
            throw std::invalid_argument("closed_form method needs linear alpha_b/alpha_v/r");
        return margin::closed_form_linear_r(cfg.problem.eta, cfg.problem.s0, cfg.c_b, cfg.c_v,
                                            cfg.c_r);
    }
    if (method == "ode") return margin::integrate_comparison_ode(cfg.problem, cfg.s_max, step);
    if (method == "picard")
        return margin::picard_solve(cfg.problem, cfg.s_max, cfg.picard_tol, cfg.picard_max_iter,
                                    cfg.grid_n)
            .margin;
    if (method == "separated")
        return margin::separated_solution(cfg.problem, cfg.s_max, std::max(cfg.problem.eta, 0.1),
                                          cfg.problem.s0, cfg.grid_n);
    throw std::invalid_argument("margin method must be closed_form|ode|picard|separated");
}

void write_margin_csv(const margin::MarginFunction& phi, const MarginProblemConfig& cfg,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "s,phi,dphi,residual\n";
    for (int i = 0; i < cfg.grid_n; ++i) {
        const double s = cfg.problem.s0 + (cfg.s_max - cfg.problem.s0) * static_cast<double>(i) /
                                              static_cast<double>(cfg.grid_n - 1);
        const double av = cfg.problem.alpha_v(s);
        const double dphi = phi.derivative(s);
        const double residual =
            (av == 0.0 ? 0.0 : dphi * av) - cfg.problem.alpha_b(phi.value(s)) - cfg.problem.r(s);
        out << io::format_double(s) << ',' << io::format_double(phi.value(s)) << ','
            << io::format_double(dphi) << ',' << io::format_double(residual) << '\n';
    }
}

int cmd_margin(const CommonOpts& opts, const std::string& action, double scale) {
    MarginProblemConfig cfg = load_margin_config(opts.config);
    if (scale != 1.0) cfg.problem.eta *= scale;
    margin::MarginFunction phi = solve_by_method(cfg, cfg.method);

    if (action == "solve" || action == "verify") {
        write_margin_csv(phi, cfg, out_path(opts, "margin.csv"));
        const auto rep = margin::verify_margin_inequality(
            phi, cfg.problem.alpha_b, cfg.problem.alpha_v, cfg.problem.r, cfg.problem.s0,
            cfg.s_max, std::max(cfg.grid_n, 100));
        io::write_json(json{{"pass", rep.pass},
                            {"min_residual", rep.min_residual},
                            {"argmin_s", rep.argmin_s},
                            {"method", cfg.method},
                            {"eta", cfg.problem.eta},
                            {"s0", cfg.problem.s0}},
                       out_path(opts, "margin_verify.json"));
        return rep.pass ? 0 : 1;
    }
    if (action == "compare") {
        std::vector<std::string> methods{"ode"};
        if (cfg.rates_linear) methods.push_back("closed_form");
        methods.push_back("picard");
        if (cfg.problem.r.is_zero() && cfg.problem.eta > 0.0) methods.push_back("separated");

        std::vector<margin::MarginFunction> phis;
        for (const auto& m : methods) phis.push_back(solve_by_method(cfg, m));

        double max_dev = 0.0;
        json devs = json::object();
        for (std::size_t a = 1; a < phis.size(); ++a) {
            double dev = 0.0;
            for (int i = 0; i < cfg.grid_n; ++i) {
                const double s = cfg.problem.s0 + (cfg.s_max - cfg.problem.s0) *
                                                      static_cast<double>(i) /
                                                      static_cast<double>(cfg.grid_n - 1);
                const double ya = phis[a].value(s);
                const double y0 = phis[0].value(s);
                dev = std::max(dev, std::abs(ya - y0) / std::max(1.0, std::abs(y0)));
            }
            devs[methods[a] + "_vs_ode"] = dev;
            max_dev = std::max(max_dev, dev);
        }
        const bool pass = max_dev <= 1e-6;
        io::write_json(json{{"pass", pass}, {"max_relative_deviation", max_dev},
                            {"deviations", devs}},
                       out_path(opts, "margin_compare.json"));
        write_margin_csv(phis[0], cfg, out_path(opts, "margin.csv"));
        return pass ? 0 : 1;
    }
    throw std::invalid_argument("margin action must be solve|verify|compare");
}

// ----------------------------------------------------------- certificate ---

int cmd_certificate(const CommonOpts& opts) {
    const sim::Scenario sc = load_with_overrides(opts);
    const auto cert = sim::build_certificate(sc);
    io::write_json(io::certificate_to_json(cert), out_path(opts, "certificate.json"));
    return 0;
}

// ------------------------------------------------------------------ plan ---

int cmd_plan(const CommonOpts& opts) {
    const sim::Scenario sc = load_with_overrides(opts);
    const auto waypoints = nominal::rrt_star(sc.planner, sc.start, sc.goal, sc.obstacles);
    io::write_waypoints_csv(waypoints, out_path(opts, "waypoints.csv"));
    const auto traj = nominal::min_snap(waypoints, nominal::allocate_times(waypoints, sc.avg_speed));
    io::write_reference_csv(traj, 0.01, out_path(opts, "reference.csv"));
    return 0;
}

// -------------------------------------------------------------- simulate ---

void simulate_one(const sim::Scenario& sc, const std::string& dir) {
    fs::create_directories(dir);
    const auto log = sim::run(sc);
    io::write_log_csv(log, (fs::path(dir) / "trajectory.csv").string());
    io::write_json(io::metrics_to_json(sim::metrics(log, sc)),
                   (fs::path(dir) / "metrics.json").string());
}

int cmd_simulate(const CommonOpts& opts) {
    const sim::Scenario base = load_with_overrides(opts);
    if (opts.batch.empty()) {
        simulate_one(base, opts.out);
        return 0;
    }

    std::vector<std::uint64_t> seeds;
    std::stringstream ss(opts.batch);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    if (seeds.empty()) throw std::invalid_argument("--batch list is empty");

    std::vector<std::exception_ptr> errors(seeds.size());
    std::vector<std::thread> workers;
    const unsigned pool = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                          static_cast<unsigned>(seeds.size())));
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < pool; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= seeds.size()) return;
                try {
                    sim::Scenario sc = base;
                    sc.seed = seeds[i];
                    sc.planner.rng_seed = seeds[i];
                    simulate_one(sc, (fs::path(opts.out) /
                                      ("run_seed" + std::to_string(seeds[i]))).string());
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return 0;
}

// ----------------------------------------------------------- audit/report --

int cmd_audit(const CommonOpts& opts, const std::string& log_path) {
    const sim::Scenario sc = load_with_overrides(opts);
    const auto log = io::read_log_csv(log_path);
    const auto rep = sim::audit(log, sc);
    io::write_json(io::audit_to_json(rep), out_path(opts, "audit.json"));
    return rep.all_pass ? 0 : 1;
}

int cmd_report(const CommonOpts& opts, const std::string& log_path) {
    const sim::Scenario sc = load_with_overrides(opts);
    auto log = io::read_log_csv(log_path);
    // Rebuild plan/reference deterministically for the path figure.
    log.waypoints = nominal::rrt_star(sc.planner, sc.start, sc.goal, sc.obstacles);
    log.reference = nominal::min_snap(log.waypoints,
                                      nominal::allocate_times(log.waypoints, sc.avg_speed));
    io::write_path_svg(log, sc, out_path(opts, "path.svg"));
    io::write_barrier_svg(log, out_path(opts, "barriers.svg"));
    io::write_clearance_svg(log, sc, out_path(opts, "clearance.svg"));
    io::write_json(io::metrics_to_json(sim::metrics(log, sc)), out_path(opts, "metrics.json"));
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"safety-transfer toolkit: margin synthesis, tracking certificates and a "
                 "barrier-transfer QP filter for a quadrotor over a double-integrator model"};
    app.require_subcommand(1);

    CommonOpts margin_opts, cert_opts, plan_opts, simulate_opts, audit_opts, report_opts;
    std::string margin_action = "solve";
    double margin_scale = 1.0;
    std::string audit_log, report_log;

    auto* margin_cmd = app.add_subcommand("margin", "solve/verify/compare margin functions");
    margin_cmd->add_option("action", margin_action, "solve|verify|compare")
        ->check(CLI::IsMember({"solve", "verify", "compare"}));
    margin_cmd->add_option("--scale", margin_scale, "scale eta before solving (verification aid)");
    add_common(margin_cmd, margin_opts, false);

    auto* cert_cmd = app.add_subcommand("certificate", "build and export the tracking certificate");
    add_common(cert_cmd, cert_opts);

    auto* plan_cmd = app.add_subcommand("plan", "plan waypoints and the smooth reference");
    add_common(plan_cmd, plan_opts);

    auto* sim_cmd = app.add_subcommand("simulate", "run the closed loop and export logs/metrics");
    add_common(sim_cmd, simulate_opts);
    sim_cmd->add_option("--batch", simulate_opts.batch,
                        "comma-separated seed list run on a worker pool");

    auto* audit_cmd = app.add_subcommand("audit", "re-verify invariants from a saved log");
    add_common(audit_cmd, audit_opts);
    audit_cmd->add_option("--log", audit_log, "trajectory.csv produced by simulate")->required();

    auto* report_cmd = app.add_subcommand("report", "render SVG figures and metrics from a log");
    add_common(report_cmd, report_opts);
    report_cmd->add_option("--log", report_log, "trajectory.csv produced by simulate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (margin_cmd->parsed()) return cmd_margin(margin_opts, margin_action, margin_scale);
        if (cert_cmd->parsed()) return cmd_certificate(cert_opts);
        if (plan_cmd->parsed()) return cmd_plan(plan_opts);
        if (sim_cmd->parsed()) return cmd_simulate(simulate_opts);
        if (audit_cmd->parsed()) return cmd_audit(audit_opts, audit_log);
        if (report_cmd->parsed()) return cmd_report(report_opts, report_log);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace tcbf::cli
