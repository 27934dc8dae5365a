// Command-line front end: inspect / verify / integrate / transform-check,
// driven by a single JSON configuration document.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "t2geo/io.hpp"
#include "t2geo/t2geo.hpp"
#include "t2geo/verify.hpp"

using nlohmann::json;
using namespace t2geo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitMath = 2;
constexpr int kExitStep = 3;

std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunConfig {
    int n = 0;
    Lagrangian lagrangian = registry::flat(1);
    std::vector<Jet2Point> points;
    double tolerance = 1e-8;
    // integrate
    double t0 = 0.0, t1 = 1.0, dt = 1e-3;
    std::vector<std::string> monitors;
    // transform-check
    std::vector<std::string> diffeo;
    std::string output;
    std::string format = "csv";
    std::string digest;
};

Eigen::VectorXd parse_vector(const json& j, const std::string& field, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ConfigError(field, "expected an array of " + std::to_string(n) + " numbers");
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_number()) throw ConfigError(field, "entries must be numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("<document>", e.what());
    }
    RunConfig cfg;
    cfg.digest = fnv1a_digest(text);

    if (!j.contains("dimension") || !j["dimension"].is_number_integer())
        throw ConfigError("dimension", "required integer");
    cfg.n = j["dimension"].get<int>();
    if (cfg.n < 1) throw ConfigError("dimension", "must be >= 1");

    if (!j.contains("lagrangian") || !j["lagrangian"].is_object())
        throw ConfigError("lagrangian", "required object");
    const json& lj = j["lagrangian"];
    const std::string kind = lj.value("kind", "");
    if (kind == "builtin") {
        if (!lj.contains("name")) throw ConfigError("lagrangian.name", "required");
        cfg.lagrangian = registry::by_name(lj["name"].get<std::string>(), cfg.n);
    } else if (kind == "expression") {
        if (!lj.contains("formula")) throw ConfigError("lagrangian.formula", "required");
        try {
            cfg.lagrangian = Lagrangian::from_source(lj["formula"].get<std::string>(), cfg.n);
        } catch (const ParseError& e) {
            throw ConfigError("lagrangian.formula", e.what());
        }
    } else {
        throw ConfigError("lagrangian.kind", "must be 'builtin' or 'expression'");
    }

    if (j.contains("points")) {
        const json& pj = j["points"];
        if (pj.contains("explicit")) {
            for (std::size_t k = 0; k < pj["explicit"].size(); ++k) {
                const json& e = pj["explicit"][k];
                const std::string base = "points.explicit[" + std::to_string(k) + "]";
                if (!e.contains("x") || !e.contains("y1") || !e.contains("y2"))
                    throw ConfigError(base, "needs x, y1, y2 arrays");
                cfg.points.emplace_back(parse_vector(e["x"], base + ".x", cfg.n),
                                        parse_vector(e["y1"], base + ".y1", cfg.n),
                                        parse_vector(e["y2"], base + ".y2", cfg.n));
            }
        }
        if (pj.contains("random")) {
            const json& r = pj["random"];
            const int count = r.value("count", 0);
            if (count < 1) throw ConfigError("points.random.count", "must be >= 1");
            const std::uint64_t seed = r.value("seed", 0ULL);
            registry::SampleBox box = registry::default_box(cfg.lagrangian);
            if (r.contains("box")) {
                const json& b = r["box"];
                auto range = [&](const char* key, double& lo, double& hi) {
                    if (!b.contains(key)) return;
                    if (!b[key].is_array() || b[key].size() != 2)
                        throw ConfigError(std::string("points.random.box.") + key,
                                          "expected [lo, hi]");
                    lo = b[key][0].get<double>();
                    hi = b[key][1].get<double>();
                };
                double xlo = box.x_lo[0], xhi = box.x_hi[0];
                range("x", xlo, xhi);
                box.x_lo.setConstant(xlo);
                box.x_hi.setConstant(xhi);
                range("y1", box.y1_lo, box.y1_hi);
                range("y2", box.y2_lo, box.y2_hi);
            }
            SampleRng rng(seed);
            for (int k = 0; k < count; ++k) cfg.points.push_back(rng.point(box));
        }
    }

    cfg.tolerance = j.value("tolerance", 1e-8);
    if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");

    if (j.contains("integrate")) {
        const json& ij = j["integrate"];
        cfg.t0 = ij.value("t0", 0.0);
        cfg.t1 = ij.value("t1", 1.0);
        cfg.dt = ij.value("dt", 1e-3);
        if (!(cfg.dt > 0.0)) throw ConfigError("integrate.dt", "must be positive");
        if (!(cfg.t1 > cfg.t0)) throw ConfigError("integrate.t1", "must exceed t0");
        if (ij.contains("monitors"))
            for (const auto& m : ij["monitors"]) cfg.monitors.push_back(m.get<std::string>());
    }
    if (j.contains("transform")) {
        const json& tj = j["transform"];
        if (!tj.contains("diffeo") || !tj["diffeo"].is_array() ||
            static_cast<int>(tj["diffeo"].size()) != cfg.n)
            throw ConfigError("transform.diffeo", "expected one expression per dimension");
        for (const auto& d : tj["diffeo"]) cfg.diffeo.push_back(d.get<std::string>());
    }
    cfg.output = j.value("output", "");
    cfg.format = j.value("format", "csv");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format", "must be 'csv' or 'json'");
    return cfg;
}

void emit(const RunConfig& cfg, const std::string& text, bool quiet) {
    if (!cfg.output.empty()) {
        std::ofstream f(cfg.output, std::ios::binary);
        if (!f) throw ConfigError("output", "cannot open '" + cfg.output + "'");
        f << text;
    } else if (!quiet) {
        std::cout << text;
    }
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

int cmd_inspect(const RunConfig& cfg, bool quiet) {
    if (cfg.points.empty()) throw ConfigError("points", "inspect needs at least one point");
    json out;
    out["command"] = "inspect";
    out["config_digest"] = cfg.digest;
    json pts = json::array();
    std::ostringstream text;
    for (std::size_t k = 0; k < cfg.points.size(); ++k) {
        const Jet2Point& p = cfg.points[k];
        auto ev = std::make_shared<const PointEval>(cfg.lagrangian, p, 4, cfg.tolerance);
        ConnectionEval conn((SprayEval(ev)));
        const CotangentVec th1 = theta1(*ev), th2 = theta2(*ev);
        json pj;
        pj["point"] = {{"x", vector_json(p.x)}, {"y1", vector_json(p.y1)}, {"y2", vector_json(p.y2)}};
        pj["g"] = matrix_json(conn.metric());
        pj["g_inverse"] = matrix_json(conn.inverse_metric());
        pj["rcond"] = ev->metric_rcond();
        pj["G"] = vector_json(conn.spray().coeff_values());
        pj["N1"] = matrix_json(conn.N1());
        pj["N2"] = matrix_json(conn.N2());
        pj["M1"] = matrix_json(conn.M1());
        pj["M2"] = matrix_json(conn.M2());
        pj["theta1"] = {{"dx", vector_json(th1.ax)}, {"dy1", vector_json(th1.ay1)}};
        pj["theta2"] = {{"dx", vector_json(th2.ax)}};
        pts.push_back(pj);

        text << "point " << k << ": x=" << p.x.transpose() << "  y1=" << p.y1.transpose()
             << "  y2=" << p.y2.transpose() << "\n"
             << "  rcond " << format_double(ev->metric_rcond()) << "\n"
             << "  g:\n" << conn.metric() << "\n  g^-1:\n" << conn.inverse_metric() << "\n"
             << "  G: " << conn.spray().coeff_values().transpose() << "\n"
             << "  N1:\n" << conn.N1() << "\n  N2:\n" << conn.N2() << "\n"
             << "  M1:\n" << conn.M1() << "\n  M2:\n" << conn.M2() << "\n"
             << "  theta1 dx: " << th1.ax.transpose() << "  dy1: " << th1.ay1.transpose() << "\n"
             << "  theta2 dx: " << th2.ax.transpose() << "\n";
    }
    out["points"] = pts;
    out["exit"] = kExitOk;
    emit(cfg, cfg.format == "json" ? out.dump(2) + "\n" : text.str(), quiet);
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, double perturb, bool quiet) {
    if (cfg.points.empty()) throw ConfigError("points", "verify needs sample points");
    const VerifyReport rep = verify_suite(cfg.lagrangian, cfg.points, cfg.tolerance, perturb);
    const int code = rep.all_pass() ? kExitOk : kExitConfig;
    json out;
    out["command"] = "verify";
    out["config_digest"] = cfg.digest;
    json results = json::array();
    std::ostringstream text;
    text << "suite                 residual      tolerance   status\n";
    for (const auto& c : rep.cases) {
        results.push_back(
            {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        char line[128];
        std::snprintf(line, sizeof(line), "%-20s  %-12.3e  %-10.1e  %s\n", c.name.c_str(),
                      c.value, c.tolerance, c.pass ? "pass" : "FAIL");
        text << line;
    }
    out["results"] = results;
    out["exit"] = code;
    emit(cfg, cfg.format == "json" ? out.dump(2) + "\n" : text.str(), quiet);
    return code;
}

int cmd_integrate(const RunConfig& cfg, bool quiet) {
    if (cfg.points.empty())
        throw ConfigError("points", "integrate needs an explicit initial point");
    Trajectory traj = integrate_craig_synge(cfg.lagrangian, cfg.points.front(), cfg.t0, cfg.t1,
                                            cfg.dt, cfg.tolerance);
    const SemiRiemannian* spec = cfg.lagrangian.metric_spec();
    for (const auto& m : cfg.monitors) {
        if (m == "craig_synge_residual") {
            traj.monitors[m] = monitor_craig_synge(cfg.lagrangian, traj);
        } else if (m == "L2") {
            traj.monitors[m] = monitor_L2(cfg.lagrangian, traj);
        } else if (m == "L1" || m == "energy_identity" || m == "nabla2_xdot") {
            if (!spec)
                throw ConfigError("integrate.monitors",
                                  "monitor '" + m + "' needs a metric-induced Lagrangian");
            if (m == "L1") traj.monitors[m] = monitor_L1(*spec, traj);
            if (m == "energy_identity") traj.monitors[m] = monitor_energy_identity(*spec, traj);
            if (m == "nabla2_xdot") traj.monitors[m] = monitor_nabla2_xdot(*spec, traj);
        } else {
            throw ConfigError("integrate.monitors", "unknown monitor '" + m + "'");
        }
    }
    std::string text;
    if (cfg.format == "csv") {
        std::ostringstream os;
        write_trajectory_csv(os, traj);
        text = os.str();
    } else {
        json out;
        out["command"] = "integrate";
        out["config_digest"] = cfg.digest;
        json cols = json::array();
        cols.push_back("t");
        const int n = traj.dim();
        for (int i = 1; i <= n; ++i) cols.push_back("x_" + std::to_string(i));
        for (int i = 1; i <= n; ++i) cols.push_back("y1_" + std::to_string(i));
        for (int i = 1; i <= n; ++i) cols.push_back("y2_" + std::to_string(i));
        for (const auto& [name, chan] : traj.monitors) cols.push_back(name);
        out["columns"] = cols;
        json rows = json::array();
        for (std::size_t k = 0; k < traj.size(); ++k) {
            json row = json::array();
            row.push_back(traj.t[k]);
            const auto& p = traj.states[k];
            for (int i = 0; i < n; ++i) row.push_back(p.x[i]);
            for (int i = 0; i < n; ++i) row.push_back(p.y1[i]);
            for (int i = 0; i < n; ++i) row.push_back(p.y2[i]);
            for (const auto& [name, chan] : traj.monitors) row.push_back(chan[k]);
            rows.push_back(row);
        }
        out["rows"] = rows;
        if (traj.error) out["error"] = *traj.error;
        out["exit"] = traj.error ? kExitStep : kExitOk;
        text = out.dump(2) + "\n";
    }
    emit(cfg, text, quiet);
    return traj.error ? kExitStep : kExitOk;
}

int cmd_transform_check(const RunConfig& cfg, bool quiet) {
    if (cfg.diffeo.empty()) throw ConfigError("transform.diffeo", "required for transform-check");
    if (cfg.points.empty()) throw ConfigError("points", "transform-check needs sample points");
    const Diffeo phi = Diffeo::from_strings(cfg.diffeo, cfg.n);

    double dev_metric = 0.0, dev_z2 = 0.0;
    auto base = std::make_shared<const Lagrangian>(cfg.lagrangian);
    for (const auto& p : cfg.points) {
        const Jet2Point pt = jet_transform(phi, p);
        const Eigen::MatrixXd D = phi.jacobian(p.x);
        const Eigen::MatrixXd Dinv = D.inverse();

        const Lagrangian moved = Lagrangian::pushforward(base, phi, p.x);
        const Eigen::MatrixXd gt = metric_tensor(moved, pt).g;
        const Eigen::MatrixXd g = metric_tensor(cfg.lagrangian, p).g;
        dev_metric = std::max(
            dev_metric, (gt - Dinv.transpose() * g * Dinv).cwiseAbs().maxCoeff());

        if (const SemiRiemannian* spec = cfg.lagrangian.metric_spec()) {
            SemiRiemannian moved_spec{
                std::make_shared<PushforwardMetric>(*spec, phi, p.x), spec->name + "#pushforward"};
            const Eigen::VectorXd zt = z2(moved_spec, pt);
            dev_z2 = std::max(dev_z2, (zt - D * z2(*spec, p)).cwiseAbs().maxCoeff());
        }
    }
    json out;
    out["command"] = "transform-check";
    out["config_digest"] = cfg.digest;
    json results = json::array();
    const bool p1 = dev_metric <= cfg.tolerance, p2 = dev_z2 <= cfg.tolerance;
    results.push_back({{"name", "metric_congruence"},
                       {"value", dev_metric},
                       {"tolerance", cfg.tolerance},
                       {"pass", p1}});
    results.push_back(
        {{"name", "z2_vector_law"}, {"value", dev_z2}, {"tolerance", cfg.tolerance}, {"pass", p2}});
    out["results"] = results;
    const int code = (p1 && p2) ? kExitOk : kExitConfig;
    out["exit"] = code;
    std::ostringstream text;
    text << "metric_congruence  " << format_double(dev_metric) << (p1 ? "  pass" : "  FAIL")
         << "\nz2_vector_law      " << format_double(dev_z2) << (p2 ? "  pass" : "  FAIL") << "\n";
    emit(cfg, cfg.format == "json" ? out.dump(2) + "\n" : text.str(), quiet);
    return code;
}

std::string read_config_text(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"second-order Lagrangian geometry toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    double perturb = 0.0;
    bool quiet = false;
    app.add_option("--config", config_path, "path to the JSON config ('-' for stdin)")
        ->required();
    app.add_option("--perturb", perturb, "offset the semispray/connection coefficients");
    app.add_flag("--quiet", quiet, "suppress stdout reporting");
    auto* inspect = app.add_subcommand("inspect", "metric, semispray and connection data");
    auto* verify = app.add_subcommand("verify", "run the named residual suites");
    auto* integrate = app.add_subcommand("integrate", "integrate the third-order flow");
    auto* transform = app.add_subcommand("transform-check", "tensor transformation laws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        const RunConfig cfg = parse_config(read_config_text(config_path));
        if (inspect->parsed()) return cmd_inspect(cfg, quiet);
        if (verify->parsed()) return cmd_verify(cfg, perturb, quiet);
        if (integrate->parsed()) return cmd_integrate(cfg, quiet);
        if (transform->parsed()) return cmd_transform_check(cfg, quiet);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const DegenerateLagrangian& e) {
        std::cerr << e.what() << "\n";
        return kExitMath;
    } catch (const SingularJacobian& e) {
        std::cerr << e.what() << "\n";
        return kExitMath;
    } catch (const SingularMetric& e) {
        std::cerr << e.what() << "\n";
        return kExitMath;
    } catch (const DomainError& e) {
        std::cerr << e.what() << "\n";
        return kExitMath;
    } catch (const StepError& e) {
        std::cerr << e.what() << "\n";
        return kExitStep;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
