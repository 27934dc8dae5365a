// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Tolerances are fixed here, in code.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "t2geo/io.hpp"
#include "t2geo/t2geo.hpp"

using namespace t2geo;
using t2geo::testing::FdOracle;
using t2geo::testing::make_point;
using t2geo::testing::NamedLagrangian;

namespace {

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Jet2Point> sample_points(const NamedLagrangian& entry, int count,
                                     std::uint64_t seed) {
    SampleRng rng(seed);
    std::vector<Jet2Point> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) pts.push_back(rng.point(entry.box));
    return pts;
}

double suite_value(const VerifyReport& rep, const std::string& name) {
    for (const auto& c : rep.cases)
        if (c.name == name) return c.value;
    return std::numeric_limits<double>::infinity();
}

// 1. Semispray uniqueness: Lie-derivative characterization plus sensitivity.
Criterion criterion_semispray_uniqueness() {
    Criterion c{"semispray.uniqueness"};
    double worst = 0.0, worst_perturbed = std::numeric_limits<double>::infinity();
    for (int n : {1, 2}) {
        for (const auto& entry : t2geo::testing::test_registry(n)) {
            const auto pts = sample_points(entry, 100, 1000 + n);
            for (const auto& p : pts) {
                auto ev = std::make_shared<const PointEval>(entry.L, p);
                SprayEval spray(ev);
                const CotangentVec ls = lie_theta2(*ev, spray.coeff_values());
                const CotangentVec th1 = theta1(*ev);
                worst = std::max(worst, (ls.packed() - th1.packed()).cwiseAbs().maxCoeff());
                worst = std::max(worst, isomega_residual(spray));

                SprayEval off(ev, 1e-3);
                const CotangentVec lsp = lie_theta2(*ev, off.coeff_values());
                const double moved =
                    std::max((lsp.packed() - th1.packed()).cwiseAbs().maxCoeff(),
                             isomega_residual(off));
                worst_perturbed = std::min(worst_perturbed, moved);
            }
        }
    }
    c.pass = worst <= 1e-8 && worst_perturbed > 1e-5;
    std::ostringstream d;
    d << "max residual " << worst << " (tol 1e-8), min perturbed residual " << worst_perturbed
      << " (must exceed 1e-5)";
    c.detail = d.str();
    return c;
}

// 2. Cartan identities and the presymplectic rank.
Criterion criterion_cartan_identities() {
    Criterion c{"cartan.identities"};
    double worst = 0.0;
    bool rank_ok = true;
    for (int n : {1, 2}) {
        for (const auto& entry : t2geo::testing::test_registry(n)) {
            const auto pts = sample_points(entry, 100, 2000 + n);
            const VerifyReport rep = verify_suite(entry.L, pts, 1e-8);
            worst = std::max({worst, suite_value(rep, "prop1.1"), suite_value(rep, "prop1.2"),
                              suite_value(rep, "prop1.3")});
            for (int k = 0; k < 10; ++k) {
                const Eigen::MatrixXd om = omega2(entry.L, pts[k]);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(om);
                int rank = 0;
                for (int i = 0; i < 3 * n; ++i)
                    if (svd.singularValues()(i) > 1e-10) ++rank;
                rank_ok = rank_ok && rank == 2 * n;
            }
        }
    }
    c.pass = worst <= 1e-8 && rank_ok;
    std::ostringstream d;
    d << "max identity residual " << worst << " (tol 1e-8), rank "
      << (rank_ok ? "2n everywhere" : "WRONG");
    c.detail = d.str();
    return c;
}

// 3. Connection compatibility conditions.
Criterion criterion_connection_compatibility() {
    Criterion c{"connection.compatibility"};
    double worst = 0.0, worst_n1 = 0.0;
    for (int n : {1, 2}) {
        for (const auto& entry : t2geo::testing::test_registry(n)) {
            const auto pts = sample_points(entry, 100, 3000 + n);
            for (const auto& p : pts) {
                ConnectionEval conn(SprayEval(std::make_shared<const PointEval>(entry.L, p)));
                const Theorem2Report rep = conn.verify();
                worst = std::max({worst, rep.cond1, rep.nabla2_g, rep.subbundle, rep.adapted_rep});
                const Eigen::MatrixXd lowered = conn.metric() * conn.N1();
                worst_n1 = std::max(
                    worst_n1, (lowered - n1_lowered_formula(conn)).cwiseAbs().maxCoeff());
            }
        }
    }
    c.pass = worst <= 1e-8 && worst_n1 <= 1e-9;
    std::ostringstream d;
    d << "max compatibility residual " << worst << " (tol 1e-8), coefficient agreement "
      << worst_n1 << " (tol 1e-9)";
    c.detail = d.str();
    return c;
}

// 4. Closed forms of the metric-induced family.
Criterion criterion_riemann_closed_forms() {
    Criterion c{"riemann.closed_forms"};
    struct Case {
        SemiRiemannian spec;
        Lagrangian L;
    };
    const std::vector<Case> cases = {{registry::conformal1d_metric(), registry::conformal1d()},
                                     {registry::diag_exp_metric(2), registry::diag_exp(2)}};
    double worst_cf = 0.0, worst_par = 0.0, worst_form = 0.0;
    for (const auto& cs : cases) {
        SampleRng rng(4000 + cs.L.dim());
        const auto box = registry::default_box(cs.L);
        for (int k = 0; k < 200; ++k) {
            const Jet2Point p = rng.point(box);
            ConnectionEval conn(SprayEval(std::make_shared<const PointEval>(cs.L, p)));
            worst_cf = std::max(worst_cf, (conn.spray().coeff_values() -
                                           closed_form_spray(cs.spec, p))
                                              .cwiseAbs()
                                              .maxCoeff());
            worst_cf = std::max(
                worst_cf, (conn.N1() - closed_form_connection1(cs.spec, p)).cwiseAbs().maxCoeff());
            worst_par = std::max(worst_par, conn.nabla_g().cwiseAbs().maxCoeff());
            worst_par = std::max(worst_par, conn.nabla2_g().cwiseAbs().maxCoeff());
            if (k % 10 == 0) {
                const auto rep = conn.verify();
                worst_form = std::max(worst_form, rep.adapted_rep);
                const AdaptedFrame fr = conn.frame();
                const int n = cs.L.dim();
                const Eigen::MatrixXd gc_ad = fr.F.transpose() * conn.gc_natural() * fr.F;
                Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3 * n, 3 * n);
                expect.block(0, 2 * n, n, n) = conn.metric();
                expect.block(2 * n, 0, n, n) = conn.metric();
                expect.block(n, n, n, n) = conn.metric();
                worst_form = std::max(worst_form, (gc_ad - expect).cwiseAbs().maxCoeff());
            }
        }
    }
    c.pass = worst_cf <= 1e-8 && worst_par <= 1e-8 && worst_form <= 1e-8;
    std::ostringstream d;
    d << "closed-form agreement " << worst_cf << ", parallel-metric residual " << worst_par
      << ", reduced-form residual " << worst_form << " (tol 1e-8)";
    c.detail = d.str();
    return c;
}

// 5. Integration: exact flat quadratics, fourth-order convergence, and the
// along-curve identities on conformal solutions.
Criterion criterion_dynamics_integration() {
    Criterion c{"dynamics.integration"};
    const Lagrangian flat = registry::flat(1);
    const Trajectory ft =
        integrate_craig_synge(flat, make_point({0.0}, {1.0}, {1.0}), 0.0, 1.0, 1e-3);
    const double flat_err = std::max({std::abs(ft.states.back().x[0] - 2.0),
                                      std::abs(ft.states.back().y1[0] - 3.0),
                                      std::abs(ft.states.back().y2[0] - 1.0)});

    const Lagrangian conf = registry::conformal1d();
    const Jet2Point p0 = make_point({0.0}, {1.0}, {0.0});
    const Trajectory ref = integrate_craig_synge(conf, p0, 0.0, 1.0, 1e-4);
    auto err = [&](double dt) {
        const Trajectory t = integrate_craig_synge(conf, p0, 0.0, 1.0, dt);
        return std::max({std::abs(t.states.back().x[0] - ref.states.back().x[0]),
                         std::abs(t.states.back().y1[0] - ref.states.back().y1[0]),
                         std::abs(t.states.back().y2[0] - ref.states.back().y2[0])});
    };
    const double o1 = std::log2(err(1e-2) / err(5e-3));
    const double o2 = std::log2(err(5e-3) / err(2.5e-3));
    const bool order_ok = o1 >= 3.7 && o1 <= 4.3 && o2 >= 3.7 && o2 <= 4.3;

    const auto* spec = conf.metric_spec();
    const Trajectory ct =
        integrate_craig_synge(conf, make_point({0.0}, {1.0}, {0.3}), 0.0, 1.0, 1e-3);
    const auto nb = monitor_nabla2_xdot(*spec, ct);
    const auto en = monitor_energy_identity(*spec, ct);
    const double nb_max = *std::max_element(nb.begin(), nb.end());
    const double en_max = *std::max_element(en.begin(), en.end());

    c.pass = flat_err <= 1e-10 && order_ok && nb_max <= 1e-5 && en_max <= 1e-5;
    std::ostringstream d;
    d << "flat endpoint " << flat_err << " (tol 1e-10), orders " << o1 << "/" << o2
      << " (window [3.7,4.3]), nabla2 " << nb_max << ", energy " << en_max << " (tol 1e-5)";
    c.detail = d.str();
    return c;
}

// 6. First-variation identity.
Criterion criterion_dynamics_variation() {
    Criterion c{"dynamics.variation"};
    double worst = 0.0;
    SampleRng rng(6001);
    for (int n : {1, 2}) {
        for (const auto& entry : t2geo::testing::test_registry(n)) {
            const registry::SampleBox& box = entry.box;
            for (int trial = 0; trial < 5; ++trial) {
                // A curve of the form mid + a t + b t^2 + c t^3 staying near
                // the middle of the sampling box.
                std::vector<std::string> comps;
                for (int i = 0; i < n; ++i) {
                    const double mid = 0.5 * (box.x_lo[i] + box.x_hi[i]);
                    const double spread = 0.15 * (box.x_hi[i] - box.x_lo[i]);
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), "%.9g + %.9g*t + %.9g*t^2 + %.9g*t^3",
                                  mid - 0.5 * spread, rng.uniform(-spread, spread),
                                  rng.uniform(-spread, spread), rng.uniform(-spread, spread));
                    comps.push_back(buf);
                }
                const CurveSpec curve = CurveSpec::from_strings(comps);
                VariationField V;
                for (int i = 0; i < n; ++i)
                    V.coeffs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
                const auto [lhs, rhs] = action_variation_check(entry.L, curve, V, 64);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    // Both sides vanish on solution curves.
    double worst_solution = 0.0;
    {
        VariationField V{{{0.8, -0.4}}};
        const auto [l1, r1] = action_variation_check(
            registry::flat(1), CurveSpec::from_strings({"0.1 + t - t^2/3"}), V, 64);
        const auto [l2, r2] = action_variation_check(
            registry::conformal1d(), CurveSpec::from_strings({"log(1 + t)"}), V, 64);
        worst_solution = std::max({std::abs(l1), std::abs(r1), std::abs(l2), std::abs(r2)});
    }
    c.pass = worst <= 1e-7 && worst_solution <= 1e-7;
    std::ostringstream d;
    d << "max |dI/de - bracket integral| " << worst << ", solution-curve variation "
      << worst_solution << " (tol 1e-7)";
    c.detail = d.str();
    return c;
}

// 7. Derivative substrate against the finite-difference oracle.
Criterion criterion_ad_substrate() {
    Criterion c{"ad.substrate"};
    double worst = 0.0;
    for (int n : {1, 2, 3}) {
        for (const auto& entry : t2geo::testing::test_registry(n)) {
            SampleRng rng(7000 + n);
            const int m = 3 * n;
            // Every multi-index of total order 1..4.
            std::vector<PartialRequest> reqs;
            std::vector<int> a(m, 0);
            std::function<void(int, int)> build = [&](int v, int rest) {
                if (v == m - 1) {
                    a[v] = rest;
                    if (std::any_of(a.begin(), a.end(), [](int x) { return x > 0; }))
                        reqs.push_back(PartialRequest{a});
                    a[v] = 0;
                    return;
                }
                for (int e = rest; e >= 0; --e) {
                    a[v] = e;
                    build(v + 1, rest - e);
                }
                a[v] = 0;
            };
            for (int total = 1; total <= 4; ++total) build(0, total);

            for (int k = 0; k < 50; ++k) {
                const Jet2Point p = rng.point(entry.box);
                const auto out = partials(entry.L, p, reqs);
                FdOracle fd(entry.L, p);
                for (const auto& [r, ad] : out) {
                    const double ref = fd.partial(r.orders);
                    const double rel = std::abs(ad - ref) / std::max(1.0, std::abs(ad));
                    worst = std::max(worst, rel);
                }
            }
        }
    }
    c.pass = worst <= 1e-6;
    std::ostringstream d;
    d << "max relative deviation " << worst << " (tol 1e-6)";
    c.detail = d.str();
    return c;
}

// 8. Tensor transformation laws under two analytic coordinate changes.
Criterion criterion_tensor_transform() {
    Criterion c{"tensor.transform"};
    struct Case {
        Lagrangian L;
        SemiRiemannian spec;
        Diffeo phi;
    };
    const std::vector<Case> cases = {
        {registry::conformal1d(), registry::conformal1d_metric(),
         Diffeo::from_strings({"x_1 + x_1^3/10"}, 1)},
        {registry::diag_exp(2), registry::diag_exp_metric(2),
         Diffeo::from_strings({"x_1 + x_2^2/5", "x_2 - x_1^2/7"}, 2)}};
    double worst = 0.0;
    for (const auto& cs : cases) {
        SampleRng rng(8000 + cs.L.dim());
        const auto box = registry::default_box(cs.L);
        auto base = std::make_shared<const Lagrangian>(cs.L);
        for (int k = 0; k < 25; ++k) {
            const Jet2Point p = rng.point(box);
            const Jet2Point pt = jet_transform(cs.phi, p);
            const Eigen::MatrixXd D = cs.phi.jacobian(p.x);
            const Eigen::MatrixXd Dinv = D.inverse();
            const Lagrangian moved = Lagrangian::pushforward(base, cs.phi, p.x);
            const Eigen::MatrixXd gt = metric_tensor(moved, pt).g;
            const Eigen::MatrixXd g = metric_tensor(cs.L, p).g;
            worst = std::max(worst,
                             (gt - Dinv.transpose() * g * Dinv).cwiseAbs().maxCoeff());
            SemiRiemannian moved_spec{std::make_shared<PushforwardMetric>(cs.spec, cs.phi, p.x),
                                      cs.spec.name + "#moved"};
            worst = std::max(
                worst, (z2(moved_spec, pt) - D * z2(cs.spec, p)).cwiseAbs().maxCoeff());
        }
    }
    c.pass = worst <= 1e-8;
    std::ostringstream d;
    d << "max law deviation " << worst << " (tol 1e-8)";
    c.detail = d.str();
    return c;
}

// 9. Command-line contract: determinism and exit codes.
struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const char* exe = std::getenv("T2GEO_CLI");
    if (!exe) return {};
    const std::string cmd = std::string(exe) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    CliResult r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    return path;
}

Criterion criterion_cli_contract() {
    Criterion c{"cli.contract"};
    if (!std::getenv("T2GEO_CLI")) {
        c.detail = "T2GEO_CLI not set";
        return c;
    }
    const std::string verify_cfg = write_file("/tmp/t2geo_acc_verify.json", R"({
      "dimension": 1,
      "lagrangian": {"kind": "builtin", "name": "conformal1d"},
      "points": {"random": {"count": 30, "seed": 99}},
      "tolerance": 1e-8,
      "format": "json"
    })");
    const CliResult v1 = run_cli("verify --config " + verify_cfg);
    const CliResult v2 = run_cli("verify --config " + verify_cfg);
    const bool verify_ok = v1.exit_code == 0 && v1.out == v2.out && !v1.out.empty();

    const std::string integrate_cfg = write_file("/tmp/t2geo_acc_integrate.json", R"({
      "dimension": 1,
      "lagrangian": {"kind": "builtin", "name": "flat"},
      "points": {"explicit": [{"x": [0.0], "y1": [1.0], "y2": [1.0]}]},
      "integrate": {"t0": 0.0, "t1": 1.0, "dt": 0.001,
                    "monitors": ["craig_synge_residual", "L1", "L2"]},
      "format": "csv"
    })");
    const CliResult i1 = run_cli("integrate --config " + integrate_cfg);
    const CliResult i2 = run_cli("integrate --config " + integrate_cfg);
    const bool integrate_ok = i1.exit_code == 0 && i1.out == i2.out && !i1.out.empty();

    const std::string bad_cfg = write_file("/tmp/t2geo_acc_bad.json", R"({
      "dimension": 0,
      "lagrangian": {"kind": "builtin", "name": "flat"}
    })");
    const bool config_code = run_cli("verify --config " + bad_cfg).exit_code == 1;

    const std::string degen_cfg = write_file("/tmp/t2geo_acc_degen.json", R"({
      "dimension": 1,
      "lagrangian": {"kind": "expression", "formula": "y1_1*y2_1"},
      "points": {"explicit": [{"x": [0.0], "y1": [1.0], "y2": [1.0]}]}
    })");
    const bool math_code = run_cli("inspect --config " + degen_cfg).exit_code == 2;

    const std::string step_cfg = write_file("/tmp/t2geo_acc_step.json", R"({
      "dimension": 2,
      "lagrangian": {"kind": "expression", "formula": "(2 + x_1)*y2_1^2 + y2_2^2"},
      "tolerance": 1e-6,
      "points": {"explicit": [{"x": [-1.0, 0.0], "y1": [-2.0, 0.0], "y2": [0.0, 0.0]}]},
      "integrate": {"t0": 0.0, "t1": 2.0, "dt": 0.01},
      "format": "json"
    })");
    const bool step_code = run_cli("integrate --config " + step_cfg).exit_code == 3;

    const std::string transform_cfg = write_file("/tmp/t2geo_acc_transform.json", R"({
      "dimension": 1,
      "lagrangian": {"kind": "builtin", "name": "conformal1d"},
      "points": {"random": {"count": 10, "seed": 4}},
      "transform": {"diffeo": ["x_1 + x_1^3/10"]},
      "format": "json"
    })");
    const bool transform_ok = run_cli("transform-check --config " + transform_cfg).exit_code == 0;

    c.pass = verify_ok && integrate_ok && config_code && math_code && step_code && transform_ok;
    std::ostringstream d;
    d << "verify determinism " << (verify_ok ? "ok" : "BAD") << ", integrate determinism "
      << (integrate_ok ? "ok" : "BAD") << ", exit codes "
      << (config_code && math_code && step_code ? "ok" : "BAD") << ", transform "
      << (transform_ok ? "ok" : "BAD");
    c.detail = d.str();
    return c;
}

} // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(criterion_semispray_uniqueness());
    results.push_back(criterion_cartan_identities());
    results.push_back(criterion_connection_compatibility());
    results.push_back(criterion_riemann_closed_forms());
    results.push_back(criterion_dynamics_integration());
    results.push_back(criterion_dynamics_variation());
    results.push_back(criterion_ad_substrate());
    results.push_back(criterion_tensor_transform());
    results.push_back(criterion_cli_contract());

    int failures = 0;
    for (const auto& c : results) {
        std::printf("%s  %-26s  %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        if (!c.pass) ++failures;
    }
    return failures;
}
