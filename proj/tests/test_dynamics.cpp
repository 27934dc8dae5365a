#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "t2geo/dynamics.hpp"

using namespace t2geo;
using t2geo::testing::make_point;

TEST_CASE("flat flow is an exact quadratic") {
    const Lagrangian L = registry::flat(1);
    const Trajectory traj = integrate_craig_synge(L, make_point({0.0}, {1.0}, {1.0}), 0.0, 1.0, 1e-3);
    REQUIRE_FALSE(traj.error.has_value());
    REQUIRE(traj.size() == 1001);
    const Jet2Point& last = traj.states.back();
    CHECK(last.x[0] == Catch::Approx(2.0).margin(1e-12));
    CHECK(last.y1[0] == Catch::Approx(3.0).margin(1e-12));
    CHECK(last.y2[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("conformal geodesics follow the logarithmic curve") {
    // x(t) = log(1+t) solves the third-order system for the conformal metric.
    const Lagrangian L = registry::conformal1d();
    const Trajectory traj =
        integrate_craig_synge(L, make_point({0.0}, {1.0}, {-0.5}), 0.0, 1.0, 1e-3);
    REQUIRE_FALSE(traj.error.has_value());
    CHECK(traj.states.back().x[0] == Catch::Approx(std::log(2.0)).margin(1e-10));
    CHECK(traj.states.back().y1[0] == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("integrator converges at fourth order") {
    const Lagrangian L = registry::conformal1d();
    const Jet2Point p0 = make_point({0.0}, {1.0}, {0.0});
    const Trajectory ref = integrate_craig_synge(L, p0, 0.0, 1.0, 1e-4);
    REQUIRE_FALSE(ref.error.has_value());
    auto endpoint_err = [&](double dt) {
        const Trajectory t = integrate_craig_synge(L, p0, 0.0, 1.0, dt);
        Eigen::VectorXd d(3);
        d << t.states.back().x[0] - ref.states.back().x[0],
            t.states.back().y1[0] - ref.states.back().y1[0],
            t.states.back().y2[0] - ref.states.back().y2[0];
        return d.cwiseAbs().maxCoeff();
    };
    const double e1 = endpoint_err(1e-2);
    const double e2 = endpoint_err(5e-3);
    const double e3 = endpoint_err(2.5e-3);
    const double o1 = std::log2(e1 / e2);
    const double o2 = std::log2(e2 / e3);
    CHECK(o1 > 3.7);
    CHECK(o1 < 4.3);
    CHECK(o2 > 3.7);
    CHECK(o2 < 4.3);
}

TEST_CASE("third-order residual shrinks quadratically with the step") {
    const Lagrangian L = registry::conformal1d();
    const Jet2Point p0 = make_point({0.0}, {1.0}, {0.2});
    auto max_residual = [&](double dt) {
        const Trajectory traj = integrate_craig_synge(L, p0, 0.0, 1.0, dt);
        const auto res = monitor_craig_synge(L, traj);
        return *std::max_element(res.begin(), res.end());
    };
    const double r1 = max_residual(2e-3);
    const double r2 = max_residual(1e-3);
    CHECK(r1 < 1e-4);
    CHECK(r1 / r2 > 3.0); // about 4x for an O(dt^2) difference scheme
    CHECK(r1 / r2 < 5.0);
}

TEST_CASE("defining relation holds pointwise along trajectories") {
    const Lagrangian L = registry::diag_exp(2);
    const Trajectory traj = integrate_craig_synge(
        L, make_point({0.0, 0.2}, {0.8, -0.3}, {0.1, 0.4}), 0.0, 0.5, 1e-3);
    REQUIRE_FALSE(traj.error.has_value());
    for (std::size_t k = 0; k < traj.size(); k += 50) {
        SprayEval spray(L, traj.states[k]);
        CHECK(semispray_defining_residual(spray) < 1e-8);
    }
}

TEST_CASE("covariant second derivative of the velocity vanishes along solutions") {
    const Lagrangian L = registry::conformal1d();
    const auto* spec = L.metric_spec();
    REQUIRE(spec);
    const Trajectory traj =
        integrate_craig_synge(L, make_point({0.0}, {1.0}, {0.3}), 0.0, 1.0, 1e-3);
    const auto mon = monitor_nabla2_xdot(*spec, traj);
    CHECK(*std::max_element(mon.begin(), mon.end()) < 1e-5);
}

TEST_CASE("flat trajectories satisfy the energy identity exactly") {
    const Lagrangian L = registry::flat(1);
    const auto* spec = L.metric_spec();
    const Trajectory traj =
        integrate_craig_synge(L, make_point({0.1}, {0.7}, {1.3}), 0.0, 1.0, 1e-3);
    const auto mon = monitor_energy_identity(*spec, traj);
    // Zero up to the rounding floor of the second difference (eps/dt^2).
    CHECK(*std::max_element(mon.begin(), mon.end()) < 1e-8);

    const auto nb = monitor_nabla2_xdot(*spec, traj);
    CHECK(*std::max_element(nb.begin(), nb.end()) < 1e-12);
}

TEST_CASE("energy identity along conformal solutions") {
    const Lagrangian L = registry::conformal1d();
    const auto* spec = L.metric_spec();
    const Trajectory traj =
        integrate_craig_synge(L, make_point({0.0}, {1.0}, {0.3}), 0.0, 1.0, 1e-3);
    const auto mon = monitor_energy_identity(*spec, traj);
    CHECK(*std::max_element(mon.begin(), mon.end()) < 1e-5);
}

TEST_CASE("acceleration energy is tied to the covariant velocity derivative") {
    // 8 L2 = 2 |nabla xdot|^2 pointwise.
    const Lagrangian L = registry::diag_exp(2);
    const auto* spec = L.metric_spec();
    const Trajectory traj = integrate_craig_synge(
        L, make_point({0.1, -0.2}, {0.9, 0.4}, {-0.3, 0.2}), 0.0, 0.5, 1e-3);
    const auto l2 = monitor_L2(L, traj);
    const auto nx = curve_nabla_xdot(*spec, traj);
    for (std::size_t k = 0; k < traj.size(); k += 25) {
        std::vector<double> g(4);
        std::span<const double> xs(traj.states[k].x.data(), 2);
        spec->field->metric(xs, g.data());
        double nrm = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) nrm += g[i * 2 + j] * nx[k][i] * nx[k][j];
        CHECK(8.0 * l2[k] == Catch::Approx(2.0 * nrm).margin(1e-9));
    }
}

TEST_CASE("geodesic initial data conserves the kinetic energy") {
    // y2 = -gamma y1 y1 / 2 makes the covariant acceleration vanish.
    const Lagrangian L = registry::conformal1d();
    const auto* spec = L.metric_spec();
    const Trajectory traj =
        integrate_craig_synge(L, make_point({0.0}, {1.0}, {-0.5}), 0.0, 1.0, 1e-3);
    const auto l1 = monitor_L1(*spec, traj);
    for (double v : l1) CHECK(v == Catch::Approx(l1.front()).margin(1e-6));
    const auto nx = curve_nabla_xdot(*spec, traj);
    for (const auto& v : nx) CHECK(v.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("step validation and failure modes") {
    const Lagrangian L = registry::flat(1);
    const Jet2Point p0 = make_point({0.0}, {1.0}, {0.0});
    CHECK_THROWS_AS(integrate_craig_synge(L, p0, 0.0, 1.0, -1e-3), ConfigError);
    CHECK_THROWS_AS(integrate_craig_synge(L, p0, 0.0, 1.0, 3e-4), ConfigError);

    // A Lagrangian whose metric block degenerates along the flow: the
    // relative gap between the metric eigenvalues collapses near x_1 = -2.
    const Lagrangian bad = Lagrangian::from_source("(2 + x_1)*y2_1^2 + y2_2^2", 2);
    const Trajectory traj = integrate_craig_synge(
        bad, make_point({-1.0, 0.0}, {-2.0, 0.0}, {0.0, 0.0}), 0.0, 2.0, 1e-2, 1e-6);
    CHECK(traj.error.has_value());
    CHECK(traj.size() >= 1);
    CHECK(traj.size() < 201);

    // A flow with finite-time blow-up overflows to a nonfinite state.
    const Lagrangian runaway = Lagrangian::from_source("y2_1^2 + y1_1^4", 1);
    const Trajectory blow = integrate_craig_synge(
        runaway, make_point({0.0}, {2.0}, {2.0}), 0.0, 8.0, 1e-2);
    REQUIRE(blow.error.has_value());
    CHECK(blow.error->find("nonfinite") != std::string::npos);
    CHECK(blow.size() < 801);
}

TEST_CASE("variation of the action: flat cubic curves") {
    const Lagrangian L = registry::flat(1);
    const CurveSpec cubic = CurveSpec::from_strings({"t + t^2 - t^3/2"});
    VariationField V{{{1.0}}};
    const auto [lhs, rhs] = action_variation_check(L, cubic, V, 64);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-8));

    const CurveSpec quad = CurveSpec::from_strings({"t + t^2"});
    const auto [l2, r2] = action_variation_check(L, quad, V, 64);
    CHECK(std::abs(l2) < 1e-8);
    CHECK(std::abs(r2) < 1e-8);
}

TEST_CASE("variation of the action: conformal curve with a second harmonic") {
    const Lagrangian L = registry::conformal1d();
    const CurveSpec c = CurveSpec::from_strings({"t + t^2/2"});
    VariationField V{{{0.0, 1.0}}};
    const auto [lhs, rhs] = action_variation_check(L, c, V, 64);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-7));
}

TEST_CASE("variation along a solution curve vanishes") {
    const Lagrangian L = registry::conformal1d();
    const CurveSpec geo = CurveSpec::from_strings({"log(1 + t)"});
    VariationField V{{{0.7, -0.3}}};
    const auto [lhs, rhs] = action_variation_check(L, geo, V, 64);
    CHECK(std::abs(lhs) < 1e-7);
    CHECK(std::abs(rhs) < 1e-7);
}

TEST_CASE("non-vanishing endpoint variation breaks agreement by the boundary term") {
    const Lagrangian L = registry::conformal1d();
    const CurveSpec c = CurveSpec::from_strings({"t + t^2/2"});
    auto V = [](double t) { return Eigen::VectorXd::Constant(1, t * t); };
    auto Vdot = [](double t) { return Eigen::VectorXd::Constant(1, 2.0 * t); };
    const auto [lhs, rhs] = action_variation_check(L, c, V, Vdot, 64);
    // Boundary term (dL/dy2_i V^i) at t=1 minus t=0; V(0)=0 here.
    const Jet2Point end = c.lift(1.0);
    PointEval ev(L, end, 1);
    const double boundary = ev.dL(kY2, 0).value() * 1.0;
    CHECK(lhs - rhs == Catch::Approx(boundary).margin(1e-7));
}

TEST_CASE("trajectory lift helper") {
    const CurveSpec c = CurveSpec::from_strings({"t + t^2"});
    const Jet2Point p = c.lift(0.5);
    CHECK(p.x[0] == Catch::Approx(0.75));
    CHECK(p.y1[0] == Catch::Approx(2.0 * 0.5 + 1.0));
    CHECK(p.y2[0] == Catch::Approx(1.0));
}
