#pragma once

/**
 * Flow of the canonical semispray as a first-order system
 *
 *   dx/dt = y1,  dy1/dt = 2 y2,  dy2/dt = -3 G(x, y1, y2),
 *
 * integrated with fixed-step classical RK4, plus trajectory monitors and a
 * quadrature check of the variational characterization of the flow.
 */

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "t2geo/connection.hpp"
#include "t2geo/lagrangian.hpp"
#include "t2geo/riemann.hpp"
#include "t2geo/semispray.hpp"

namespace t2geo {

struct Trajectory {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Jet2Point> states;
    // Ordered so serialization is deterministic.
    std::map<std::string, std::vector<double>> monitors;
    std::optional<std::string> error;

    int dim() const { return states.empty() ? 0 : states.front().dim(); }
    std::size_t size() const { return states.size(); }
};

namespace detail {

inline Eigen::VectorXd craig_synge_rhs(const Lagrangian& L, const Eigen::VectorXd& s,
                                       double reg_tol, double t) {
    if (!s.allFinite()) throw StepError(t);
    const int n = L.dim();
    Jet2Point p(s.segment(0, n), s.segment(n, n), s.segment(2 * n, n));
    PointEval ev(L, p, 2, reg_tol);
    SprayEval spray(std::make_shared<const PointEval>(std::move(ev)));
    Eigen::VectorXd out(3 * n);
    out << p.y1, 2.0 * p.y2, -3.0 * spray.coeff_values();
    return out;
}

} // namespace detail

/// Fixed-step RK4 integration of the third-order flow. On a mid-flight
/// degeneracy or nonfinite state the partial trajectory is returned with the
/// error field set.
inline Trajectory integrate_craig_synge(const Lagrangian& L, const Jet2Point& p0, double t0,
                                        double t1, double dt, double reg_tol = 1e-10) {
    if (!(dt > 0.0)) throw ConfigError("integrate.dt", "step must be positive");
    const double span = t1 - t0;
    if (!(span > 0.0)) throw ConfigError("integrate.t1", "span must be positive");
    const long long steps = std::llround(span / dt);
    if (steps < 1 || std::abs(steps * dt - span) > 1e-9 * std::max(1.0, std::abs(span)))
        throw ConfigError("integrate.dt", "span must be an integral number of steps");

    const int n = L.dim();
    Trajectory traj;
    traj.dt = dt;
    traj.t.reserve(steps + 1);
    traj.states.reserve(steps + 1);

    Eigen::VectorXd s(3 * n);
    s << p0.x, p0.y1, p0.y2;
    traj.t.push_back(t0);
    traj.states.push_back(p0);

    for (long long k = 0; k < steps; ++k) {
        const double t = t0 + k * dt;
        try {
            const Eigen::VectorXd k1 = detail::craig_synge_rhs(L, s, reg_tol, t);
            const Eigen::VectorXd k2 =
                detail::craig_synge_rhs(L, s + 0.5 * dt * k1, reg_tol, t);
            const Eigen::VectorXd k3 =
                detail::craig_synge_rhs(L, s + 0.5 * dt * k2, reg_tol, t);
            const Eigen::VectorXd k4 = detail::craig_synge_rhs(L, s + dt * k3, reg_tol, t);
            s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } catch (const DegenerateLagrangian& e) {
            traj.error = e.what();
            return traj;
        } catch (const StepError& e) {
            traj.error = e.what();
            return traj;
        } catch (const DomainError& e) {
            traj.error = e.what();
            return traj;
        }
        if (!s.allFinite()) {
            traj.error = StepError(t + dt).what();
            return traj;
        }
        traj.t.push_back(t0 + (k + 1) * dt);
        traj.states.emplace_back(s.segment(0, n), s.segment(n, n), s.segment(2 * n, n));
    }
    return traj;
}

namespace detail {

/// d/dt of a sampled channel, second-order accurate including one-sided ends.
inline std::vector<double> ddt(const std::vector<double>& f, double dt) {
    const std::size_t m = f.size();
    std::vector<double> out(m, 0.0);
    if (m < 3) return out;
    out[0] = (-1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2]) / dt;
    for (std::size_t k = 1; k + 1 < m; ++k) out[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
    out[m - 1] = (1.5 * f[m - 1] - 2.0 * f[m - 2] + 0.5 * f[m - 3]) / dt;
    return out;
}

/// d2/dt2, second-order accurate including one-sided ends.
inline std::vector<double> d2dt2(const std::vector<double>& f, double dt) {
    const std::size_t m = f.size();
    std::vector<double> out(m, 0.0);
    if (m < 4) return out;
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dt * dt);
    for (std::size_t k = 1; k + 1 < m; ++k)
        out[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (dt * dt);
    out[m - 1] = (2.0 * f[m - 1] - 5.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4]) / (dt * dt);
    return out;
}

} // namespace detail

/// Residual of the third-order equations dL/dy1_i - d/dt(dL/dy2_i) per
/// sample (infinity norm over i); the time derivative is taken by
/// differencing the sampled momenta.
inline std::vector<double> monitor_craig_synge(const Lagrangian& L, const Trajectory& traj) {
    const int n = L.dim();
    const std::size_t m = traj.size();
    std::vector<std::vector<double>> p2(n, std::vector<double>(m));
    std::vector<std::vector<double>> p1(n, std::vector<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
        PointEval ev(L, traj.states[k], 1);
        for (int i = 0; i < n; ++i) {
            p2[i][k] = ev.dL(kY2, i).value();
            p1[i][k] = ev.dL(kY1, i).value();
        }
    }
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto dp2 = detail::ddt(p2[i], traj.dt);
        for (std::size_t k = 0; k < m; ++k)
            out[k] = std::max(out[k], std::abs(p1[i][k] - dp2[k]));
    }
    return out;
}

/// Velocity covariant derivative along the curve (base-metric Levi-Civita):
/// (nabla xdot)^i = d(xdot^i)/dt + gamma^i_jk xdot^j xdot^k, evaluated
/// pointwise through the covariant acceleration.
inline std::vector<Eigen::VectorXd> curve_nabla_xdot(const SemiRiemannian& spec,
                                                     const Trajectory& traj) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(traj.size());
    for (const auto& st : traj.states) out.push_back(2.0 * z2(spec, st));
    return out;
}

/// Second covariant derivative of the velocity along the curve, with the
/// outer d/dt taken by differencing the sampled first derivative.
inline std::vector<Eigen::VectorXd> curve_nabla2_xdot(const SemiRiemannian& spec,
                                                      const Trajectory& traj) {
    const int n = spec.dim();
    const std::size_t m = traj.size();
    const auto nx = curve_nabla_xdot(spec, traj);
    std::vector<std::vector<double>> chan(n, std::vector<double>(m));
    for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) chan[i][k] = nx[k][i];
    std::vector<std::vector<double>> dchan(n);
    for (int i = 0; i < n; ++i) dchan[i] = detail::ddt(chan[i], traj.dt);
    std::vector<Eigen::VectorXd> out(m, Eigen::VectorXd::Zero(n));
    for (std::size_t k = 0; k < m; ++k) {
        const auto gamma = christoffels(spec, traj.states[k].x);
        for (int i = 0; i < n; ++i) {
            double v = dchan[i][k];
            v += traj.states[k].y1.dot(gamma[i] * nx[k]);
            out[k][i] = v;
        }
    }
    return out;
}

/// Per-sample infinity norm of the second covariant derivative of the
/// velocity; vanishes along solution curves.
inline std::vector<double> monitor_nabla2_xdot(const SemiRiemannian& spec,
                                               const Trajectory& traj) {
    const auto n2 = curve_nabla2_xdot(spec, traj);
    std::vector<double> out(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) out[k] = n2[k].cwiseAbs().maxCoeff();
    return out;
}

/// Residual of d2/dt2 |xdot|^2 - 2 |nabla xdot|^2 - 2 g(xdot, nabla2 xdot)
/// per sample.
inline std::vector<double> monitor_energy_identity(const SemiRiemannian& spec,
                                                   const Trajectory& traj) {
    const int n = spec.dim();
    const std::size_t m = traj.size();
    std::vector<double> sq(m);
    for (std::size_t k = 0; k < m; ++k)
        sq[k] = kinetic_energy(spec, traj.states[k].x, traj.states[k].y1);
    const auto lhs = detail::d2dt2(sq, traj.dt);
    const auto nx = curve_nabla_xdot(spec, traj);
    const auto n2x = curve_nabla2_xdot(spec, traj);
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> g(static_cast<std::size_t>(n) * n);
        std::span<const double> xs(traj.states[k].x.data(), static_cast<std::size_t>(n));
        spec.field->metric(xs, g.data());
        double nrm = 0.0, cross = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                nrm += g[i * n + j] * nx[k][i] * nx[k][j];
                cross += g[i * n + j] * traj.states[k].y1[i] * n2x[k][j];
            }
        out[k] = std::abs(lhs[k] - 2.0 * nrm - 2.0 * cross);
    }
    return out;
}

inline std::vector<double> monitor_L1(const SemiRiemannian& spec, const Trajectory& traj) {
    std::vector<double> out(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k)
        out[k] = kinetic_energy(spec, traj.states[k].x, traj.states[k].y1);
    return out;
}

inline std::vector<double> monitor_L2(const Lagrangian& L, const Trajectory& traj) {
    std::vector<double> out(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) out[k] = L.value(traj.states[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Variational check.
// ---------------------------------------------------------------------------

/// Analytic base curve t -> x(t), components as expressions in t.
struct CurveSpec {
    std::vector<ExprPtr> comps;
    int n = 0;

    static CurveSpec from_strings(const std::vector<std::string>& srcs) {
        CurveSpec c;
        c.n = static_cast<int>(srcs.size());
        for (const auto& s : srcs) c.comps.push_back(parse_expression(s, 1, /*allow_time=*/true));
        return c;
    }

    /// Holonomic lift (x, xdot, xddot/2) at parameter t.
    Jet2Point lift(double t) const {
        auto ctx = TaylorContext::get(1, 2);
        const Taylor tt = Taylor::variable(ctx, 0, t);
        Eigen::VectorXd x(n), y1(n), y2(n);
        for (int i = 0; i < n; ++i) {
            const Taylor c = eval<Taylor>(*comps[i], {.t = &tt});
            x[i] = c.value();
            y1[i] = c.coefficient(1);
            y2[i] = c.coefficient(2); // xddot/2: the coefficient is already f''/2!
        }
        return Jet2Point(x, y1, y2);
    }
};

/// Vector field along [0,1] with endpoints pinned to zero: a finite sine
/// series V^i(t) = sum_k a_ik sin(k pi t).
struct VariationField {
    std::vector<std::vector<double>> coeffs; // per component, per harmonic

    Eigen::VectorXd value(double t) const {
        Eigen::VectorXd v(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < coeffs[i].size(); ++k)
                acc += coeffs[i][k] * std::sin((k + 1) * M_PI * t);
            v[static_cast<int>(i)] = acc;
        }
        return v;
    }
    Eigen::VectorXd rate(double t) const {
        Eigen::VectorXd v(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < coeffs[i].size(); ++k)
                acc += coeffs[i][k] * (k + 1) * M_PI * std::cos((k + 1) * M_PI * t);
            v[static_cast<int>(i)] = acc;
        }
        return v;
    }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

/// Composite Gauss-Legendre integral over [0,1] with `total` nodes split
/// into 16-point panels.
template <class F>
double integrate01(F&& f, int total) {
    const int per_panel = std::min(total, 16);
    const int panels = std::max(1, total / per_panel);
    std::vector<double> xs, ws;
    gauss_legendre(per_panel, xs, ws);
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = static_cast<double>(p) / panels;
        const double b = static_cast<double>(p + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = 0; k < per_panel; ++k) acc += half * ws[k] * f(mid + half * xs[k]);
    }
    return acc;
}

} // namespace detail

/// Both sides of the first-variation identity when only the jet part of the
/// curve is varied: the epsilon-derivative of the action versus the integral
/// of the bracketed third-order expression against V. Returns (lhs, rhs).
inline std::pair<double, double> action_variation_check(
    const Lagrangian& L, const CurveSpec& curve,
    const std::function<Eigen::VectorXd(double)>& V,
    const std::function<Eigen::VectorXd(double)>& Vdot, int quad_n, double eps = 1e-5) {
    const int n = L.dim();
    const auto ns = static_cast<std::size_t>(n);

    auto lifted = [&](double t, Eigen::VectorXd& x, Eigen::VectorXd& y1, Eigen::VectorXd& y2,
                      Eigen::VectorXd& y1dot, Eigen::VectorXd& y2dot) {
        auto ctx = TaylorContext::get(1, 3);
        const Taylor tt = Taylor::variable(ctx, 0, t);
        x.resize(n);
        y1.resize(n);
        y2.resize(n);
        y1dot.resize(n);
        y2dot.resize(n);
        for (int i = 0; i < n; ++i) {
            const Taylor c = eval<Taylor>(*curve.comps[i], {.t = &tt});
            x[i] = c.value();
            y1[i] = c.coefficient(1);
            y2[i] = c.coefficient(2);              // = xddot/2
            y1dot[i] = 2.0 * c.coefficient(2);     // xddot
            y2dot[i] = 3.0 * c.coefficient(3);     // xdddot/2
        }
    };

    auto action = [&](double e) {
        return detail::integrate01(
            [&](double t) {
                Eigen::VectorXd x, y1, y2, y1d, y2d;
                lifted(t, x, y1, y2, y1d, y2d);
                const Eigen::VectorXd vy1 = y1 + e * V(t);
                const Eigen::VectorXd vy2 = y2 + e * Vdot(t);
                return L(std::span<const double>(x.data(), ns),
                         std::span<const double>(vy1.data(), ns),
                         std::span<const double>(vy2.data(), ns), 1.0, 0.0);
            },
            quad_n);
    };
    const double lhs = (action(eps) - action(-eps)) / (2.0 * eps);

    const double rhs = detail::integrate01(
        [&](double t) {
            Eigen::VectorXd x, y1, y2, y1d, y2d;
            lifted(t, x, y1, y2, y1d, y2d);
            Jet2Point p(x, y1, y2);
            PointEval ev(L, p, 2);
            // d/dt (dL/dy2_i) along the lifted curve by the chain rule.
            double acc = 0.0;
            const Eigen::VectorXd v = V(t);
            for (int i = 0; i < n; ++i) {
                double dpdt = 0.0;
                const Taylor& pi = ev.dL(kY2, i);
                for (int mu = 0; mu < n; ++mu) {
                    dpdt += pi.derive(mu).value() * y1[mu];
                    dpdt += pi.derive(n + mu).value() * y1d[mu];
                    dpdt += pi.derive(2 * n + mu).value() * y2d[mu];
                }
                acc += (ev.dL(kY1, i).value() - dpdt) * v[i];
            }
            return acc;
        },
        quad_n);
    return {lhs, rhs};
}

inline std::pair<double, double> action_variation_check(const Lagrangian& L,
                                                        const CurveSpec& curve,
                                                        const VariationField& V, int quad_n,
                                                        double eps = 1e-5) {
    return action_variation_check(
        L, curve, [&V](double t) { return V.value(t); }, [&V](double t) { return V.rate(t); },
        quad_n, eps);
}

} // namespace t2geo
