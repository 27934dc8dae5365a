#pragma once

/**
 * Second-order Lagrangians and their point data.
 *
 * A Lagrangian is either a parsed expression in (x, y1, y2), the squared
 * covariant acceleration of a base metric, or an existing Lagrangian
 * re-expressed through a coordinate change. All three kinds evaluate with
 * identical structure over plain reals and Taylor scalars.
 *
 * PointEval is the workhorse: it seeds all 3n coordinates of a point as
 * Taylor variables, runs the Lagrangian through the truncated-Taylor
 * arithmetic once, and exposes the resulting derivative data (metric tensor,
 * one-forms, two-forms, directional operators) to the rest of the library.
 */

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "t2geo/errors.hpp"
#include "t2geo/expr.hpp"
#include "t2geo/linalg.hpp"
#include "t2geo/point.hpp"
#include "t2geo/riemann.hpp"
#include "t2geo/transform.hpp"

namespace t2geo {

class Lagrangian {
public:
    struct Pushforward {
        std::shared_ptr<const Lagrangian> base;
        std::shared_ptr<const Diffeo> phi;
        Eigen::VectorXd anchor;
    };

    static Lagrangian expression(ExprPtr ast, int n, std::string name = "expression") {
        Lagrangian L;
        L.n_ = n;
        L.name_ = std::move(name);
        L.impl_ = std::move(ast);
        return L;
    }
    static Lagrangian from_source(const std::string& src, int n) {
        return expression(parse_expression(src, n), n);
    }
    /// Squared covariant acceleration of a base metric.
    static Lagrangian metric_energy(SemiRiemannian spec) {
        Lagrangian L;
        L.n_ = spec.dim();
        L.name_ = spec.name;
        L.impl_ = std::move(spec);
        return L;
    }
    /// The same Lagrangian seen in the chart of `phi`, near anchor preimage.
    static Lagrangian pushforward(std::shared_ptr<const Lagrangian> base, Diffeo phi,
                                  Eigen::VectorXd anchor) {
        Lagrangian L;
        L.n_ = base->dim();
        L.name_ = base->name_ + "#pushforward";
        L.impl_ = Pushforward{std::move(base), std::make_shared<const Diffeo>(std::move(phi)),
                              std::move(anchor)};
        return L;
    }

    int dim() const { return n_; }
    const std::string& name() const { return name_; }

    /// Base metric when this Lagrangian is metric-induced, else nullptr.
    const SemiRiemannian* metric_spec() const { return std::get_if<SemiRiemannian>(&impl_); }

    template <class S>
    S operator()(std::span<const S> x, std::span<const S> y1, std::span<const S> y2, const S& one,
                 const S& zero) const {
        if (const auto* ast = std::get_if<ExprPtr>(&impl_))
            return eval<S>(**ast, {.x = x, .y1 = y1, .y2 = y2});
        if (const auto* spec = std::get_if<SemiRiemannian>(&impl_))
            return metric_energy_at<S>(*spec, x, y1, y2, one, zero);
        const auto& pf = std::get<Pushforward>(impl_);
        std::vector<S> bx, by1, by2;
        detail::inverse_jet_blocks<S>(*pf.phi, x, y1, y2, pf.anchor, one, zero, bx, by1, by2);
        return (*pf.base)(std::span<const S>(bx.data(), bx.size()),
                          std::span<const S>(by1.data(), by1.size()),
                          std::span<const S>(by2.data(), by2.size()), one, zero);
    }

    double value(const Jet2Point& p) const {
        const auto ns = static_cast<std::size_t>(n_);
        return (*this)(std::span<const double>(p.x.data(), ns),
                       std::span<const double>(p.y1.data(), ns),
                       std::span<const double>(p.y2.data(), ns), 1.0, 0.0);
    }

private:
    int n_ = 0;
    std::string name_;
    std::variant<ExprPtr, SemiRiemannian, Pushforward> impl_;
};

/// Coordinate block order used for all packed 3n-component objects.
enum CoordBlock { kX = 0, kY1 = 1, kY2 = 2 };

class PointEval {
public:
    /// Evaluates L at p with every coordinate seeded, at the given truncation
    /// order. The regularity gate (reciprocal condition number of the metric
    /// against `reg_tol`) runs only when the inverse metric is requested.
    PointEval(const Lagrangian& L, const Jet2Point& p, int order = 4, double reg_tol = 1e-10)
        : n_(L.dim()), point_(p), reg_tol_(reg_tol), ctx_(TaylorContext::get(3 * L.dim(), order)) {
        if (p.dim() != n_) throw std::invalid_argument("PointEval: dimension mismatch");
        coords_.reserve(3 * n_);
        for (int i = 0; i < n_; ++i) coords_.push_back(Taylor::variable(ctx_, i, p.x[i]));
        for (int i = 0; i < n_; ++i)
            coords_.push_back(Taylor::variable(ctx_, n_ + i, p.y1[i]));
        for (int i = 0; i < n_; ++i)
            coords_.push_back(Taylor::variable(ctx_, 2 * n_ + i, p.y2[i]));
        const Taylor one = Taylor::constant(ctx_, 1.0), zero = Taylor::constant(ctx_, 0.0);
        std::span<const Taylor> cs(coords_.data(), coords_.size());
        L_ = L(cs.subspan(0, n_), cs.subspan(n_, n_), cs.subspan(2 * n_, n_), one, zero);
        dL_.reserve(3 * n_);
        for (int v = 0; v < 3 * n_; ++v) dL_.push_back(L_.derive(v));
        if (order >= 2) {
            g_.reserve(static_cast<std::size_t>(n_) * n_);
            // Mixed partials commute exactly in this representation, so the
            // matrix is symmetric as built.
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    g_.push_back(0.5 * dL_[2 * n_ + i].derive(2 * n_ + j));
        }
    }

    int dim() const { return n_; }
    const Jet2Point& point() const { return point_; }
    const std::shared_ptr<const TaylorContext>& context() const { return ctx_; }
    const Taylor& lagrangian() const { return L_; }

    /// Coordinate function as an exact Taylor variable.
    const Taylor& coord(CoordBlock b, int i) const { return coords_[b * n_ + i]; }
    const Taylor& coord(int packed) const { return coords_[packed]; }

    /// First partial of L with respect to a packed coordinate index.
    const Taylor& dL(int packed) const { return dL_[packed]; }
    const Taylor& dL(CoordBlock b, int i) const { return dL_[b * n_ + i]; }

    const Taylor& metric(int i, int j) const { return g_[i * n_ + j]; }

    Eigen::MatrixXd metric_values() const {
        Eigen::MatrixXd m(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m(i, j) = g_[i * n_ + j].value();
        return m;
    }

    /// Reciprocal condition number of the metric values.
    double metric_rcond() const {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(metric_values());
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(n_ - 1);
        return smax > 0.0 ? smin / smax : 0.0;
    }

    /// Inverse metric as Taylor data; throws DegenerateLagrangian below the
    /// regularity tolerance. Cached after the first call.
    const std::vector<Taylor>& inverse_metric() const {
        if (ginv_.empty()) {
            const double rc = metric_rcond();
            if (!(rc > reg_tol_)) throw DegenerateLagrangian(rc);
            std::vector<Taylor> gi;
            if (!detail::gauss_invert(g_, n_, gi, Taylor::constant(ctx_, 1.0),
                                      Taylor::constant(ctx_, 0.0)))
                throw DegenerateLagrangian(rc);
            ginv_ = std::move(gi);
        }
        return ginv_;
    }
    const Taylor& inverse_metric(int i, int j) const { return inverse_metric()[i * n_ + j]; }

    /// Tulczyjew total derivative y1.d_x + 2 y2.d_y1 of a Taylor field.
    Taylor tulczyjew(const Taylor& f) const {
        Taylor acc = zero();
        for (int i = 0; i < n_; ++i) {
            acc += coord(kY1, i) * f.derive(i);
            acc += 2.0 * coord(kY2, i) * f.derive(n_ + i);
        }
        return acc;
    }

    Taylor zero() const { return Taylor::constant(ctx_, 0.0); }
    Taylor constant(double v) const { return Taylor::constant(ctx_, v); }

private:
    int n_;
    Jet2Point point_;
    double reg_tol_;
    std::shared_ptr<const TaylorContext> ctx_;
    std::vector<Taylor> coords_;
    Taylor L_;
    std::vector<Taylor> dL_;
    std::vector<Taylor> g_;
    mutable std::vector<Taylor> ginv_;
};

struct Metric {
    Eigen::MatrixXd g;
    std::optional<Eigen::MatrixXd> inverse;
    double rcond = 0.0;
};

/// Metric tensor 1/2 d2L/dy2 dy2, symmetrized, no regularity gate.
inline Metric metric_tensor(const Lagrangian& L, const Jet2Point& p) {
    PointEval ev(L, p, 2);
    return {ev.metric_values(), std::nullopt, ev.metric_rcond()};
}

/// Metric with inverse; throws DegenerateLagrangian (carrying the condition
/// estimate) when the reciprocal condition number is at or below `tol`.
inline Metric check_regularity(const Lagrangian& L, const Jet2Point& p, double tol = 1e-10) {
    PointEval ev(L, p, 2, tol);
    Metric m{ev.metric_values(), std::nullopt, ev.metric_rcond()};
    if (!(m.rcond > tol)) throw DegenerateLagrangian(m.rcond);
    m.inverse = Eigen::FullPivLU<Eigen::MatrixXd>(m.g).inverse();
    return m;
}

/// First Cartan-Poincare one-form: blocks (dL/dy1, dL/dy2, 0).
inline CotangentVec theta1(const PointEval& ev) {
    const int n = ev.dim();
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = ev.dL(kY1, i).value();
        b[i] = ev.dL(kY2, i).value();
    }
    return {ev.point(), a, b, Eigen::VectorXd::Zero(n)};
}

/// Second Cartan-Poincare one-form: blocks (dL/dy2, 0, 0).
inline CotangentVec theta2(const PointEval& ev) {
    const int n = ev.dim();
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = ev.dL(kY2, i).value();
    return {ev.point(), a, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

inline CotangentVec theta1(const Lagrangian& L, const Jet2Point& p) {
    return theta1(PointEval(L, p, 1));
}
inline CotangentVec theta2(const Lagrangian& L, const Jet2Point& p) {
    return theta2(PointEval(L, p, 1));
}

/// One-forms and two-forms over the 3n natural coordinates, with Taylor
/// components so that exterior derivatives remain exact.
using OneForm = std::vector<Taylor>;                // 3n components
using TwoForm = std::vector<std::vector<Taylor>>;   // 3n x 3n, skew

inline OneForm theta1_form(const PointEval& ev) {
    const int n = ev.dim();
    OneForm th(3 * n, ev.zero());
    for (int i = 0; i < n; ++i) {
        th[i] = ev.dL(kY1, i);
        th[n + i] = ev.dL(kY2, i);
    }
    return th;
}

inline OneForm theta2_form(const PointEval& ev) {
    const int n = ev.dim();
    OneForm th(3 * n, ev.zero());
    for (int i = 0; i < n; ++i) th[i] = ev.dL(kY2, i);
    return th;
}

/// Exterior derivative of a one-form: (d th)_{mu nu} = d_mu th_nu - d_nu th_mu.
inline TwoForm exterior_d(const PointEval& ev, const OneForm& th) {
    const int m = 3 * ev.dim();
    TwoForm om(m, std::vector<Taylor>(m, ev.zero()));
    for (int mu = 0; mu < m; ++mu)
        for (int nu = mu + 1; nu < m; ++nu) {
            Taylor v = th[nu].derive(mu) - th[mu].derive(nu);
            om[mu][nu] = v;
            om[nu][mu] = -v;
        }
    return om;
}

/// Interior product (i_V om)_nu = V^mu om_{mu nu}.
inline OneForm contract(const PointEval& ev, const TwoForm& om, const std::vector<Taylor>& V) {
    const int m = 3 * ev.dim();
    OneForm out(m, ev.zero());
    for (int nu = 0; nu < m; ++nu) {
        Taylor acc = ev.zero();
        for (int mu = 0; mu < m; ++mu) acc += V[mu] * om[mu][nu];
        out[nu] = acc;
    }
    return out;
}

inline Eigen::MatrixXd form_values(const TwoForm& om) {
    const int m = static_cast<int>(om.size());
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M(i, j) = om[i][j].value();
    return M;
}

inline Eigen::VectorXd form_values(const OneForm& th) {
    const int m = static_cast<int>(th.size());
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = th[i].value();
    return v;
}

/// Presymplectic two-form d(theta2) in the natural coframe.
inline TwoForm omega2_form(const PointEval& ev) { return exterior_d(ev, theta2_form(ev)); }
inline TwoForm omega1_form(const PointEval& ev) { return exterior_d(ev, theta1_form(ev)); }

inline Eigen::MatrixXd omega2(const Lagrangian& L, const Jet2Point& p) {
    PointEval ev(L, p, 2);
    return form_values(omega2_form(ev));
}
inline Eigen::MatrixXd omega1(const Lagrangian& L, const Jet2Point& p) {
    PointEval ev(L, p, 2);
    return form_values(omega1_form(ev));
}

/// Fiber-dilation derivatives C2(L) = y1.dL/dy1 + 2 y2.dL/dy2 and
/// C1(L) = y1.dL/dy2 as Taylor fields.
inline Taylor liouville2_of_L(const PointEval& ev) {
    Taylor acc = ev.zero();
    for (int i = 0; i < ev.dim(); ++i) {
        acc += ev.coord(kY1, i) * ev.dL(kY1, i);
        acc += 2.0 * ev.coord(kY2, i) * ev.dL(kY2, i);
    }
    return acc;
}
inline Taylor liouville1_of_L(const PointEval& ev) {
    Taylor acc = ev.zero();
    for (int i = 0; i < ev.dim(); ++i) acc += ev.coord(kY1, i) * ev.dL(kY2, i);
    return acc;
}

/// Gradient of a Taylor scalar field over the 3n coordinates.
inline OneForm gradient(const PointEval& ev, const Taylor& f) {
    OneForm out(3 * ev.dim(), ev.zero());
    for (int v = 0; v < 3 * ev.dim(); ++v) out[v] = f.derive(v);
    return out;
}

// ---------------------------------------------------------------------------
// Built-in Lagrangian registry.
// ---------------------------------------------------------------------------

namespace registry {

inline SemiRiemannian euclidean_metric(int n) {
    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(n, "0"));
    for (int i = 0; i < n; ++i) rows[i][i] = "1";
    return {ExprMetric::from_strings(rows, n), "euclidean" + std::to_string(n) + "d"};
}

inline SemiRiemannian conformal1d_metric() {
    return {ExprMetric::from_strings({{"exp(2*x_1)"}}, 1), "conformal1d"};
}

/// diag(e^{2 x_1}, 1, ..., 1)
inline SemiRiemannian diag_exp_metric(int n) {
    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(n, "0"));
    rows[0][0] = "exp(2*x_1)";
    for (int i = 1; i < n; ++i) rows[i][i] = "1";
    return {ExprMetric::from_strings(rows, n), "diag-exp" + std::to_string(n) + "d"};
}

/// diag(1, x_1^2); regular for x_1 bounded away from 0.
inline SemiRiemannian polar2d_metric() {
    return {ExprMetric::from_strings({{"1", "0"}, {"0", "x_1^2"}}, 2), "polar2d"};
}

inline Lagrangian flat(int n) { return Lagrangian::metric_energy(euclidean_metric(n)); }
inline Lagrangian conformal1d() { return Lagrangian::metric_energy(conformal1d_metric()); }
inline Lagrangian diag_exp(int n) { return Lagrangian::metric_energy(diag_exp_metric(n)); }
inline Lagrangian polar2d() { return Lagrangian::metric_energy(polar2d_metric()); }

inline Lagrangian by_name(const std::string& name, int n) {
    if (name == "flat") return flat(n);
    if (name == "conformal1d") {
        if (n != 1) throw ConfigError("lagrangian.name", "conformal1d requires dimension 1");
        return conformal1d();
    }
    if (name == "diag-exp") return diag_exp(n);
    if (name == "polar2d") {
        if (n != 2) throw ConfigError("lagrangian.name", "polar2d requires dimension 2");
        return polar2d();
    }
    throw ConfigError("lagrangian.name", "unknown builtin '" + name + "'");
}

/// Sampling box (per coordinate block) on which a registry entry is regular.
struct SampleBox {
    Eigen::VectorXd x_lo, x_hi;
    double y1_lo = -2.0, y1_hi = 2.0;
    double y2_lo = -2.0, y2_hi = 2.0;
};

inline SampleBox default_box(const Lagrangian& L) {
    const int n = L.dim();
    SampleBox box;
    box.x_lo = Eigen::VectorXd::Constant(n, -1.0);
    box.x_hi = Eigen::VectorXd::Constant(n, 1.0);
    if (L.name() == "polar2d") {
        box.x_lo[0] = 0.6;
        box.x_hi[0] = 2.5;
    }
    return box;
}

} // namespace registry
} // namespace t2geo
