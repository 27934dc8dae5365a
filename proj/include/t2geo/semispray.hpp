#pragma once

/**
 * The canonical third-order vector field of a regular second-order
 * Lagrangian. Its coefficients solve
 *
 *   3 G^j = 1/2 g^{ji} [ d_T(dL/dy2^i) - dL/dy1^i ],
 *
 * which is the unique choice making the Lie derivative of the second
 * Cartan-Poincare one-form along S equal to the first one.
 */

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "t2geo/lagrangian.hpp"

namespace t2geo {

struct SemisprayCoeffs {
    Eigen::VectorXd G;
};

class SprayEval {
public:
    /// Builds the coefficient fields; `perturb` adds a constant to every
    /// coefficient (verification hook, leaves the exact fields otherwise).
    explicit SprayEval(std::shared_ptr<const PointEval> ev, double perturb = 0.0)
        : ev_(std::move(ev)) {
        const int n = ev_->dim();
        std::vector<Taylor> rhs;
        rhs.reserve(n);
        for (int i = 0; i < n; ++i)
            rhs.push_back(ev_->tulczyjew(ev_->dL(kY2, i)) - ev_->dL(kY1, i));
        G_.reserve(n);
        for (int j = 0; j < n; ++j) {
            Taylor acc = ev_->zero();
            for (int i = 0; i < n; ++i) acc += ev_->inverse_metric(j, i) * rhs[i];
            G_.push_back(acc * (1.0 / 6.0) + perturb);
        }
    }
    SprayEval(const Lagrangian& L, const Jet2Point& p)
        : SprayEval(std::make_shared<const PointEval>(L, p)) {}

    const PointEval& point_eval() const { return *ev_; }
    const std::shared_ptr<const PointEval>& shared_point_eval() const { return ev_; }
    int dim() const { return ev_->dim(); }

    const Taylor& G(int i) const { return G_[i]; }
    Eigen::VectorXd coeff_values() const {
        Eigen::VectorXd g(dim());
        for (int i = 0; i < dim(); ++i) g[i] = G_[i].value();
        return g;
    }

    /// Natural-frame components (y1, 2 y2, -3G) as Taylor fields.
    std::vector<Taylor> vector_field() const {
        const int n = dim();
        std::vector<Taylor> S;
        S.reserve(3 * n);
        for (int i = 0; i < n; ++i) S.push_back(ev_->coord(kY1, i));
        for (int i = 0; i < n; ++i) S.push_back(2.0 * ev_->coord(kY2, i));
        for (int i = 0; i < n; ++i) S.push_back(-3.0 * G_[i]);
        return S;
    }

    /// Directional derivative along the semispray.
    Taylor apply(const Taylor& f) const {
        const int n = dim();
        Taylor acc = ev_->zero();
        for (int i = 0; i < n; ++i) {
            acc += ev_->coord(kY1, i) * f.derive(i);
            acc += 2.0 * ev_->coord(kY2, i) * f.derive(n + i);
            acc -= 3.0 * G_[i] * f.derive(2 * n + i);
        }
        return acc;
    }
    Taylor apply_twice(const Taylor& f) const { return apply(apply(f)); }

private:
    std::shared_ptr<const PointEval> ev_;
    std::vector<Taylor> G_;
};

inline SemisprayCoeffs semispray_coeffs(const Lagrangian& L, const Jet2Point& p) {
    return {SprayEval(L, p).coeff_values()};
}

inline TangentVec semispray_vector(const Lagrangian& L, const Jet2Point& p) {
    SprayEval s(L, p);
    return {p, p.y1, 2.0 * p.y2, -3.0 * s.coeff_values()};
}

/// Lie derivative of the second Cartan-Poincare one-form along the semispray
/// with the given coefficient values:
/// [d_T(dL/dy2_i) - 6 g_ji G^j] dx^i + (dL/dy2_i) dy1^i.
inline CotangentVec lie_theta2(const PointEval& ev, const Eigen::VectorXd& G) {
    const int n = ev.dim();
    Eigen::VectorXd ax(n), ay1(n);
    const Eigen::MatrixXd g = ev.metric_values();
    for (int i = 0; i < n; ++i) {
        double v = ev.tulczyjew(ev.dL(kY2, i)).value();
        for (int j = 0; j < n; ++j) v -= 6.0 * g(j, i) * G[j];
        ax[i] = v;
        ay1[i] = ev.dL(kY2, i).value();
    }
    return {ev.point(), ax, ay1, Eigen::VectorXd::Zero(n)};
}

inline CotangentVec lie_theta2(const Lagrangian& L, const Jet2Point& p) {
    SprayEval s(L, p);
    return lie_theta2(s.point_eval(), s.coeff_values());
}

/// Residual of i_S omega2 + d(C1(L)) - theta1, infinity norm over components.
inline double isomega_residual(const SprayEval& spray) {
    const PointEval& ev = spray.point_eval();
    OneForm isom = contract(ev, omega2_form(ev), spray.vector_field());
    OneForm dC1 = gradient(ev, liouville1_of_L(ev));
    OneForm th1 = theta1_form(ev);
    double r = 0.0;
    for (std::size_t k = 0; k < isom.size(); ++k)
        r = std::max(r, std::abs(isom[k].value() + dC1[k].value() - th1[k].value()));
    return r;
}

inline double verify_isomega(const Lagrangian& L, const Jet2Point& p) {
    return isomega_residual(SprayEval(L, p));
}

/// Residual of L_S omega2 - omega1 with L_S omega2 = d(i_S omega2)
/// (omega2 is closed), infinity norm over entries.
inline double lie_omega2_residual(const SprayEval& spray) {
    const PointEval& ev = spray.point_eval();
    OneForm isom = contract(ev, omega2_form(ev), spray.vector_field());
    TwoForm lhs = exterior_d(ev, isom);
    TwoForm rhs = omega1_form(ev);
    double r = 0.0;
    for (std::size_t a = 0; a < lhs.size(); ++a)
        for (std::size_t b = 0; b < lhs.size(); ++b)
            r = std::max(r, std::abs(lhs[a][b].value() - rhs[a][b].value()));
    return r;
}

inline double lie_omega2_equals_omega1(const Lagrangian& L, const Jet2Point& p) {
    return lie_omega2_residual(SprayEval(L, p));
}

/// Residual of the defining relation S(dL/dy2_i) = dL/dy1_i.
inline double semispray_defining_residual(const SprayEval& spray) {
    const PointEval& ev = spray.point_eval();
    double r = 0.0;
    for (int i = 0; i < spray.dim(); ++i)
        r = std::max(r, std::abs(spray.apply(ev.dL(kY2, i)).value() - ev.dL(kY1, i).value()));
    return r;
}

} // namespace t2geo
