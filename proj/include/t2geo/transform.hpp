#pragma once

/**
 * Induced coordinate changes on the second-order bundle.
 *
 * A diffeomorphism of the base chart is given by expression components
 * phi^i(x); first and second derivative arrays come from the symbolic
 * derivatives of those expressions, so the induced 2-jet transform
 *
 *   xt    = phi(x)
 *   y1t^i = D^i_j y1^j
 *   y2t^i = 1/2 D2^i_{jk} y1^j y1^k + D^i_j y2^j
 *
 * evaluates identically over plain reals and Taylor scalars. The inverse jet
 * is recovered by a Newton iteration from an anchor preimage, which is what
 * lets a Lagrangian or metric be re-expressed in the new chart without an
 * elementary inverse formula.
 */

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "t2geo/errors.hpp"
#include "t2geo/expr.hpp"
#include "t2geo/linalg.hpp"
#include "t2geo/point.hpp"

namespace t2geo {

class Diffeo {
public:
    Diffeo(std::vector<ExprPtr> comps, int n) : n_(n), comps_(std::move(comps)) {
        if (static_cast<int>(comps_.size()) != n)
            throw std::invalid_argument("Diffeo: expected one component per dimension");
        d1_.resize(n);
        d2_.resize(n);
        for (int i = 0; i < n; ++i) {
            d1_[i].resize(n);
            d2_[i].resize(n);
            for (int j = 0; j < n; ++j) {
                d1_[i][j] = diff(comps_[i], VarClass::X, j);
                d2_[i][j].resize(n);
                for (int k = 0; k < n; ++k) d2_[i][j][k] = diff(d1_[i][j], VarClass::X, k);
            }
        }
    }

    static Diffeo from_strings(const std::vector<std::string>& srcs, int n) {
        std::vector<ExprPtr> comps;
        for (const auto& s : srcs) comps.push_back(parse_expression(s, n));
        return Diffeo(std::move(comps), n);
    }

    int dim() const { return n_; }

    template <class S>
    S component(int i, std::span<const S> x) const {
        return eval<S>(*comps_[i], {.x = x});
    }
    template <class S>
    S d1(int i, int j, std::span<const S> x) const {
        return eval<S>(*d1_[i][j], {.x = x});
    }
    template <class S>
    S d2(int i, int j, int k, std::span<const S> x) const {
        return eval<S>(*d2_[i][j][k], {.x = x});
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(n_);
        std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) out[i] = component<double>(i, xs);
        return out;
    }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd D(n_, n_);
        std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) D(i, j) = d1<double>(i, j, xs);
        return D;
    }
    /// Hessians of the components: out[i](j,k) = d^2 phi^i / dx^j dx^k.
    std::vector<Eigen::MatrixXd> hessians(const Eigen::VectorXd& x) const {
        std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
        std::vector<Eigen::MatrixXd> H(n_, Eigen::MatrixXd(n_, n_));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) H[i](j, k) = d2<double>(i, j, k, xs);
        return H;
    }

private:
    int n_;
    std::vector<ExprPtr> comps_;
    std::vector<std::vector<ExprPtr>> d1_;
    std::vector<std::vector<std::vector<ExprPtr>>> d2_;
};

/// Induced transform of 2-jet coordinates. Throws SingularJacobian when
/// |det D| falls below `det_tol`.
inline Jet2Point jet_transform(const Diffeo& phi, const Jet2Point& p, double det_tol = 1e-12) {
    const int n = p.dim();
    const Eigen::MatrixXd D = phi.jacobian(p.x);
    const double det = D.determinant();
    if (std::abs(det) < det_tol) throw SingularJacobian(std::abs(det));
    const auto H = phi.hessians(p.x);
    Eigen::VectorXd y2t(n);
    for (int i = 0; i < n; ++i) y2t[i] = 0.5 * p.y1.dot(H[i] * p.y1);
    y2t += D * p.y2;
    return Jet2Point(phi.apply(p.x), D * p.y1, y2t);
}

namespace detail {

/// Solve phi(x) = xt for x near `anchor`, over double or Taylor scalars.
/// Over Taylor values each Newton step doubles the correct series order.
template <class S>
std::vector<S> solve_preimage(const Diffeo& phi, std::span<const S> xt,
                              const Eigen::VectorXd& anchor, const S& one, const S& zero) {
    const int n = phi.dim();
    std::vector<S> x(n, zero);
    for (int i = 0; i < n; ++i) x[i] = x[i] + anchor[i];
    const int iters = std::is_same_v<S, double> ? 40 : 3 + TaylorContext::kMaxOrder;
    std::vector<S> jac(static_cast<std::size_t>(n) * n, zero), jinv;
    for (int it = 0; it < iters; ++it) {
        std::span<const S> xs(x.data(), x.size());
        std::vector<S> r(n, zero);
        for (int i = 0; i < n; ++i) r[i] = phi.component<S>(i, xs) - xt[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) jac[i * n + j] = phi.d1<S>(i, j, xs);
        if (!gauss_invert(jac, n, jinv, one, zero))
            throw SingularJacobian(0.0);
        double step = 0.0;
        for (int i = 0; i < n; ++i) {
            S dx = zero;
            for (int j = 0; j < n; ++j) dx = dx + jinv[i * n + j] * r[j];
            x[i] = x[i] - dx;
            step = std::max(step, std::abs(scalar_value(dx)));
        }
        if constexpr (std::is_same_v<S, double>) {
            if (step < 1e-14) break;
        }
    }
    return x;
}

/// Inverse 2-jet transform: blocks of the preimage point, generic over the
/// scalar. Dpsi = (Dphi(psi))^-1, and the second derivative of the inverse
/// follows from differentiating phi(psi(xt)) = xt.
template <class S>
void inverse_jet_blocks(const Diffeo& phi, std::span<const S> xt, std::span<const S> y1t,
                        std::span<const S> y2t, const Eigen::VectorXd& anchor, const S& one,
                        const S& zero, std::vector<S>& x, std::vector<S>& y1, std::vector<S>& y2) {
    const int n = phi.dim();
    x = solve_preimage(phi, xt, anchor, one, zero);
    std::span<const S> xs(x.data(), x.size());
    std::vector<S> D(static_cast<std::size_t>(n) * n, zero), Dpsi;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D[i * n + j] = phi.d1<S>(i, j, xs);
    if (!gauss_invert(D, n, Dpsi, one, zero)) throw SingularJacobian(0.0);

    y1.assign(n, zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) y1[i] = y1[i] + Dpsi[i * n + j] * y1t[j];

    // y2^k = Dpsi^k_m y2t^m - 1/2 Dpsi^k_m D2phi^m_{pq} y1^p y1^q
    y2.assign(n, zero);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) y2[k] = y2[k] + Dpsi[k * n + m] * y2t[m];
    for (int m = 0; m < n; ++m) {
        S quad = zero;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) quad = quad + phi.d2<S>(m, p, q, xs) * y1[p] * y1[q];
        for (int k = 0; k < n; ++k) y2[k] = y2[k] - 0.5 * Dpsi[k * n + m] * quad;
    }
}

} // namespace detail
} // namespace t2geo
