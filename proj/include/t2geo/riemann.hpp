#pragma once

/**
 * Semi-Riemannian base metrics and the second-order Lagrangian they induce.
 *
 * A base metric g_ij(x) is exposed through a MetricField, which evaluates the
 * entries and their analytic x-gradients over plain reals or Taylor scalars.
 * Keeping the gradient analytic (symbolic derivatives of the entry
 * expressions, or the chain rule for a pushed-forward metric) preserves the
 * full derivative budget of downstream Taylor evaluations.
 *
 * The induced second-order Lagrangian is the squared magnitude of the
 * covariant acceleration z2^i = y2^i + 1/2 gamma^i_jk y1^j y1^k.
 */

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "t2geo/errors.hpp"
#include "t2geo/expr.hpp"
#include "t2geo/linalg.hpp"
#include "t2geo/point.hpp"
#include "t2geo/transform.hpp"

namespace t2geo {

class MetricField {
public:
    virtual ~MetricField() = default;
    virtual int dim() const = 0;
    /// g: n*n row-major.
    virtual void metric(std::span<const double> x, double* g) const = 0;
    virtual void metric(std::span<const Taylor> x, Taylor* g) const = 0;
    /// g plus dg[k*n*n + i*n + j] = d g_ij / d x^k.
    virtual void metric_grad(std::span<const double> x, double* g, double* dg) const = 0;
    virtual void metric_grad(std::span<const Taylor> x, Taylor* g, Taylor* dg) const = 0;
};

/// Metric with expression-backed entries; gradients are symbolic.
class ExprMetric final : public MetricField {
public:
    ExprMetric(std::vector<std::vector<ExprPtr>> entries, int n) : n_(n), g_(std::move(entries)) {
        dg_.resize(n);
        for (int k = 0; k < n; ++k) {
            dg_[k].resize(n);
            for (int i = 0; i < n; ++i) {
                dg_[k][i].resize(n);
                for (int j = 0; j < n; ++j) dg_[k][i][j] = diff(g_[i][j], VarClass::X, k);
            }
        }
    }

    static std::shared_ptr<ExprMetric> from_strings(const std::vector<std::vector<std::string>>& rows,
                                                    int n) {
        std::vector<std::vector<ExprPtr>> entries(n, std::vector<ExprPtr>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) entries[i][j] = parse_expression(rows[i][j], n);
        return std::make_shared<ExprMetric>(std::move(entries), n);
    }

    int dim() const override { return n_; }
    void metric(std::span<const double> x, double* g) const override { eval_g(x, g); }
    void metric(std::span<const Taylor> x, Taylor* g) const override { eval_g(x, g); }
    void metric_grad(std::span<const double> x, double* g, double* dg) const override {
        eval_gg(x, g, dg);
    }
    void metric_grad(std::span<const Taylor> x, Taylor* g, Taylor* dg) const override {
        eval_gg(x, g, dg);
    }

private:
    template <class S>
    void eval_g(std::span<const S> x, S* g) const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) g[i * n_ + j] = eval<S>(*g_[i][j], {.x = x});
    }
    template <class S>
    void eval_gg(std::span<const S> x, S* g, S* dg) const {
        eval_g(x, g);
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    dg[(k * n_ + i) * n_ + j] = eval<S>(*dg_[k][i][j], {.x = x});
    }

    int n_;
    std::vector<std::vector<ExprPtr>> g_;
    std::vector<std::vector<std::vector<ExprPtr>>> dg_;
};

struct SemiRiemannian {
    std::shared_ptr<const MetricField> field;
    std::string name;
    double nondegeneracy_tol = 1e-10;

    int dim() const { return field->dim(); }
};

/// Base metric re-expressed in the chart of a diffeomorphism:
/// gt(xt) = Dpsi^T g(psi(xt)) Dpsi with psi the (Newton-computed) inverse.
class PushforwardMetric final : public MetricField {
public:
    PushforwardMetric(SemiRiemannian base, Diffeo phi, Eigen::VectorXd anchor)
        : base_(std::move(base)), phi_(std::move(phi)), anchor_(std::move(anchor)) {}

    int dim() const override { return base_.dim(); }
    void metric(std::span<const double> x, double* g) const override {
        eval_g<double>(x, g, 1.0, 0.0);
    }
    void metric(std::span<const Taylor> x, Taylor* g) const override {
        const auto any = x[0];
        eval_g<Taylor>(x, g, Taylor::constant(any.context(), 1.0),
                       Taylor::constant(any.context(), 0.0));
    }
    void metric_grad(std::span<const double> x, double* g, double* dg) const override {
        eval_gg<double>(x, g, dg, 1.0, 0.0);
    }
    void metric_grad(std::span<const Taylor> x, Taylor* g, Taylor* dg) const override {
        const auto any = x[0];
        eval_gg<Taylor>(x, g, dg, Taylor::constant(any.context(), 1.0),
                        Taylor::constant(any.context(), 0.0));
    }

private:
    template <class S>
    void eval_g(std::span<const S> xt, S* g, const S& one, const S& zero) const {
        const int n = dim();
        std::vector<S> psi = detail::solve_preimage<S>(phi_, xt, anchor_, one, zero);
        std::span<const S> ps(psi.data(), psi.size());
        std::vector<S> D(static_cast<std::size_t>(n) * n, zero), Dpsi;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D[i * n + j] = phi_.d1<S>(i, j, ps);
        if (!detail::gauss_invert(D, n, Dpsi, one, zero)) throw SingularJacobian(0.0);
        std::vector<S> gb(static_cast<std::size_t>(n) * n, zero);
        base_.field->metric(ps, gb.data());
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                S acc = zero;
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        acc = acc + Dpsi[p * n + a] * gb[p * n + q] * Dpsi[q * n + b];
                g[a * n + b] = acc;
            }
    }

    template <class S>
    void eval_gg(std::span<const S> xt, S* g, S* dg, const S& one, const S& zero) const {
        const int n = dim();
        std::vector<S> psi = detail::solve_preimage<S>(phi_, xt, anchor_, one, zero);
        std::span<const S> ps(psi.data(), psi.size());
        std::vector<S> D(static_cast<std::size_t>(n) * n, zero), Dpsi;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D[i * n + j] = phi_.d1<S>(i, j, ps);
        if (!detail::gauss_invert(D, n, Dpsi, one, zero)) throw SingularJacobian(0.0);

        std::vector<S> gb(static_cast<std::size_t>(n) * n, zero);
        std::vector<S> dgb(static_cast<std::size_t>(n) * n * n, zero);
        base_.field->metric_grad(ps, gb.data(), dgb.data());

        // D2psi^k_{ab} = -Dpsi^k_m D2phi^m_{pq} Dpsi^p_a Dpsi^q_b
        std::vector<S> D2psi(static_cast<std::size_t>(n) * n * n, zero);
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    S acc = zero;
                    for (int m = 0; m < n; ++m)
                        for (int p = 0; p < n; ++p)
                            for (int q = 0; q < n; ++q)
                                acc = acc + Dpsi[k * n + m] * phi_.d2<S>(m, p, q, ps) *
                                                Dpsi[p * n + a] * Dpsi[q * n + b];
                    D2psi[(k * n + a) * n + b] = zero - acc;
                }

        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                S acc = zero;
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        acc = acc + Dpsi[p * n + a] * gb[p * n + q] * Dpsi[q * n + b];
                g[a * n + b] = acc;
            }
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    S acc = zero;
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) {
                            acc = acc + D2psi[(p * n + c) * n + a] * gb[p * n + q] * Dpsi[q * n + b];
                            acc = acc + Dpsi[p * n + a] * gb[p * n + q] * D2psi[(q * n + c) * n + b];
                            for (int m = 0; m < n; ++m)
                                acc = acc + Dpsi[p * n + a] * dgb[(m * n + p) * n + q] *
                                                Dpsi[m * n + c] * Dpsi[q * n + b];
                        }
                    dg[(c * n + a) * n + b] = acc;
                }
    }

    SemiRiemannian base_;
    Diffeo phi_;
    Eigen::VectorXd anchor_;
};

/// Christoffel symbols gamma[i][j][k] = 1/2 g^im (d_j g_mk + d_k g_mj - d_m g_jk).
template <class S>
void christoffels_at(const SemiRiemannian& spec, std::span<const S> x, const S& one,
                     const S& zero, std::vector<S>& gamma) {
    const int n = spec.dim();
    std::vector<S> g(static_cast<std::size_t>(n) * n, zero);
    std::vector<S> dg(static_cast<std::size_t>(n) * n * n, zero);
    spec.field->metric_grad(x, g.data(), dg.data());
    std::vector<S> gi;
    if (!detail::gauss_invert(g, n, gi, one, zero))
        throw SingularMetric("base metric singular at the queried point");
    gamma.assign(static_cast<std::size_t>(n) * n * n, zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                S acc = zero;
                for (int m = 0; m < n; ++m) {
                    S bracket = dg[(j * n + m) * n + k] + dg[(k * n + m) * n + j] -
                                dg[(m * n + j) * n + k];
                    acc = acc + gi[i * n + m] * bracket;
                }
                acc = 0.5 * acc;
                gamma[(i * n + j) * n + k] = acc;
                gamma[(i * n + k) * n + j] = acc;
            }
}

inline std::vector<Eigen::MatrixXd> christoffels(const SemiRiemannian& spec,
                                                 const Eigen::VectorXd& x) {
    const int n = spec.dim();
    std::vector<double> gamma;
    std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
    christoffels_at<double>(spec, xs, 1.0, 0.0, gamma);
    std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) out[i](j, k) = gamma[(i * n + j) * n + k];
    return out;
}

/// Covariant second-order acceleration z2^i = y2^i + 1/2 gamma^i_jk y1^j y1^k.
template <class S>
void z2_at(const SemiRiemannian& spec, std::span<const S> x, std::span<const S> y1,
           std::span<const S> y2, const S& one, const S& zero, std::vector<S>& out) {
    const int n = spec.dim();
    std::vector<S> gamma;
    christoffels_at(spec, x, one, zero, gamma);
    out.assign(n, zero);
    for (int i = 0; i < n; ++i) {
        S acc = y2[i];
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                acc = acc + 0.5 * gamma[(i * n + j) * n + k] * y1[j] * y1[k];
        out[i] = acc;
    }
}

inline Eigen::VectorXd z2(const SemiRiemannian& spec, const Jet2Point& p) {
    const int n = spec.dim();
    std::vector<double> out;
    z2_at<double>(spec, {p.x.data(), static_cast<std::size_t>(n)},
                  {p.y1.data(), static_cast<std::size_t>(n)},
                  {p.y2.data(), static_cast<std::size_t>(n)}, 1.0, 0.0, out);
    return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

/// Second-order Lagrangian g_ij z2^i z2^j (squared covariant acceleration).
template <class S>
S metric_energy_at(const SemiRiemannian& spec, std::span<const S> x, std::span<const S> y1,
                   std::span<const S> y2, const S& one, const S& zero) {
    const int n = spec.dim();
    std::vector<S> g(static_cast<std::size_t>(n) * n, zero);
    spec.field->metric(x, g.data());
    std::vector<S> z;
    z2_at(spec, x, y1, y2, one, zero, z);
    S acc = zero;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc = acc + g[i * n + j] * z[i] * z[j];
    return acc;
}

/// First-order kinetic energy g_ij y1^i y1^j.
template <class S>
S kinetic_energy_at(const SemiRiemannian& spec, std::span<const S> x, std::span<const S> y1,
                    const S& zero) {
    const int n = spec.dim();
    std::vector<S> g(static_cast<std::size_t>(n) * n, zero);
    spec.field->metric(x, g.data());
    S acc = zero;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc = acc + g[i * n + j] * y1[i] * y1[j];
    return acc;
}

inline double kinetic_energy(const SemiRiemannian& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y1) {
    const int n = spec.dim();
    return kinetic_energy_at<double>(spec, {x.data(), static_cast<std::size_t>(n)},
                                     {y1.data(), static_cast<std::size_t>(n)}, 0.0);
}

/// Closed-form semispray coefficients of the induced Lagrangian:
/// 3G^i = 1/2 (dgamma^i_jk/dx^m + gamma^i_pj gamma^p_km) y1^j y1^k y1^m
///        + 3 gamma^i_jk y1^j y2^k.
inline Eigen::VectorXd closed_form_spray(const SemiRiemannian& spec, const Jet2Point& p) {
    const int n = spec.dim();
    auto ctx = TaylorContext::get(n, 1);
    std::vector<Taylor> x;
    for (int i = 0; i < n; ++i) x.push_back(Taylor::variable(ctx, i, p.x[i]));
    const Taylor one = Taylor::constant(ctx, 1.0), zero = Taylor::constant(ctx, 0.0);
    std::vector<Taylor> gamma;
    christoffels_at<Taylor>(spec, {x.data(), x.size()}, one, zero, gamma);

    auto gam = [&](int i, int j, int k) { return gamma[(i * n + j) * n + k].value(); };
    auto dgam = [&](int i, int j, int k, int m) {
        std::vector<int> alpha(n, 0);
        alpha[m] = 1;
        return gamma[(i * n + j) * n + k].partial(alpha);
    };

    Eigen::VectorXd G(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                for (int m = 0; m < n; ++m) {
                    double paren = dgam(i, j, k, m);
                    for (int q = 0; q < n; ++q) paren += gam(i, q, j) * gam(q, k, m);
                    acc += 0.5 * paren * p.y1[j] * p.y1[k] * p.y1[m];
                }
                acc += 3.0 * gam(i, j, k) * p.y1[j] * p.y2[k];
            }
        G[i] = acc / 3.0;
    }
    return G;
}

/// Closed-form first connection coefficients gamma^i_jk y1^k.
inline Eigen::MatrixXd closed_form_connection1(const SemiRiemannian& spec, const Jet2Point& p) {
    const int n = spec.dim();
    auto gamma = christoffels(spec, p.x);
    Eigen::MatrixXd N1(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) N1(i, j) = gamma[i].row(j).dot(p.y1);
    return N1;
}

} // namespace t2geo
