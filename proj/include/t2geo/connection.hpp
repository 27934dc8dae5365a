#pragma once

/**
 * The nonlinear connection compatible with the metric and the presymplectic
 * structure: first coefficients from the y2-gradient of the semispray
 * coefficients, second coefficients assembled from the symmetric part fixed
 * by vanishing second dynamical derivative of the metric and the skew part
 * fixed by horizontal isotropy of the presymplectic form.
 */

#include <Eigen/Dense>
#include <vector>

#include "t2geo/semispray.hpp"

namespace t2geo {

struct ConnectionData {
    Eigen::MatrixXd N1, N2, M1, M2;
    Eigen::MatrixXd g, ginv;
    Eigen::VectorXd G;
};

struct AdaptedFrame {
    // Columns of F are the adapted frame vectors in the natural frame;
    // rows of C are the adapted coframe covectors in the natural coframe.
    Eigen::MatrixXd F, C;
};

struct Theorem2Report {
    double cond1;        // omega2(h, v1) vs 2 g^c(h, v1)
    double nabla2_g;     // second dynamical derivative of the metric
    double subbundle;    // omega2 on (h,h), (v1,v1), (v2,v2)
    double adapted_rep;  // adapted-coframe block form of omega2
    double max_residual() const {
        return std::max(std::max(cond1, nabla2_g), std::max(subbundle, adapted_rep));
    }
};

class ConnectionEval {
public:
    /// `perturb_n2` adds a constant to every second coefficient after the
    /// construction (verification hook).
    explicit ConnectionEval(SprayEval spray, double perturb_n2 = 0.0) : spray_(std::move(spray)) {
        const PointEval& ev = spray_.point_eval();
        const int n = ev.dim();
        g_ = ev.metric_values();
        ginv_.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ginv_(i, j) = ev.inverse_metric(i, j).value();

        N1_.reserve(static_cast<std::size_t>(n) * n);
        N1v_.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                N1_.push_back(spray_.G(i).derive(2 * n + j));
                N1v_(i, j) = N1_.back().value();
            }

        Sg_.reserve(static_cast<std::size_t>(n) * n);
        Sgv_.resize(n, n);
        S2gv_.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Sg_.push_back(spray_.apply(ev.metric(i, j)));
                Sgv_(i, j) = Sg_.back().value();
                S2gv_(i, j) = spray_.apply(Sg_.back()).value();
            }

        // Second-derivative blocks of L: A_ij = d2L/dy2^i dy1^j,
        // C_ij = d2L/dy2^i dx^j.
        Eigen::MatrixXd A(n, n), Cm(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                A(i, j) = ev.dL(kY2, i).derive(n + j).value();
                Cm(i, j) = ev.dL(kY2, i).derive(j).value();
            }

        Eigen::MatrixXd sym(n, n), skew(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = S2gv_(i, j);
                for (int k = 0; k < n; ++k) {
                    s -= 2.0 * Sgv_(i, k) * N1v_(k, j);
                    s -= 2.0 * Sgv_(k, j) * N1v_(k, i);
                    for (int m = 0; m < n; ++m) s += 2.0 * g_(m, k) * N1v_(k, j) * N1v_(m, i);
                }
                sym(i, j) = s;
                double b = Cm(i, j) - Cm(j, i);
                for (int k = 0; k < n; ++k) {
                    b -= N1v_(k, j) * A(i, k);
                    b += N1v_(k, i) * A(j, k);
                }
                skew(i, j) = b;
            }
        // Lowered coefficients (first slot of g): 2(N+N^T) = sym, 2(N-N^T) = skew.
        N2low_ = 0.25 * (sym + skew);
        N2v_ = ginv_ * N2low_ + Eigen::MatrixXd::Constant(n, n, perturb_n2);
        M1v_ = N1v_;
        M2v_ = N2v_ + N1v_ * N1v_;
    }

    const SprayEval& spray() const { return spray_; }
    const PointEval& point_eval() const { return spray_.point_eval(); }
    int dim() const { return spray_.dim(); }

    const Taylor& N1_field(int i, int j) const { return N1_[i * dim() + j]; }
    const Taylor& Sg_field(int i, int j) const { return Sg_[i * dim() + j]; }
    const Eigen::MatrixXd& N1() const { return N1v_; }
    const Eigen::MatrixXd& N2() const { return N2v_; }
    const Eigen::MatrixXd& M1() const { return M1v_; }
    const Eigen::MatrixXd& M2() const { return M2v_; }
    const Eigen::MatrixXd& metric() const { return g_; }
    const Eigen::MatrixXd& inverse_metric() const { return ginv_; }
    const Eigen::MatrixXd& S_of_g() const { return Sgv_; }
    const Eigen::MatrixXd& S2_of_g() const { return S2gv_; }

    ConnectionData data() const {
        return {N1v_, N2v_, M1v_, M2v_, g_, ginv_, spray_.coeff_values()};
    }

    AdaptedFrame frame() const {
        const int n = dim();
        Eigen::MatrixXd F = Eigen::MatrixXd::Identity(3 * n, 3 * n);
        F.block(n, 0, n, n) = -N1v_;
        F.block(2 * n, 0, n, n) = -N2v_;
        F.block(2 * n, n, n, n) = -N1v_;
        Eigen::MatrixXd C = Eigen::MatrixXd::Identity(3 * n, 3 * n);
        C.block(n, 0, n, n) = M1v_;
        C.block(2 * n, 0, n, n) = M2v_;
        C.block(2 * n, n, n, n) = M1v_;
        return {F, C};
    }

    /// First dynamical derivative of a d-vector field given as Taylor
    /// components: S(X^i) + M1^i_j X^j.
    Eigen::VectorXd nabla(const std::vector<Taylor>& X) const {
        const int n = dim();
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) {
            double v = spray_.apply(X[i]).value();
            for (int j = 0; j < n; ++j) v += M1v_(i, j) * X[j].value();
            out[i] = v;
        }
        return out;
    }

    /// Second dynamical derivative: S^2(X^i) + 2 M1^i_j S(X^j) + 2 M2^i_j X^j.
    Eigen::VectorXd nabla2(const std::vector<Taylor>& X) const {
        const int n = dim();
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) {
            double v = spray_.apply_twice(X[i]).value();
            for (int j = 0; j < n; ++j) {
                v += 2.0 * M1v_(i, j) * spray_.apply(X[j]).value();
                v += 2.0 * M2v_(i, j) * X[j].value();
            }
            out[i] = v;
        }
        return out;
    }

    /// nabla g_ij = S(g_ij) - N1^k_i g_kj - N1^k_j g_ik.
    Eigen::MatrixXd nabla_g() const {
        const int n = dim();
        Eigen::MatrixXd out(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = Sgv_(i, j);
                for (int k = 0; k < n; ++k) v -= N1v_(k, i) * g_(k, j) + N1v_(k, j) * g_(i, k);
                out(i, j) = v;
            }
        return out;
    }

    /// nabla^2 g_ij = S^2(g_ij) - 2 N1^k_i S(g_kj) - 2 N1^k_j S(g_ik)
    ///                - 2 N2^k_i g_kj - 2 N2^k_j g_ik + 2 g_mk N1^k_j N1^m_i.
    Eigen::MatrixXd nabla2_g() const {
        const int n = dim();
        Eigen::MatrixXd out(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = S2gv_(i, j);
                for (int k = 0; k < n; ++k) {
                    v -= 2.0 * N1v_(k, i) * Sgv_(k, j) + 2.0 * N1v_(k, j) * Sgv_(i, k);
                    v -= 2.0 * N2v_(k, i) * g_(k, j) + 2.0 * N2v_(k, j) * g_(i, k);
                    for (int m = 0; m < n; ++m) v += 2.0 * g_(m, k) * N1v_(k, j) * N1v_(m, i);
                }
                out(i, j) = v;
            }
        return out;
    }

    /// Lift of the metric to the full bundle, natural-frame matrix:
    /// blocks (x,x) = S^2(g)/2, (x,y1) = S(g), (x,y2) = g, (y1,y1) = g.
    Eigen::MatrixXd gc_natural() const {
        const int n = dim();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
        out.block(0, 0, n, n) = 0.5 * S2gv_;
        out.block(0, n, n, n) = Sgv_;
        out.block(n, 0, n, n) = Sgv_;
        out.block(0, 2 * n, n, n) = g_;
        out.block(2 * n, 0, n, n) = g_;
        out.block(n, n, n, n) = g_;
        return out;
    }

    /// The same lift expressed in the adapted frame, built from the
    /// dynamical derivatives directly.
    Eigen::MatrixXd gc_adapted_expected() const {
        const int n = dim();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
        out.block(0, 0, n, n) = 0.5 * nabla2_g();
        out.block(0, n, n, n) = nabla_g();
        out.block(n, 0, n, n) = nabla_g();
        out.block(0, 2 * n, n, n) = g_;
        out.block(2 * n, 0, n, n) = g_;
        out.block(n, n, n, n) = g_;
        return out;
    }

    Theorem2Report verify() const {
        const int n = dim();
        const PointEval& ev = point_eval();
        const AdaptedFrame fr = frame();
        const Eigen::MatrixXd om = form_values(omega2_form(ev));
        const Eigen::MatrixXd om_ad = fr.F.transpose() * om * fr.F;
        const Eigen::MatrixXd gc_ad = fr.F.transpose() * gc_natural() * fr.F;
        Theorem2Report rep{};
        rep.cond1 = (om_ad.block(0, n, n, n) - 2.0 * gc_ad.block(0, n, n, n))
                        .cwiseAbs()
                        .maxCoeff();
        rep.nabla2_g = nabla2_g().cwiseAbs().maxCoeff();
        rep.subbundle = std::max({om_ad.block(0, 0, n, n).cwiseAbs().maxCoeff(),
                                  om_ad.block(n, n, n, n).cwiseAbs().maxCoeff(),
                                  om_ad.block(2 * n, 2 * n, n, n).cwiseAbs().maxCoeff()});
        const Eigen::MatrixXd ng = nabla_g();
        rep.adapted_rep =
            std::max({(om_ad.block(0, n, n, n) - 2.0 * ng).cwiseAbs().maxCoeff(),
                      (om_ad.block(2 * n, 0, n, n) - 2.0 * g_.transpose()).cwiseAbs().maxCoeff(),
                      om_ad.block(n, 2 * n, n, n).cwiseAbs().maxCoeff()});
        return rep;
    }

private:
    SprayEval spray_;
    std::vector<Taylor> N1_, Sg_;
    Eigen::MatrixXd g_, ginv_, N1v_, N2v_, N2low_, M1v_, M2v_, Sgv_, S2gv_;
};

/// Idempotent projectors onto the three adapted distributions.
struct Projectors {
    Eigen::MatrixXd h, v1, v2;
};

inline Projectors projectors(const AdaptedFrame& fr) {
    const int n = static_cast<int>(fr.F.rows()) / 3;
    auto proj = [&](int blk) {
        return fr.F.block(0, blk * n, 3 * n, n) * fr.C.block(blk * n, 0, n, 3 * n);
    };
    return {proj(0), proj(1), proj(2)};
}

inline Eigen::MatrixXd n1_coeffs(const Lagrangian& L, const Jet2Point& p) {
    return ConnectionEval(SprayEval(L, p)).N1();
}

inline Eigen::MatrixXd n2_coeffs(const Lagrangian& L, const Jet2Point& p) {
    return ConnectionEval(SprayEval(L, p)).N2();
}

/// Lowered first coefficients via the closed formula
/// N1_ij = 1/3 S(g_ij) + 1/3 d2L/dy2^i dy1^j - 1/6 d2L/dy2^j dy1^i
/// (independent derivation; production uses dG/dy2).
inline Eigen::MatrixXd n1_lowered_formula(const ConnectionEval& conn) {
    const PointEval& ev = conn.point_eval();
    const int n = conn.dim();
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double Aij = ev.dL(kY2, i).derive(n + j).value();
            const double Aji = ev.dL(kY2, j).derive(n + i).value();
            out(i, j) = conn.S_of_g()(i, j) / 3.0 + Aij / 3.0 - Aji / 6.0;
        }
    return out;
}

} // namespace t2geo
