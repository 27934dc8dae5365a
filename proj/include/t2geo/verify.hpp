#pragma once

/**
 * Named residual suites over sampled points. Each residual is the maximum
 * over the samples of an identity that the construction must satisfy; the
 * names are part of the reporting interface:
 *
 *   prop1.1       vertical distributions are isotropic for the two-forms
 *   prop1.2       one-form pairings with the semispray give the dilation
 *                 derivatives of L
 *   prop1.3       Lie derivatives of the one-forms via the homotopy formula
 *   thm1.lstheta  Lie derivative of the second one-form equals the first
 *   cor.isomega   interior-product characterization of the semispray
 *   cor.lieomega  Lie derivative of the presymplectic form equals d(theta1)
 *   thm2.cond1    mixed horizontal/vertical pairing against the metric lift
 *   thm2.nabla2g  second dynamical derivative of the metric vanishes
 *   thm2.dhtheta  presymplectic form reduces to its adapted block form
 *   prop2.n1      the two derivations of the first coefficients agree
 *   sl2           defining relation S(dL/dy2) = dL/dy1
 */

#include <string>
#include <vector>

#include "t2geo/connection.hpp"
#include "t2geo/semispray.hpp"

namespace t2geo {

struct ResidualCase {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<ResidualCase> cases;
    bool all_pass() const {
        for (const auto& c : cases)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline double lie_oneform_identity_residual(const PointEval& ev, const SprayEval& spray,
                                            const OneForm& theta, const TwoForm& dtheta,
                                            const Taylor& dilation_of_L) {
    const auto S = spray.vector_field();
    // Left side: the coordinate Lie derivative
    // (L_S theta)_nu = S(theta_nu) + theta_mu d_nu(S^mu).
    // Right side: i_S d(theta) + d(C(L)) with C the matching dilation field.
    OneForm is_dth = contract(ev, dtheta, S);
    OneForm d_dil = gradient(ev, dilation_of_L);
    double r = 0.0;
    for (std::size_t nu = 0; nu < theta.size(); ++nu) {
        double lhs = spray.apply(theta[nu]).value();
        for (std::size_t mu = 0; mu < theta.size(); ++mu)
            lhs += theta[mu].value() * S[mu].derive(static_cast<int>(nu)).value();
        const double rhs = is_dth[nu].value() + d_dil[nu].value();
        r = std::max(r, std::abs(lhs - rhs));
    }
    return r;
}

} // namespace detail

/// All named residuals at a single point. `perturb` feeds the verification
/// hook: it offsets the semispray coefficients in the semispray suites and
/// the second connection coefficients in the connection suites.
inline std::vector<ResidualCase> residuals_at(const Lagrangian& L, const Jet2Point& p,
                                              double perturb = 0.0) {
    auto ev = std::make_shared<const PointEval>(L, p);
    const int n = ev->dim();
    SprayEval spray(ev, perturb);
    ConnectionEval conn(perturb == 0.0 ? spray : SprayEval(ev), perturb);

    std::vector<ResidualCase> out;
    auto add = [&out](const std::string& name, double value) {
        out.push_back({name, value, 0.0, false});
    };

    // prop1.1
    {
        const Eigen::MatrixXd J = J_matrix(n);
        const Eigen::MatrixXd J2 = J * J;
        const Eigen::MatrixXd om2 = form_values(omega2_form(*ev));
        const Eigen::MatrixXd om1 = form_values(omega1_form(*ev));
        const double r = std::max({(J.transpose() * om2 * J).cwiseAbs().maxCoeff(),
                                   (J2.transpose() * om2 * J2).cwiseAbs().maxCoeff(),
                                   (J2.transpose() * om1 * J2).cwiseAbs().maxCoeff()});
        add("prop1.1", r);
    }
    // prop1.2
    {
        const auto S = spray.vector_field();
        const OneForm th1 = theta1_form(*ev), th2 = theta2_form(*ev);
        Taylor th1S = ev->zero(), th2S = ev->zero();
        for (int mu = 0; mu < 3 * n; ++mu) {
            th1S += th1[mu] * S[mu];
            th2S += th2[mu] * S[mu];
        }
        const double r = std::max(std::abs(th1S.value() - liouville2_of_L(*ev).value()),
                                  std::abs(th2S.value() - liouville1_of_L(*ev).value()));
        add("prop1.2", r);
    }
    // prop1.3
    {
        const OneForm th1 = theta1_form(*ev), th2 = theta2_form(*ev);
        const double r1 = detail::lie_oneform_identity_residual(*ev, spray, th1,
                                                                exterior_d(*ev, th1),
                                                                liouville2_of_L(*ev));
        const double r2 = detail::lie_oneform_identity_residual(*ev, spray, th2,
                                                                exterior_d(*ev, th2),
                                                                liouville1_of_L(*ev));
        add("prop1.3", std::max(r1, r2));
    }
    // thm1.lstheta
    {
        const CotangentVec ls = lie_theta2(*ev, spray.coeff_values());
        const CotangentVec th1 = theta1(*ev);
        const double r = std::max((ls.ax - th1.ax).cwiseAbs().maxCoeff(),
                                  (ls.ay1 - th1.ay1).cwiseAbs().maxCoeff());
        add("thm1.lstheta", r);
    }
    add("cor.isomega", isomega_residual(spray));
    add("cor.lieomega", lie_omega2_residual(spray));
    {
        const Theorem2Report rep = conn.verify();
        add("thm2.cond1", rep.cond1);
        add("thm2.nabla2g", rep.nabla2_g);
        add("thm2.dhtheta", std::max(rep.subbundle, rep.adapted_rep));
    }
    // prop2.n1
    {
        const Eigen::MatrixXd lowered = conn.metric() * conn.N1();
        add("prop2.n1", (lowered - n1_lowered_formula(conn)).cwiseAbs().maxCoeff());
    }
    add("sl2", semispray_defining_residual(spray));
    return out;
}

/// Maximum residual per suite over a set of points.
inline VerifyReport verify_suite(const Lagrangian& L, const std::vector<Jet2Point>& points,
                                 double tolerance, double perturb = 0.0) {
    VerifyReport rep;
    for (const auto& p : points) {
        const auto cases = residuals_at(L, p, perturb);
        if (rep.cases.empty()) {
            rep.cases = cases;
        } else {
            for (std::size_t i = 0; i < cases.size(); ++i)
                rep.cases[i].value = std::max(rep.cases[i].value, cases[i].value);
        }
    }
    for (auto& c : rep.cases) {
        c.tolerance = tolerance;
        c.pass = c.value <= tolerance;
    }
    return rep;
}

} // namespace t2geo
