#pragma once

/// Coordinate model of the second-order tangent bundle: points carry base
/// coordinates and two jet blocks; tangent/cotangent vectors carry the three
/// natural-frame blocks. The vertical endomorphisms shift blocks.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace t2geo {

struct Jet2Point {
    Eigen::VectorXd x, y1, y2;

    Jet2Point() = default;
    Jet2Point(Eigen::VectorXd x_, Eigen::VectorXd y1_, Eigen::VectorXd y2_)
        : x(std::move(x_)), y1(std::move(y1_)), y2(std::move(y2_)) {
        if (x.size() < 1 || y1.size() != x.size() || y2.size() != x.size())
            throw std::invalid_argument("Jet2Point: block sizes must match and be positive");
        if (!x.allFinite() || !y1.allFinite() || !y2.allFinite())
            throw std::invalid_argument("Jet2Point: components must be finite");
    }

    int dim() const { return static_cast<int>(x.size()); }
};

struct TangentVec {
    Jet2Point base;
    Eigen::VectorXd cx, cy1, cy2;

    int dim() const { return base.dim(); }
    Eigen::VectorXd packed() const {
        const int n = dim();
        Eigen::VectorXd v(3 * n);
        v << cx, cy1, cy2;
        return v;
    }
};

struct CotangentVec {
    Jet2Point base;
    Eigen::VectorXd ax, ay1, ay2;

    int dim() const { return base.dim(); }
    Eigen::VectorXd packed() const {
        const int n = dim();
        Eigen::VectorXd v(3 * n);
        v << ax, ay1, ay2;
        return v;
    }
    /// Natural pairing with a tangent vector at the same point.
    double pair(const TangentVec& v) const {
        return ax.dot(v.cx) + ay1.dot(v.cy1) + ay2.dot(v.cy2);
    }
};

/// Vertical endomorphism on tangent vectors: (cx, cy1, cy2) -> (0, cx, cy1).
inline TangentVec apply_J(const TangentVec& v) {
    const int n = v.dim();
    return {v.base, Eigen::VectorXd::Zero(n), v.cx, v.cy1};
}

/// Adjoint vertical endomorphism on covectors: (ax, ay1, ay2) -> (ay1, ay2, 0).
inline CotangentVec apply_Jstar(const CotangentVec& w) {
    const int n = w.dim();
    return {w.base, w.ay1, w.ay2, Eigen::VectorXd::Zero(n)};
}

inline TangentVec liouville_C2(const Jet2Point& p) {
    const int n = p.dim();
    return {p, Eigen::VectorXd::Zero(n), p.y1, 2.0 * p.y2};
}

inline TangentVec liouville_C1(const Jet2Point& p) {
    const int n = p.dim();
    return {p, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), p.y1};
}

/// The endomorphism J as a 3n x 3n block-shift matrix in the natural frame.
inline Eigen::MatrixXd J_matrix(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    J.block(n, 0, n, n).setIdentity();
    J.block(2 * n, n, n, n).setIdentity();
    return J;
}

} // namespace t2geo
