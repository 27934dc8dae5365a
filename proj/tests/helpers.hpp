#pragma once

// Shared test utilities. The finite-difference oracle lives here, in test
// code only, so production values never route through it.

#include <vector>

#include "t2geo/calculus.hpp"
#include "t2geo/lagrangian.hpp"
#include "t2geo/random.hpp"

namespace t2geo::testing {

/// Central-difference estimate of a mixed partial of L at p, with two
/// Richardson extrapolation levels. Step h0 per variable is scaled by the
/// coordinate magnitude, and enlarged for third/fourth order requests where
/// subtractive cancellation dominates at small steps.
class FdOracle {
public:
    FdOracle(const Lagrangian& L, const Jet2Point& p) : L_(L), p_(p), n_(L.dim()) {}

    double partial(const std::vector<int>& orders) const {
        int total = 0;
        for (int o : orders) total += o;
        if (total == 0) return value_at(std::vector<double>(3 * n_, 0.0));
        // 1e-2 steps keep truncation small for low orders; third and fourth
        // derivatives divide by h^3, h^4, so they need wider stencils before
        // rounding noise swamps the extrapolation.
        const double h0 = total <= 2 ? 1e-2 : 8e-2;
        const double d_h = stencil_sum(orders, h0);
        const double d_h2 = stencil_sum(orders, h0 / 2.0);
        const double d_h4 = stencil_sum(orders, h0 / 4.0);
        const double r1 = (4.0 * d_h2 - d_h) / 3.0;
        const double r2 = (4.0 * d_h4 - d_h2) / 3.0;
        return (16.0 * r2 - r1) / 15.0;
    }

private:
    double coord(int v) const {
        return v < n_ ? p_.x[v] : (v < 2 * n_ ? p_.y1[v - n_] : p_.y2[v - 2 * n_]);
    }

    double value_at(const std::vector<double>& shift) const {
        Eigen::VectorXd x = p_.x, y1 = p_.y1, y2 = p_.y2;
        for (int i = 0; i < n_; ++i) {
            x[i] += shift[i];
            y1[i] += shift[n_ + i];
            y2[i] += shift[2 * n_ + i];
        }
        const auto ns = static_cast<std::size_t>(n_);
        return L_(std::span<const double>(x.data(), ns), std::span<const double>(y1.data(), ns),
                  std::span<const double>(y2.data(), ns), 1.0, 0.0);
    }

    // Central stencils of O(h^2) accuracy for derivative orders 1..4.
    static void stencil(int order, std::vector<int>& offsets, std::vector<double>& coeffs) {
        switch (order) {
            case 1: offsets = {-1, 1}; coeffs = {-0.5, 0.5}; break;
            case 2: offsets = {-1, 0, 1}; coeffs = {1.0, -2.0, 1.0}; break;
            case 3: offsets = {-2, -1, 1, 2}; coeffs = {-0.5, 1.0, -1.0, 0.5}; break;
            case 4: offsets = {-2, -1, 0, 1, 2}; coeffs = {1.0, -4.0, 6.0, -4.0, 1.0}; break;
            default: throw std::invalid_argument("stencil order");
        }
    }

    double stencil_sum(const std::vector<int>& orders, double h0) const {
        std::vector<int> vars;
        for (int v = 0; v < 3 * n_; ++v)
            if (orders[v] > 0) vars.push_back(v);
        std::vector<double> shift(3 * n_, 0.0);
        double denom = 1.0;
        std::vector<double> steps(vars.size());
        for (std::size_t k = 0; k < vars.size(); ++k) {
            steps[k] = h0 * std::max(1.0, std::abs(coord(vars[k])));
            for (int o = 0; o < orders[vars[k]]; ++o) denom *= steps[k];
        }
        double acc = 0.0;
        recurse(vars, steps, orders, 0, 1.0, shift, acc);
        return acc / denom;
    }

    void recurse(const std::vector<int>& vars, const std::vector<double>& steps,
                 const std::vector<int>& orders, std::size_t k, double weight,
                 std::vector<double>& shift, double& acc) const {
        if (k == vars.size()) {
            acc += weight * value_at(shift);
            return;
        }
        std::vector<int> offs;
        std::vector<double> cf;
        stencil(orders[vars[k]], offs, cf);
        for (std::size_t m = 0; m < offs.size(); ++m) {
            shift[vars[k]] = offs[m] * steps[k];
            recurse(vars, steps, orders, k + 1, weight * cf[m], shift, acc);
        }
        shift[vars[k]] = 0.0;
    }

    const Lagrangian& L_;
    const Jet2Point& p_;
    int n_;
};

inline Jet2Point make_point(std::initializer_list<double> x, std::initializer_list<double> y1,
                            std::initializer_list<double> y2) {
    auto tov = [](std::initializer_list<double> v) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double d : v) out[i++] = d;
        return out;
    };
    return Jet2Point(tov(x), tov(y1), tov(y2));
}

/// Registry entries exercised across the suites, with their sampling boxes.
struct NamedLagrangian {
    Lagrangian L;
    registry::SampleBox box;
};

inline std::vector<NamedLagrangian> test_registry(int n) {
    std::vector<NamedLagrangian> out;
    auto add = [&out](Lagrangian L) {
        registry::SampleBox box = registry::default_box(L);
        out.push_back({std::move(L), std::move(box)});
    };
    if (n == 1) {
        add(registry::flat(1));
        add(registry::conformal1d());
        add(Lagrangian::expression(parse_expression("y2_1^2 + y1_1^4", 1), 1, "quartic1d"));
    } else if (n == 2) {
        add(registry::flat(2));
        add(registry::diag_exp(2));
        add(registry::polar2d());
        add(Lagrangian::expression(
            parse_expression("(1 + exp(2*x_1))*y2_1^2 + y2_2^2 + sin(x_2)*y2_1*y2_2 "
                             "+ y2_1*y1_2^2 + exp(x_1)*y2_2*y1_1 + y1_1^4 + x_2^2*y1_1*y1_2",
                             2),
            2, "asym2d"));
    } else {
        add(registry::flat(n));
        add(registry::diag_exp(n));
    }
    return out;
}

} // namespace t2geo::testing
