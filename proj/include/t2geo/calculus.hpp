#pragma once

/// Partial-derivative extraction for Lagrangian-like scalar fields, with
/// variable-subset seeding: only coordinates that actually appear in a
/// request become Taylor variables, the rest stay constants.

#include <map>
#include <span>
#include <vector>

#include "t2geo/lagrangian.hpp"

namespace t2geo {

/// Multi-index over the 3n packed coordinates (x block, then y1, then y2).
struct PartialRequest {
    std::vector<int> orders;

    int total() const {
        int s = 0;
        for (int o : orders) s += o;
        return s;
    }
    bool operator<(const PartialRequest& other) const { return orders < other.orders; }
};

/// Exact partials of L at p for every request. Total order per request must
/// not exceed the truncation bound.
inline std::map<PartialRequest, double> partials(const Lagrangian& L, const Jet2Point& p,
                                                 const std::vector<PartialRequest>& reqs) {
    const int n = L.dim();
    const int m = 3 * n;
    int max_order = 1;
    std::vector<char> used(m, 0);
    for (const auto& r : reqs) {
        if (static_cast<int>(r.orders.size()) != m)
            throw std::invalid_argument("partials: request has wrong arity");
        if (r.total() > TaylorContext::kMaxOrder)
            throw std::invalid_argument("partials: total order exceeds the truncation bound");
        max_order = std::max(max_order, r.total());
        for (int v = 0; v < m; ++v)
            if (r.orders[v] > 0) used[v] = 1;
    }
    int nvars = 0;
    std::vector<int> slot(m, -1);
    for (int v = 0; v < m; ++v)
        if (used[v]) slot[v] = nvars++;
    if (nvars == 0) nvars = 1; // constant-only request set still needs a context

    auto ctx = TaylorContext::get(nvars, max_order);
    const Taylor one = Taylor::constant(ctx, 1.0), zero = Taylor::constant(ctx, 0.0);
    std::vector<Taylor> coords;
    coords.reserve(m);
    auto coord_value = [&](int v) {
        return v < n ? p.x[v] : (v < 2 * n ? p.y1[v - n] : p.y2[v - 2 * n]);
    };
    for (int v = 0; v < m; ++v)
        coords.push_back(slot[v] >= 0 ? Taylor::variable(ctx, slot[v], coord_value(v))
                                      : Taylor::constant(ctx, coord_value(v)));
    std::span<const Taylor> cs(coords.data(), coords.size());
    const auto ns = static_cast<std::size_t>(n);
    const Taylor val = L(cs.subspan(0, ns), cs.subspan(ns, ns), cs.subspan(2 * ns, ns), one, zero);
    if (!std::isfinite(val.value())) throw DomainError("Lagrangian not finite at the point");

    std::map<PartialRequest, double> out;
    std::vector<int> alpha(nvars);
    for (const auto& r : reqs) {
        std::fill(alpha.begin(), alpha.end(), 0);
        for (int v = 0; v < m; ++v)
            if (r.orders[v] > 0) alpha[slot[v]] = r.orders[v];
        out[r] = val.partial(alpha);
    }
    return out;
}

/// Tulczyjew total derivative y1^i df/dx^i + 2 y2^i df/dy1^i of a scalar
/// field given as an expression over the bundle coordinates.
inline double tulczyjew_dT(const ExprPtr& f, int n, const Jet2Point& p) {
    auto ctx = TaylorContext::get(2 * n, 1);
    std::vector<Taylor> coords;
    for (int i = 0; i < n; ++i) coords.push_back(Taylor::variable(ctx, i, p.x[i]));
    for (int i = 0; i < n; ++i) coords.push_back(Taylor::variable(ctx, n + i, p.y1[i]));
    for (int i = 0; i < n; ++i) coords.push_back(Taylor::constant(ctx, p.y2[i]));
    std::span<const Taylor> cs(coords.data(), coords.size());
    const auto ns = static_cast<std::size_t>(n);
    const Taylor val =
        eval<Taylor>(*f, {.x = cs.subspan(0, ns), .y1 = cs.subspan(ns, ns), .y2 = cs.subspan(2 * ns, ns)});
    double acc = 0.0;
    std::vector<int> alpha(2 * n, 0);
    for (int i = 0; i < n; ++i) {
        alpha[i] = 1;
        acc += p.y1[i] * val.partial(alpha);
        alpha[i] = 0;
        alpha[n + i] = 1;
        acc += 2.0 * p.y2[i] * val.partial(alpha);
        alpha[n + i] = 0;
    }
    return acc;
}

} // namespace t2geo
