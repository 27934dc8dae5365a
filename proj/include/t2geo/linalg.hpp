#pragma once

/// Generic Gauss-Jordan inversion for small dense matrices over any scalar
/// with value() semantics (double or Taylor). Row-major flat storage.

#include <cmath>
#include <vector>

#include "t2geo/taylor.hpp"

namespace t2geo::detail {

inline double scalar_value(double s) { return s; }
inline double scalar_value(const Taylor& s) { return s.value(); }

/// Invert an n x n matrix in place into `inv`. Returns false when the pivot
/// collapses (matrix numerically singular). Partial pivoting on |value|.
template <class S>
bool gauss_invert(std::vector<S> a, int n, std::vector<S>& inv, const S& one, const S& zero) {
    inv.assign(static_cast<std::size_t>(n) * n, zero);
    for (int i = 0; i < n; ++i) inv[i * n + i] = one;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(scalar_value(a[col * n + col]));
        for (int r = col + 1; r < n; ++r) {
            const double cand = std::abs(scalar_value(a[r * n + col]));
            if (cand > best) {
                best = cand;
                piv = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best)) return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        }
        S d = a[col * n + col];
        for (int c = 0; c < n; ++c) {
            a[col * n + c] = a[col * n + c] / d;
            inv[col * n + c] = inv[col * n + c] / d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            S f = a[r * n + col];
            for (int c = 0; c < n; ++c) {
                a[r * n + c] = a[r * n + c] - f * a[col * n + c];
                inv[r * n + c] = inv[r * n + c] - f * inv[col * n + c];
            }
        }
    }
    return true;
}

} // namespace t2geo::detail
