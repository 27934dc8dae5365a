#pragma once

/**
 * Dense multivariate truncated Taylor arithmetic.
 *
 * A Taylor value stores the coefficients of a polynomial in m formal
 * perturbations, truncated at a fixed total degree (at most 4). Seeding the
 * coordinates of an evaluation point as variables and running a function
 * through this arithmetic yields every partial derivative of the function up
 * to the truncation order, exact to floating-point rounding.
 *
 * Each value carries a `valid order`: the largest total degree whose
 * coefficients are meaningful. Differentiating lowers it by one; binary
 * operations take the minimum of the operands. Coefficients beyond the valid
 * order are kept at exactly zero, and reading past it throws, so an
 * order-budget overrun fails loudly instead of returning garbage.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "t2geo/errors.hpp"

namespace t2geo {

class TaylorContext {
public:
    static constexpr int kMaxOrder = 4;

    TaylorContext(int nvars, int order) : nvars_(nvars), order_(order) {
        if (nvars < 1 || order < 1 || order > kMaxOrder)
            throw std::invalid_argument("TaylorContext: bad nvars/order");
        enumerate();
        build_tables();
    }

    /// Shared, cached context for (nvars, order).
    static std::shared_ptr<const TaylorContext> get(int nvars, int order) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::shared_ptr<const TaylorContext>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{nvars, order}];
        if (!slot) slot = std::make_shared<const TaylorContext>(nvars, order);
        return slot;
    }

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(degree_.size()); }
    int degree(int idx) const { return degree_[idx]; }

    /// Exponent of variable v in monomial idx.
    int exponent(int idx, int v) const { return exps_[static_cast<std::size_t>(idx) * nvars_ + v]; }

    /// Monomial index for a multi-index, or -1 if the total degree exceeds
    /// the truncation order.
    int index_of(std::span<const int> alpha) const {
        std::uint64_t key = 0;
        int total = 0;
        for (int v = 0; v < nvars_; ++v) {
            total += alpha[v];
            key |= static_cast<std::uint64_t>(alpha[v]) << (4 * v);
        }
        if (total > order_) return -1;
        auto it = lookup_.find(key);
        return it == lookup_.end() ? -1 : it->second;
    }

    struct ProdTerm {
        std::int32_t a, b, dst;
    };
    struct DerivTerm {
        std::int32_t src, dst;
        double factor;
    };

    const std::vector<ProdTerm>& products() const { return prod_; }
    const std::vector<DerivTerm>& derivs(int var) const { return deriv_[var]; }

private:
    void enumerate() {
        std::vector<int> alpha(nvars_, 0);
        // Graded enumeration: all multi-indices of total degree d, d = 0..order.
        for (int d = 0; d <= order_; ++d) emit(alpha, 0, d);
    }

    void emit(std::vector<int>& alpha, int v, int remaining) {
        if (v == nvars_ - 1) {
            alpha[v] = remaining;
            record(alpha);
            alpha[v] = 0;
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            alpha[v] = e;
            emit(alpha, v + 1, remaining - e);
        }
        alpha[v] = 0;
    }

    void record(const std::vector<int>& alpha) {
        std::uint64_t key = 0;
        int total = 0;
        for (int v = 0; v < nvars_; ++v) {
            key |= static_cast<std::uint64_t>(alpha[v]) << (4 * v);
            total += alpha[v];
        }
        lookup_.emplace(key, static_cast<int>(degree_.size()));
        degree_.push_back(total);
        for (int v = 0; v < nvars_; ++v) exps_.push_back(static_cast<std::uint8_t>(alpha[v]));
    }

    void build_tables() {
        const int m = size();
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                if (degree_[a] + degree_[b] > order_) continue;
                std::uint64_t key = 0;
                for (int v = 0; v < nvars_; ++v)
                    key |= static_cast<std::uint64_t>(exponent(a, v) + exponent(b, v)) << (4 * v);
                prod_.push_back({a, b, lookup_.at(key)});
            }
        }
        deriv_.resize(nvars_);
        std::vector<int> alpha(nvars_);
        for (int v = 0; v < nvars_; ++v) {
            for (int src = 0; src < m; ++src) {
                const int e = exponent(src, v);
                if (e == 0) continue;
                for (int w = 0; w < nvars_; ++w) alpha[w] = exponent(src, w);
                alpha[v] = e - 1;
                deriv_[v].push_back({src, index_of(alpha), static_cast<double>(e)});
            }
        }
    }

    int nvars_, order_;
    std::vector<int> degree_;
    std::vector<std::uint8_t> exps_;
    std::unordered_map<std::uint64_t, int> lookup_;
    std::vector<ProdTerm> prod_;
    std::vector<std::vector<DerivTerm>> deriv_;
};

class Taylor {
public:
    Taylor() = default;

    static Taylor constant(std::shared_ptr<const TaylorContext> ctx, double value) {
        Taylor t(std::move(ctx));
        t.c_[0] = value;
        t.valid_ = t.ctx_->order();
        return t;
    }

    static Taylor variable(std::shared_ptr<const TaylorContext> ctx, int var, double value) {
        Taylor t(std::move(ctx));
        t.c_[0] = value;
        std::vector<int> alpha(t.ctx_->nvars(), 0);
        alpha[var] = 1;
        t.c_[t.ctx_->index_of(alpha)] = 1.0;
        t.valid_ = t.ctx_->order();
        return t;
    }

    const std::shared_ptr<const TaylorContext>& context() const { return ctx_; }
    int valid_order() const { return valid_; }
    double value() const { return c_[0]; }
    double coefficient(int idx) const { return c_[idx]; }

    /// Partial derivative for a multi-index (coefficient times the factorial
    /// of the multi-index). Throws if the requested order exceeds the valid
    /// order of this value.
    double partial(std::span<const int> alpha) const {
        int total = 0;
        double fact = 1.0;
        for (std::size_t v = 0; v < alpha.size(); ++v) {
            total += alpha[v];
            for (int k = 2; k <= alpha[v]; ++k) fact *= k;
        }
        if (total > valid_)
            throw std::logic_error("Taylor::partial: requested order " + std::to_string(total) +
                                   " exceeds valid order " + std::to_string(valid_));
        const int idx = ctx_->index_of(alpha);
        if (idx < 0) throw std::logic_error("Taylor::partial: order beyond truncation");
        return c_[idx] * fact;
    }

    /// Exact derivative with respect to one variable; valid order drops by one.
    Taylor derive(int var) const {
        if (valid_ < 1) throw std::logic_error("Taylor::derive: no derivative budget left");
        Taylor out(ctx_);
        for (const auto& d : ctx_->derivs(var)) out.c_[d.dst] = c_[d.src] * d.factor;
        out.valid_ = valid_ - 1;
        out.truncate();
        return out;
    }

    Taylor operator-() const {
        Taylor out(ctx_);
        for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] = -c_[i];
        out.valid_ = valid_;
        return out;
    }

    friend Taylor operator+(const Taylor& a, const Taylor& b) {
        Taylor out(a.ctx_);
        for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = a.c_[i] + b.c_[i];
        out.valid_ = std::min(a.valid_, b.valid_);
        out.truncate();
        return out;
    }
    friend Taylor operator-(const Taylor& a, const Taylor& b) {
        Taylor out(a.ctx_);
        for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = a.c_[i] - b.c_[i];
        out.valid_ = std::min(a.valid_, b.valid_);
        out.truncate();
        return out;
    }
    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor out(a.ctx_);
        for (const auto& p : a.ctx_->products()) out.c_[p.dst] += a.c_[p.a] * b.c_[p.b];
        out.valid_ = std::min(a.valid_, b.valid_);
        out.truncate();
        return out;
    }
    friend Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }

    friend Taylor operator+(const Taylor& a, double s) {
        Taylor out = a;
        out.c_[0] += s;
        return out;
    }
    friend Taylor operator+(double s, const Taylor& a) { return a + s; }
    friend Taylor operator-(const Taylor& a, double s) { return a + (-s); }
    friend Taylor operator-(double s, const Taylor& a) { return -a + s; }
    friend Taylor operator*(const Taylor& a, double s) {
        Taylor out(a.ctx_);
        for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = a.c_[i] * s;
        out.valid_ = a.valid_;
        return out;
    }
    friend Taylor operator*(double s, const Taylor& a) { return a * s; }
    friend Taylor operator/(const Taylor& a, double s) { return a * (1.0 / s); }
    friend Taylor operator/(double s, const Taylor& a) { return reciprocal(a) * s; }

    Taylor& operator+=(const Taylor& b) { return *this = *this + b; }
    Taylor& operator-=(const Taylor& b) { return *this = *this - b; }
    Taylor& operator*=(const Taylor& b) { return *this = *this * b; }
    Taylor& operator/=(const Taylor& b) { return *this = *this / b; }

    /// Truncated composition f(u) from the derivatives of f at value(u):
    /// series[k] = f^(k)(u0) / k!. Used by every elementary function.
    friend Taylor compose(const Taylor& u, std::span<const double> series) {
        Taylor w = u;
        w.c_[0] = 0.0;
        const int K = std::min<int>(u.valid_, static_cast<int>(series.size()) - 1);
        Taylor r = constant(u.ctx_, series[K]);
        for (int k = K - 1; k >= 0; --k) r = r * w + series[k];
        r.valid_ = u.valid_;
        r.truncate();
        return r;
    }

    friend Taylor reciprocal(const Taylor& u) {
        const double u0 = u.value();
        if (u0 == 0.0 || !std::isfinite(u0)) throw DomainError("division by zero");
        std::array<double, TaylorContext::kMaxOrder + 1> d{};
        double p = 1.0 / u0;
        for (int k = 0; k <= u.ctx_->order(); ++k) {
            d[k] = p;
            p = -p / u0;
        }
        return compose(u, std::span<const double>(d.data(), u.ctx_->order() + 1));
    }

private:
    explicit Taylor(std::shared_ptr<const TaylorContext> ctx)
        : ctx_(std::move(ctx)), c_(ctx_->size(), 0.0), valid_(ctx_->order()) {}

    // Keep coefficients beyond the valid order at exactly zero.
    void truncate() {
        if (valid_ >= ctx_->order()) return;
        for (int i = 0; i < ctx_->size(); ++i)
            if (ctx_->degree(i) > valid_) c_[i] = 0.0;
    }

    std::shared_ptr<const TaylorContext> ctx_;
    std::vector<double> c_;
    int valid_ = 0;

    friend Taylor exp(const Taylor&);
    friend Taylor log(const Taylor&);
    friend Taylor sqrt(const Taylor&);
    friend Taylor sin(const Taylor&);
    friend Taylor cos(const Taylor&);
    friend Taylor pow(const Taylor&, double);
    friend Taylor pow(const Taylor&, int);
};

inline Taylor exp(const Taylor& u) {
    const double e0 = std::exp(u.value());
    std::array<double, TaylorContext::kMaxOrder + 1> d{};
    double fact = 1.0;
    for (int k = 0; k <= u.ctx_->order(); ++k) {
        if (k > 1) fact *= k;
        d[k] = e0 / fact;
    }
    return compose(u, std::span<const double>(d.data(), u.ctx_->order() + 1));
}

inline Taylor log(const Taylor& u) {
    const double u0 = u.value();
    if (!(u0 > 0.0)) throw DomainError("log of a nonpositive value");
    std::array<double, TaylorContext::kMaxOrder + 1> d{};
    d[0] = std::log(u0);
    double p = 1.0 / u0; // f^(k)(u0)/k! = (-1)^(k-1) / (k u0^k)
    for (int k = 1; k <= u.ctx_->order(); ++k) {
        d[k] = ((k % 2) ? p : -p) / k;
        p /= u0;
    }
    return compose(u, std::span<const double>(d.data(), u.ctx_->order() + 1));
}

inline Taylor sin(const Taylor& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    const double cyc[4] = {s, c, -s, -c};
    std::array<double, TaylorContext::kMaxOrder + 1> d{};
    double fact = 1.0;
    for (int k = 0; k <= u.ctx_->order(); ++k) {
        if (k > 1) fact *= k;
        d[k] = cyc[k % 4] / fact;
    }
    return compose(u, std::span<const double>(d.data(), u.ctx_->order() + 1));
}

inline Taylor cos(const Taylor& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    const double cyc[4] = {c, -s, -c, s};
    std::array<double, TaylorContext::kMaxOrder + 1> d{};
    double fact = 1.0;
    for (int k = 0; k <= u.ctx_->order(); ++k) {
        if (k > 1) fact *= k;
        d[k] = cyc[k % 4] / fact;
    }
    return compose(u, std::span<const double>(d.data(), u.ctx_->order() + 1));
}

inline Taylor pow(const Taylor& u, int e) {
    if (e == 0) return Taylor::constant(u.context(), 1.0);
    if (e < 0) return reciprocal(pow(u, -e));
    Taylor acc = u;
    int k = e - 1;
    Taylor base = u;
    while (k > 0) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

inline Taylor pow(const Taylor& u, double p) {
    const double r = std::round(p);
    if (std::abs(p - r) < 1e-12 && std::abs(r) < 64.0) return pow(u, static_cast<int>(r));
    const double u0 = u.value();
    if (!(u0 > 0.0)) throw DomainError("fractional power of a nonpositive base");
    std::array<double, TaylorContext::kMaxOrder + 1> d{};
    d[0] = std::pow(u0, p);
    for (int k = 1; k <= u.context()->order(); ++k) d[k] = d[k - 1] * (p - k + 1) / (k * u0);
    return compose(u, std::span<const double>(d.data(), u.context()->order() + 1));
}

inline Taylor sqrt(const Taylor& u) {
    if (!(u.value() > 0.0)) throw DomainError("sqrt of a nonpositive value");
    return pow(u, 0.5);
}

} // namespace t2geo
