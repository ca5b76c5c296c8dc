#pragma once

#include "fedq/random.hpp"

#include <array>
#include <map>
#include <random>

namespace fedq::test {

using fedq::Rng;

// Dense polynomial oracle keyed by exponent vectors.
using Poly = std::map<std::array<int, 4>, QQi>;

inline Poly to_poly(const Jet<QQi>& j)
{
    Poly p;
    const auto& t = j.table();
    for (int i = 0; i < t.count(j.valid_order()); ++i) {
        if (j.raw(i).is_zero()) continue;
        auto e = t.exps(i);
        p[{e[0], e[1], e[2], e[3]}] = j.raw(i);
    }
    return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b)
{
    Poly r;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::array<int, 4> e{};
            for (int v = 0; v < 4; ++v) e[v] = ea[v] + eb[v];
            r[e] += ca * cb;
        }
    return r;
}

inline Poly poly_truncate(const Poly& a, int order)
{
    Poly r;
    for (const auto& [e, c] : a)
        if (e[0] + e[1] + e[2] + e[3] <= order && !c.is_zero()) r[e] = c;
    return r;
}

inline Poly poly_clean(const Poly& a) { return poly_truncate(a, 1 << 20); }

} // namespace fedq::test

namespace fedq::test {

// Oracle for m o exp(hbar w^{ij} d_i (x) d_j) on polynomials with constant
// coefficients: returns a map (hbar power, exponents) -> coefficient.
using HPoly = std::map<std::pair<int, std::array<int, 4>>, QQi>;

inline HPoly wick_oracle(const Poly& f, const Poly& g, const std::vector<QQi>& w, int n, int max_kappa)
{
    using Pair = std::map<std::pair<std::array<int, 4>, std::array<int, 4>>, QQi>;
    Pair cur;
    for (const auto& [ea, ca] : f)
        for (const auto& [eb, cb] : g) cur[{ea, eb}] += ca * cb;
    HPoly out;
    Rational fact(1);
    for (int kappa = 0; kappa <= max_kappa; ++kappa) {
        if (kappa > 0) fact = fact * Rational(kappa);
        for (const auto& [ab, c] : cur) {
            std::array<int, 4> e{};
            for (int v = 0; v < 4; ++v) e[v] = ab.first[v] + ab.second[v];
            out[{kappa, e}] += QQi(c.re / fact, c.im / fact);
        }
        Pair next;
        for (const auto& [ab, c] : cur)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const QQi& wij = w[std::size_t(i) * n + j];
                    if (wij.is_zero() || ab.first[i] == 0 || ab.second[j] == 0) continue;
                    auto l = ab.first, r = ab.second;
                    QQi coef = c * wij * QQi(Rational(l[i] * r[j]));
                    --l[i];
                    --r[j];
                    next[{l, r}] += coef;
                }
        cur = std::move(next);
    }
    for (auto it = out.begin(); it != out.end();) {
        if (it->second.is_zero())
            it = out.erase(it);
        else
            ++it;
    }
    return out;
}

// Flattens the k = 0 part of an element with constant jets into an HPoly.
inline HPoly element_constants(const GradedElement<QQi>& e)
{
    HPoly out;
    for (const auto& [k, f] : e.terms()) {
        auto key = unpack_key(k);
        if (key.mask != 0 || f.value().is_zero()) continue;
        auto x = e.ytable().exps(key.alpha);
        out[{key.p, {x[0], x[1], x[2], x[3]}}] += f.value();
    }
    return out;
}

inline std::vector<QQi> standard_omega(int n)
{
    // omega = id/2 + (i/2) sigma^{ij}, sigma^{2a,2a+1} = 1
    std::vector<QQi> w(std::size_t(n) * n);
    for (int i = 0; i < n; ++i) w[std::size_t(i) * n + i] = QQi(Rational(1, 2));
    for (int a = 0; a < n / 2; ++a) {
        w[std::size_t(2 * a) * n + 2 * a + 1] = QQi(Rational(), Rational(1, 2));
        w[std::size_t(2 * a + 1) * n + 2 * a] = QQi(Rational(), Rational(-1, 2));
    }
    return w;
}

template <class S>
FiberForm<S> constant_fiber(const std::vector<QQi>& w, int n, int order)
{
    JetMatrix<S> m(std::size_t(n) * n);
    for (std::size_t k = 0; k < m.size(); ++k) {
        if constexpr (ScalarOps<S>::exact)
            m[k] = Jet<S>::constant(n, order, w[k]);
        else
            m[k] = Jet<S>::constant(n, order, ScalarOps<QQi>::to_cplx(w[k]));
    }
    return FiberForm<S>(n, m);
}

// Residual helper: exact mode is zero-or-not, float mode compares the max coefficient.
template <class S>
bool vanishes(const GradedElement<S>& e, double tol = 1e-10)
{
    if constexpr (ScalarOps<S>::exact)
        return e.is_zero();
    else
        return e.max_abs() <= tol;
}

} // namespace fedq::test

#include "fedq/geometry.hpp"

namespace fedq::test {

template <class S>
bool all_vanish(const std::vector<Jet<S>>& v, double tol = 1e-9)
{
    for (const auto& j : v) {
        if constexpr (ScalarOps<S>::exact) {
            if (!j.is_zero()) return false;
        } else if (j.max_abs() > tol) {
            return false;
        }
    }
    return true;
}

} // namespace fedq::test
