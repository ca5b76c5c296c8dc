#pragma once

#include "fedq/jet.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace fedq {

enum class Variance { Up, Down };

struct SymGroup {
    std::vector<int> positions;
    bool antisymmetric = false;
};

// Dense array of jets indexed by `rank` indices each ranging over 0..range-1.
template <class S>
class TensorJet {
public:
    TensorJet() = default;
    TensorJet(int range, std::vector<Variance> variance, int jet_dim, int order)
        : range_(range), variance_(std::move(variance))
    {
        std::size_t n = 1;
        for (std::size_t i = 0; i < variance_.size(); ++i) n *= static_cast<std::size_t>(range_);
        entries_.assign(n, Jet<S>(jet_dim, order));
    }

    int rank() const { return static_cast<int>(variance_.size()); }
    int range() const { return range_; }
    const std::vector<Variance>& variance() const { return variance_; }
    std::vector<SymGroup>& symmetries() { return sym_; }
    const std::vector<SymGroup>& symmetries() const { return sym_; }
    std::size_t size() const { return entries_.size(); }

    std::size_t flat(const std::vector<int>& idx) const
    {
        std::size_t f = 0;
        for (int v : idx) f = f * range_ + static_cast<std::size_t>(v);
        return f;
    }
    std::vector<int> unflat(std::size_t f) const
    {
        std::vector<int> idx(variance_.size());
        for (int p = rank() - 1; p >= 0; --p) {
            idx[p] = static_cast<int>(f % range_);
            f /= range_;
        }
        return idx;
    }
    Jet<S>& at(const std::vector<int>& idx) { return entries_[flat(idx)]; }
    const Jet<S>& at(const std::vector<int>& idx) const { return entries_[flat(idx)]; }
    Jet<S>& operator()(int i, int j) { return entries_[std::size_t(i) * range_ + j]; }
    const Jet<S>& operator()(int i, int j) const { return entries_[std::size_t(i) * range_ + j]; }
    Jet<S>& entry(std::size_t f) { return entries_[f]; }
    const Jet<S>& entry(std::size_t f) const { return entries_[f]; }

    int valid_order() const
    {
        int v = kMaxOrder;
        for (const auto& e : entries_) v = std::min(v, e.valid_order());
        return v;
    }

    // Checks every declared (anti)symmetry under adjacent transpositions.
    bool symmetries_hold(double tol = 0.0) const
    {
        for (std::size_t f = 0; f < entries_.size(); ++f) {
            auto idx = unflat(f);
            for (const auto& g : sym_) {
                for (std::size_t a = 0; a + 1 < g.positions.size(); ++a) {
                    auto sw = idx;
                    std::swap(sw[g.positions[a]], sw[g.positions[a + 1]]);
                    const Jet<S>& x = entries_[f];
                    const Jet<S>& y = at(sw);
                    Jet<S> d = g.antisymmetric ? x + y : x - y;
                    if (ScalarOps<S>::exact ? !d.is_zero() : d.max_abs() > tol * std::max(1.0, x.max_abs())) return false;
                }
            }
        }
        return true;
    }

private:
    int range_ = 0;
    std::vector<Variance> variance_;
    std::vector<SymGroup> sym_;
    std::vector<Jet<S>> entries_;
};

// Outer product followed by contraction of each (index of a, index of b) pair.
// Free indices of a precede free indices of b in the result.
template <class S>
TensorJet<S> tensor_contract(const TensorJet<S>& a, const TensorJet<S>& b, const std::vector<std::pair<int, int>>& pairs)
{
    if (a.range() != b.range()) throw ConfigError("tensor_contract: index ranges differ");
    std::vector<bool> ca(a.rank(), false), cb(b.rank(), false);
    for (auto [p, q] : pairs) {
        if (p < 0 || p >= a.rank() || q < 0 || q >= b.rank()) throw ConfigError("tensor_contract: index out of range");
        if (ca[p] || cb[q]) throw ConfigError("tensor_contract: index contracted twice");
        if (a.variance()[p] == b.variance()[q]) throw ConfigError("tensor_contract: variance mismatch");
        ca[p] = cb[q] = true;
    }
    std::vector<Variance> var;
    std::vector<int> amap(a.rank(), -1), bmap(b.rank(), -1);
    for (int p = 0; p < a.rank(); ++p)
        if (!ca[p]) {
            amap[p] = static_cast<int>(var.size());
            var.push_back(a.variance()[p]);
        }
    for (int q = 0; q < b.rank(); ++q)
        if (!cb[q]) {
            bmap[q] = static_cast<int>(var.size());
            var.push_back(b.variance()[q]);
        }
    const Jet<S>& ja = a.entry(0);
    const Jet<S>& jb = b.entry(0);
    TensorJet<S> r(a.range(), var, ja.dim(), std::min(ja.order(), jb.order()));
    for (const auto& g : a.symmetries()) {
        SymGroup h{{}, g.antisymmetric};
        bool keep = true;
        for (int p : g.positions) {
            if (amap[p] < 0) keep = false;
            h.positions.push_back(amap[p]);
        }
        if (keep) r.symmetries().push_back(h);
    }
    for (const auto& g : b.symmetries()) {
        SymGroup h{{}, g.antisymmetric};
        bool keep = true;
        for (int q : g.positions) {
            if (bmap[q] < 0) keep = false;
            h.positions.push_back(bmap[q]);
        }
        if (keep) r.symmetries().push_back(h);
    }
    const int k = static_cast<int>(pairs.size());
    std::size_t nsum = 1;
    for (int i = 0; i < k; ++i) nsum *= a.range();
    std::vector<bool> init(r.size(), false);
    for (std::size_t f = 0; f < r.size(); ++f) {
        auto ridx = r.unflat(f);
        std::vector<int> ia(a.rank()), ib(b.rank());
        for (int p = 0; p < a.rank(); ++p)
            if (amap[p] >= 0) ia[p] = ridx[amap[p]];
        for (int q = 0; q < b.rank(); ++q)
            if (bmap[q] >= 0) ib[q] = ridx[bmap[q]];
        Jet<S> acc;
        bool have = false;
        for (std::size_t s = 0; s < nsum; ++s) {
            std::size_t t = s;
            for (int c = 0; c < k; ++c) {
                int v = static_cast<int>(t % a.range());
                t /= a.range();
                ia[pairs[c].first] = v;
                ib[pairs[c].second] = v;
            }
            Jet<S> term = a.at(ia) * b.at(ib);
            acc = have ? acc + term : term;
            have = true;
        }
        r.entry(f) = acc;
    }
    return r;
}

// Square jet matrices stored row-major; the workhorse behind tensor_invert
// and the polar decomposition in compatible_triple.
template <class S>
using JetMatrix = std::vector<Jet<S>>;

template <class S>
JetMatrix<S> jm_identity(int n, int jdim, int order)
{
    JetMatrix<S> m(std::size_t(n) * n, Jet<S>(jdim, order));
    for (int i = 0; i < n; ++i) m[std::size_t(i) * n + i] = Jet<S>::constant(jdim, order, ScalarOps<S>::from_int(1));
    return m;
}

template <class S>
JetMatrix<S> jm_mul(const JetMatrix<S>& a, const JetMatrix<S>& b, int n)
{
    JetMatrix<S> r(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet<S> acc = a[std::size_t(i) * n] * b[j];
            for (int k = 1; k < n; ++k) acc += a[std::size_t(i) * n + k] * b[std::size_t(k) * n + j];
            r[std::size_t(i) * n + j] = acc;
        }
    return r;
}

template <class S>
JetMatrix<S> jm_add(const JetMatrix<S>& a, const JetMatrix<S>& b, const S& sb = ScalarOps<S>::from_int(1))
{
    JetMatrix<S> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + sb * b[i];
    return r;
}

template <class S>
JetMatrix<S> jm_scale(const JetMatrix<S>& a, const Rational& q)
{
    JetMatrix<S> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i].scaled(q);
    return r;
}

template <class S>
JetMatrix<S> jm_transpose(const JetMatrix<S>& a, int n)
{
    JetMatrix<S> r(a.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[std::size_t(j) * n + i] = a[std::size_t(i) * n + j];
    return r;
}

template <class S>
bool jm_is_zero(const JetMatrix<S>& a)
{
    for (const auto& x : a)
        if (!x.is_zero()) return false;
    return true;
}

template <class S>
double jm_max_abs(const JetMatrix<S>& a)
{
    double m = 0;
    for (const auto& x : a) m = std::max(m, x.max_abs());
    return m;
}

template <class S>
int jm_valid(const JetMatrix<S>& a)
{
    int v = kMaxOrder;
    for (const auto& x : a) v = std::min(v, x.valid_order());
    return v;
}

// Inverse of a scalar matrix by Gauss-Jordan elimination; throws on a zero pivot.
template <class S>
std::vector<S> scalar_inverse(std::vector<S> a, int n, const char* what)
{
    using Ops = ScalarOps<S>;
    std::vector<S> inv(std::size_t(n) * n, S{});
    for (int i = 0; i < n; ++i) inv[std::size_t(i) * n + i] = Ops::from_int(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = 0;
        for (int r = col; r < n; ++r) {
            double m = Ops::mag(a[std::size_t(r) * n + col]);
            if (Ops::exact ? (m > 0 && piv < 0) : m > best) {
                piv = r;
                best = m;
            }
        }
        if (piv < 0 || (!Ops::exact && best < 1e-300)) throw AlgebraError(what);
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(a[std::size_t(piv) * n + c], a[std::size_t(col) * n + c]);
                std::swap(inv[std::size_t(piv) * n + c], inv[std::size_t(col) * n + c]);
            }
        S p = Ops::from_int(1) / a[std::size_t(col) * n + col];
        for (int c = 0; c < n; ++c) {
            a[std::size_t(col) * n + c] = p * a[std::size_t(col) * n + c];
            inv[std::size_t(col) * n + c] = p * inv[std::size_t(col) * n + c];
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            S f = a[std::size_t(r) * n + col];
            if (Ops::is_zero(f)) continue;
            for (int c = 0; c < n; ++c) {
                a[std::size_t(r) * n + c] -= f * a[std::size_t(col) * n + c];
                inv[std::size_t(r) * n + c] -= f * inv[std::size_t(col) * n + c];
            }
        }
    }
    return inv;
}

// Jet-matrix inverse: exact inverse of the constant part refined by Newton
// steps X <- X(2 - gX), each of which doubles the number of correct orders.
template <class S>
JetMatrix<S> jm_inverse(const JetMatrix<S>& g, int n, const char* what = "degenerate metric at base point")
{
    const int jdim = g[0].dim();
    const int order = g[0].order();
    std::vector<S> c0(std::size_t(n) * n);
    for (std::size_t i = 0; i < c0.size(); ++i) c0[i] = g[i].value();
    std::vector<S> c0i = scalar_inverse(c0, n, what);
    JetMatrix<S> x(std::size_t(n) * n);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = Jet<S>::constant(jdim, order, c0i[i]);
    int valid = jm_valid(g);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i].truncated(valid);
    JetMatrix<S> two = jm_scale(jm_identity<S>(n, jdim, order), Rational(2));
    for (int correct = 0; correct < valid; correct = 2 * correct + 1) {
        JetMatrix<S> gx = jm_mul(g, x, n);
        x = jm_mul(x, jm_add(two, gx, ScalarOps<S>::from_int(-1)), n);
    }
    return x;
}

// Inverse of a rank-2 tensor, variances flipped, symmetry tags carried over.
template <class S>
TensorJet<S> tensor_invert(const TensorJet<S>& g)
{
    if (g.rank() != 2) throw ConfigError("tensor_invert: rank-2 tensor required");
    const int n = g.range();
    JetMatrix<S> m(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[std::size_t(i) * n + j] = g(i, j);
    JetMatrix<S> mi = jm_inverse(m, n);
    auto flip = [](Variance v) { return v == Variance::Up ? Variance::Down : Variance::Up; };
    TensorJet<S> r(n, {flip(g.variance()[1]), flip(g.variance()[0])}, g(0, 0).dim(), mi[0].order());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = mi[std::size_t(i) * n + j];
    r.symmetries() = g.symmetries();
    return r;
}

} // namespace fedq
