#pragma once

#include "fedq/jet.hpp"
#include "fedq/tensor_jet.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace fedq {

// Term key of a W-valued form: hbar power p, dx-wedge bitmask, y-monomial index.
struct TermKey {
    int p;
    unsigned mask;
    int alpha;
};

inline std::uint32_t pack_key(int p, unsigned mask, int alpha)
{
    return std::uint32_t(p) << 24 | std::uint32_t(mask) << 16 | std::uint32_t(alpha);
}
inline TermKey unpack_key(std::uint32_t k)
{
    return {int(k >> 24), (k >> 16) & 0xffu, int(k & 0xffffu)};
}
inline int form_degree(unsigned mask) { return std::popcount(mask); }

// Sign of dx^{S1} ^ dx^{S2} relative to the sorted wedge of S1 | S2.
inline int wedge_sign(unsigned s1, unsigned s2)
{
    int inv = 0;
    for (unsigned b = s2; b; b &= b - 1) {
        int bit = std::countr_zero(b);
        inv += std::popcount(s1 >> (bit + 1));
    }
    return (inv & 1) ? -1 : 1;
}

// Finite sum  sum_{p,S,alpha} hbar^p f(x) dx^S y^alpha  with total degree
// Deg = 2p + |alpha| bounded by cap.
template <class S>
class GradedElement {
public:
    using Ops = ScalarOps<S>;
    using Map = std::map<std::uint32_t, Jet<S>>;

    GradedElement() = default;
    GradedElement(int dim, int cap) : dim_(dim), cap_(cap), table_(&MonomialTable::get(dim))
    {
        if (cap < 0 || cap > kMaxOrder) throw ConfigError("degree cap out of range");
    }

    int dim() const { return dim_; }
    int cap() const { return cap_; }
    const MonomialTable& ytable() const { return *table_; }
    const Map& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    int sym_degree(std::uint32_t key) const { return table_->degree(int(key & 0xffffu)); }
    int total_degree(std::uint32_t key) const { return 2 * int(key >> 24) + sym_degree(key); }

    // Adds f * hbar^p dx^mask y^alpha; silently drops terms above the cap.
    void add(int p, unsigned mask, int alpha, const Jet<S>& f)
    {
        if (2 * p + table_->degree(alpha) > cap_) return;
        auto k = pack_key(p, mask, alpha);
        auto it = terms_.find(k);
        if (it == terms_.end())
            terms_.emplace(k, f);
        else
            it->second += f;
    }
    void add(int p, unsigned mask, const Exps& e, const Jet<S>& f)
    {
        int a = table_->index(e);
        if (a < 0) throw ConfigError("y-monomial out of range");
        add(p, mask, a, f);
    }
    void add_key(std::uint32_t k, const Jet<S>& f)
    {
        auto t = unpack_key(k);
        add(t.p, t.mask, t.alpha, f);
    }

    // Removes identically vanishing terms.
    void prune()
    {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->second.is_zero())
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    GradedElement with_cap(int cap) const
    {
        GradedElement r(dim_, cap);
        for (const auto& [k, f] : terms_)
            if (total_degree(k) <= cap) r.terms_.emplace(k, f);
        return r;
    }

    GradedElement filter(const std::function<bool(int p, int k, int n)>& keep) const
    {
        GradedElement r(dim_, cap_);
        for (const auto& [k, f] : terms_) {
            auto t = unpack_key(k);
            if (keep(t.p, form_degree(t.mask), table_->degree(t.alpha))) r.terms_.emplace(k, f);
        }
        return r;
    }
    GradedElement deg_part(int deg) const
    {
        return filter([deg](int p, int, int n) { return 2 * p + n == deg; });
    }
    GradedElement deg_range(int lo, int hi) const
    {
        return filter([lo, hi](int p, int, int n) { return 2 * p + n >= lo && 2 * p + n <= hi; });
    }
    GradedElement form_part(int k) const
    {
        return filter([k](int, int kk, int) { return kk == k; });
    }

    // Minimum valid jet order over the stored terms (kMaxOrder when empty).
    int valid_order() const
    {
        int v = kMaxOrder;
        for (const auto& [k, f] : terms_) v = std::min(v, f.valid_order());
        return v;
    }

    bool is_zero() const
    {
        for (const auto& [k, f] : terms_)
            if (!f.is_zero()) return false;
        return true;
    }
    double max_abs() const
    {
        double m = 0;
        for (const auto& [k, f] : terms_) m = std::max(m, f.max_abs());
        return m;
    }

    GradedElement& operator+=(const GradedElement& o)
    {
        check(o);
        for (const auto& [k, f] : o.terms_) add_key(k, f);
        return *this;
    }
    GradedElement& operator-=(const GradedElement& o)
    {
        check(o);
        for (const auto& [k, f] : o.terms_) add_key(k, -f);
        return *this;
    }
    friend GradedElement operator+(GradedElement a, const GradedElement& b) { return a += b; }
    friend GradedElement operator-(GradedElement a, const GradedElement& b) { return a -= b; }
    GradedElement operator-() const
    {
        GradedElement r = *this;
        for (auto& [k, f] : r.terms_) f = -f;
        return r;
    }
    friend GradedElement operator*(const S& s, const GradedElement& a)
    {
        GradedElement r = a;
        for (auto& [k, f] : r.terms_) f = s * f;
        return r;
    }
    GradedElement scaled(const Rational& q) const
    {
        GradedElement r = *this;
        for (auto& [k, f] : r.terms_) f = f.scaled(q);
        return r;
    }
    GradedElement times_i() const { return Ops::imag_unit() * *this; }

    // Multiplies every coefficient jet by g (a function on the chart).
    GradedElement times_function(const Jet<S>& g) const
    {
        GradedElement r(dim_, cap_);
        for (const auto& [k, f] : terms_) r.terms_.emplace(k, f * g);
        return r;
    }

    GradedElement hbar_shift(int dp) const
    {
        GradedElement r(dim_, cap_);
        for (const auto& [k, f] : terms_) {
            auto t = unpack_key(k);
            if (t.p + dp < 0) throw AlgebraError("element not divisible by ℏ");
            r.add(t.p + dp, t.mask, t.alpha, f);
        }
        return r;
    }

    void check(const GradedElement& o) const
    {
        if (o.dim_ != dim_) throw ConfigError("graded element dimension mismatch");
    }

private:
    int dim_ = 0;
    int cap_ = 0;
    const MonomialTable* table_ = nullptr;
    Map terms_;
};

// Monomial sub-index enumeration: every gamma <= alpha with |gamma| = k, with
// the falling factorial alpha!/(alpha-gamma)! and the index of alpha-gamma.
struct SubMonomial {
    int gamma;
    int rest;
    long long weight;
};
std::vector<SubMonomial> sub_monomials(const MonomialTable& t, int alpha, int k);

// Fiber bilinear form omega^{ij} with its Wick contraction weights
// Omega(gamma, delta) = sum over contraction matrices K with row sums gamma and
// column sums delta of prod (omega^{ij})^{K_ij} / K_ij!, memoized.
template <class S>
class FiberForm {
public:
    FiberForm() = default;
    FiberForm(int dim, JetMatrix<S> omega) : dim_(dim), omega_(std::move(omega)), cache_(std::make_shared<Cache>()) {}

    // omega = G^{ij}/2 + (i/2) sigma^{ij}.
    static FiberForm from_metric(int dim, const JetMatrix<S>& g_inv, const JetMatrix<S>& sigma_inv)
    {
        JetMatrix<S> w(g_inv.size());
        const S half_i = ScalarOps<S>::from_parts(Rational(), Rational(1, 2));
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = g_inv[k].scaled(Rational(1, 2)) + half_i * sigma_inv[k];
        return FiberForm(dim, std::move(w));
    }
    // Weyl-Moyal fiber form (i/2) sigma^{ij}.
    static FiberForm weyl(int dim, const JetMatrix<S>& sigma_inv)
    {
        JetMatrix<S> w(sigma_inv.size());
        const S half_i = ScalarOps<S>::from_parts(Rational(), Rational(1, 2));
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = half_i * sigma_inv[k];
        return FiberForm(dim, std::move(w));
    }

    int dim() const { return dim_; }
    const JetMatrix<S>& omega() const { return omega_; }
    const Jet<S>& omega(int i, int j) const { return omega_[std::size_t(i) * dim_ + j]; }
    int valid_order() const { return jm_valid(omega_); }
    int order() const { return omega_[0].order(); }

    // sigma^{ij} = omega^{ij} - omega^{ji} divided by i.
    JetMatrix<S> sigma_inv() const
    {
        JetMatrix<S> s(omega_.size());
        const S minus_i = ScalarOps<S>::from_parts(Rational(), Rational(-1));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) s[std::size_t(i) * dim_ + j] = minus_i * (omega(i, j) - omega(j, i));
        return s;
    }

    const Jet<S>& contraction(int gamma, int delta) const;

private:
    struct Cache {
        std::mutex mu;
        std::unordered_map<std::uint64_t, std::unique_ptr<Jet<S>>> map;
    };
    Jet<S> compute_contraction(int gamma, int delta) const;

    int dim_ = 0;
    JetMatrix<S> omega_;
    std::shared_ptr<Cache> cache_;
};

// Products. `cap` is the degree cap of the result.
template <class S>
GradedElement<S> wick_mul(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap);
template <class S>
GradedElement<S> wick_mul(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w)
{
    return wick_mul(a, b, w, a.cap());
}
// Graded commutator a*b - (-1)^{k_a k_b} b*a.
template <class S>
GradedElement<S> graded_commutator(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap);
// (1/hbar) [a, b] computed without forming the hbar^0 part (which cancels).
template <class S>
GradedElement<S> commutator_over_hbar(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap);
// (i/hbar) ad(a)(b).
template <class S>
GradedElement<S> i_ad(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap)
{
    return commutator_over_hbar(a, b, w, cap).times_i();
}

template <class S>
GradedElement<S> hbar_divide(const GradedElement<S>& a);
template <class S>
GradedElement<S> dagger(const GradedElement<S>& a);
template <class S>
GradedElement<S> delta_op(const GradedElement<S>& a);
template <class S>
GradedElement<S> delta_inv_op(const GradedElement<S>& a);
template <class S>
GradedElement<S> tau_project(const GradedElement<S>& a);

// Constructors for common elements.
template <class S>
GradedElement<S> unit_element(int dim, int cap, int jet_order);
template <class S>
GradedElement<S> y_monomial(int dim, int cap, int jet_order, const Exps& e, const S& c = ScalarOps<S>::from_int(1));
// Function f placed in the (p=0, k=0, n=0) slot.
template <class S>
GradedElement<S> function_element(const Jet<S>& f, int cap);

} // namespace fedq
