#pragma once

#include "fedq/errors.hpp"
#include "fedq/monomial.hpp"
#include "fedq/scalar.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace fedq {

// Truncated Taylor polynomial in `dim` chart variables at the base point.
// Coefficients are stored densely in graded-lex order up to `order`; only
// degrees <= valid_order are trustworthy and readable.
template <class S>
class Jet {
public:
    using Ops = ScalarOps<S>;

    Jet() = default;
    Jet(int dim, int order) : Jet(dim, order, order) {}
    Jet(int dim, int order, int valid)
        : dim_(dim), order_(order), valid_(valid), table_(&MonomialTable::get(dim))
    {
        if (order < 0 || order > kMaxOrder) throw ConfigError("jet order out of range: " + std::to_string(order));
        if (valid > order || valid < 0) throw ConfigError("valid order must lie in [0, order]");
        c_.assign(table_->count(order), S{});
    }

    static Jet constant(int dim, int order, const S& v)
    {
        Jet j(dim, order);
        j.c_[0] = v;
        return j;
    }
    static Jet variable(int dim, int order, int var)
    {
        Jet j(dim, order);
        if (var < 0 || var >= dim) throw ConfigError("variable index out of range");
        if (order >= 1) j.c_[j.table_->raise(0, var)] = Ops::from_int(1);
        return j;
    }

    int dim() const { return dim_; }
    int order() const { return order_; }
    int valid_order() const { return valid_; }
    int size() const { return static_cast<int>(c_.size()); }
    const MonomialTable& table() const { return *table_; }

    const S& coeff(int idx) const
    {
        if (idx < 0 || idx >= size() || table_->degree(idx) > valid_)
            throw ValidityError("jet coefficient requested beyond valid order " + std::to_string(valid_));
        return c_[idx];
    }
    S& coeff_mut(int idx) { return c_[idx]; }
    // Unchecked storage access for kernels that respect the size.
    const S& raw(int idx) const { return c_[idx]; }
    const std::vector<S>& raw_coeffs() const { return c_; }

    S at(const Exps& e) const
    {
        int idx = table_->index(e);
        if (idx < 0 || table_->degree(idx) > valid_) throw ValidityError("jet coefficient requested beyond valid order " + std::to_string(valid_));
        if (idx >= size()) return S{};
        return c_[idx];
    }
    void set(const Exps& e, const S& v)
    {
        int idx = table_->index(e);
        if (idx < 0 || idx >= size()) throw ConfigError("monomial exceeds jet order");
        c_[idx] = v;
    }
    const S& value() const { return c_[0]; }

    bool is_zero() const
    {
        int n = table_ ? table_->count(valid_) : 0;
        for (int i = 0; i < n; ++i)
            if (!Ops::is_zero(c_[i])) return false;
        return true;
    }
    // Largest coefficient magnitude within the valid range.
    double max_abs() const
    {
        double m = 0;
        int n = table_ ? table_->count(valid_) : 0;
        for (int i = 0; i < n; ++i) m = std::max(m, Ops::mag(c_[i]));
        return m;
    }
    bool is_constant() const
    {
        for (int i = 1; i < size(); ++i)
            if (!Ops::is_zero(c_[i])) return false;
        return true;
    }

    Jet truncated(int k) const
    {
        if (k >= order_) return *this;
        Jet r;
        r.dim_ = dim_;
        r.order_ = std::max(k, 0);
        r.valid_ = std::min(valid_, r.order_);
        r.table_ = table_;
        r.c_.assign(c_.begin(), c_.begin() + table_->count(r.order_));
        return r;
    }
    // Drops storage above the valid order.
    Jet shrunk() const { return truncated(valid_); }

    Jet& operator+=(const Jet& o) { return *this = *this + o; }
    Jet& operator-=(const Jet& o) { return *this = *this - o; }

    friend Jet operator+(const Jet& a, const Jet& b) { return combine(a, b, false); }
    friend Jet operator-(const Jet& a, const Jet& b) { return combine(a, b, true); }
    Jet operator-() const
    {
        Jet r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend Jet operator*(const S& s, const Jet& a)
    {
        Jet r = a;
        if (Ops::is_zero(s)) {
            for (auto& x : r.c_) x = S{};
            return r;
        }
        for (auto& x : r.c_)
            if (!Ops::is_zero(x)) x = s * x;
        return r;
    }
    Jet scaled(const Rational& q) const
    {
        Jet r = *this;
        for (auto& x : r.c_)
            if (!Ops::is_zero(x)) x = Ops::scale(x, q);
        return r;
    }

    friend Jet operator*(const Jet& a, const Jet& b)
    {
        check_dims(a, b);
        const int order = std::min(a.order_, b.order_);
        Jet r(a.dim_, order, std::min(a.valid_, b.valid_));
        const MonomialTable& t = *a.table_;
        thread_local std::vector<int> nzb;
        nzb.clear();
        const int nb = t.count(order);
        for (int j = 0; j < nb; ++j)
            if (!Ops::is_zero(b.c_[j])) nzb.push_back(j);
        if (nzb.empty()) return r;
        const int na = t.count(order);
        for (int i = 0; i < na; ++i) {
            const S& ai = a.c_[i];
            if (Ops::is_zero(ai)) continue;
            const int lim = t.count(order - t.degree(i));
            const int* prod = t.product_row(i);
            for (int j : nzb) {
                if (j >= lim) break;
                r.c_[prod[j]] += ai * b.c_[j];
            }
        }
        return r;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }

    // Formal partial derivative in variable `var` (0-based).
    Jet partial(int var) const
    {
        if (var < 0 || var >= dim_) throw ConfigError("partial: index out of range");
        if (valid_ == 0) throw ValidityError("derivative budget exhausted");
        Jet r(dim_, order_ - 1, valid_ - 1);
        const MonomialTable& t = *table_;
        for (int i = 0; i < r.size(); ++i) {
            int up = t.raise(i, var);
            const S& v = c_[up];
            if (Ops::is_zero(v)) continue;
            r.c_[i] = Ops::scale(v, Rational(t.exps(up)[var]));
        }
        return r;
    }

    Jet conj() const
    {
        Jet r = *this;
        for (auto& x : r.c_) x = Ops::conj(x);
        return r;
    }

    friend bool operator==(const Jet& a, const Jet& b)
    {
        return a.dim_ == b.dim_ && a.valid_ == b.valid_ && (a - b).is_zero();
    }

private:
    static void check_dims(const Jet& a, const Jet& b)
    {
        if (a.dim_ != b.dim_) throw ConfigError("jet dimension mismatch");
    }
    static Jet combine(const Jet& a, const Jet& b, bool subtract)
    {
        check_dims(a, b);
        const int order = std::max(a.order_, b.order_);
        const int valid = std::min(a.valid_, b.valid_);
        Jet r(a.dim_, order, std::min(valid, order));
        for (int i = 0; i < a.size(); ++i) r.c_[i] = a.c_[i];
        for (int i = 0; i < b.size(); ++i) {
            if (Ops::is_zero(b.c_[i])) continue;
            if (subtract)
                r.c_[i] -= b.c_[i];
            else
                r.c_[i] += b.c_[i];
        }
        return r.truncated(valid);
    }

    int dim_ = 0;
    int order_ = 0;
    int valid_ = 0;
    const MonomialTable* table_ = nullptr;
    std::vector<S> c_;
};

} // namespace fedq
