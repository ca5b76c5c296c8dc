#pragma once

#include "fedq/rational.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace fedq {

// Gaussian rational re + i*im, the exact scalar mode.
struct QQi {
    Rational re;
    Rational im;

    QQi() = default;
    QQi(long long v) : re(v) {} // NOLINT(google-explicit-constructor)
    QQi(Rational r) : re(std::move(r)) {} // NOLINT(google-explicit-constructor)
    QQi(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const noexcept { return re.is_zero() && im.is_zero(); }

    QQi operator-() const { return {-re, -im}; }
    QQi& operator+=(const QQi& o)
    {
        if (!o.re.is_zero()) re += o.re;
        if (!o.im.is_zero()) im += o.im;
        return *this;
    }
    QQi& operator-=(const QQi& o)
    {
        if (!o.re.is_zero()) re -= o.re;
        if (!o.im.is_zero()) im -= o.im;
        return *this;
    }
    QQi& operator*=(const QQi& o) { return *this = *this * o; }

    friend QQi operator+(QQi a, const QQi& b) { return a += b; }
    friend QQi operator-(QQi a, const QQi& b) { return a -= b; }
    friend QQi operator*(const QQi& a, const QQi& b)
    {
        if (a.im.is_zero()) {
            if (b.im.is_zero()) return {a.re * b.re, Rational()};
            return {a.re * b.re, a.re * b.im};
        }
        if (a.re.is_zero()) {
            if (b.im.is_zero()) return {Rational(), a.im * b.re};
            return {-(a.im * b.im), a.im * b.re};
        }
        if (b.im.is_zero()) return {a.re * b.re, a.im * b.re};
        if (b.re.is_zero()) return {-(a.im * b.im), a.re * b.im};
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend QQi operator/(const QQi& a, const QQi& b)
    {
        Rational n2 = b.re * b.re + b.im * b.im;
        QQi num = a * QQi(b.re, -b.im);
        Rational inv = n2.inverse();
        return {num.re * inv, num.im * inv};
    }
    friend bool operator==(const QQi& a, const QQi& b) { return a.re == b.re && a.im == b.im; }
};

using cplx = std::complex<double>;

// Uniform access to the two scalar modes.
template <class S>
struct ScalarOps;

template <>
struct ScalarOps<QQi> {
    static constexpr bool exact = true;
    static constexpr const char* name = "exact";
    static QQi from_int(long long v) { return QQi(v); }
    static QQi from_frac(long long p, long long q) { return QQi(Rational(p, q)); }
    static QQi from_rational(const Rational& r) { return QQi(r); }
    static QQi from_parts(const Rational& re, const Rational& im) { return QQi(re, im); }
    static QQi imag_unit() { return QQi(Rational(), Rational(1)); }
    static QQi conj(const QQi& a) { return QQi(a.re, -a.im); }
    static bool is_zero(const QQi& a) { return a.is_zero(); }
    static double mag(const QQi& a) { return std::hypot(a.re.to_double(), a.im.to_double()); }
    static cplx to_cplx(const QQi& a) { return {a.re.to_double(), a.im.to_double()}; }
    static QQi scale(const QQi& a, const Rational& r) { return QQi(a.re * r, a.im * r); }
    static QQi times_i(const QQi& a) { return QQi(-a.im, a.re); }
    static QQi real_part(const QQi& a) { return QQi(a.re); }
    static QQi imag_part(const QQi& a) { return QQi(a.im); }
};

template <>
struct ScalarOps<cplx> {
    static constexpr bool exact = false;
    static constexpr const char* name = "float";
    static cplx from_int(long long v) { return {double(v), 0.0}; }
    static cplx from_frac(long long p, long long q) { return {double(p) / double(q), 0.0}; }
    static cplx from_rational(const Rational& r) { return {r.to_double(), 0.0}; }
    static cplx from_parts(const Rational& re, const Rational& im) { return {re.to_double(), im.to_double()}; }
    static cplx imag_unit() { return {0.0, 1.0}; }
    static cplx conj(const cplx& a) { return std::conj(a); }
    static bool is_zero(const cplx& a) { return a.real() == 0.0 && a.imag() == 0.0; }
    static double mag(const cplx& a) { return std::abs(a); }
    static cplx to_cplx(const cplx& a) { return a; }
    static cplx scale(const cplx& a, const Rational& r) { return a * r.to_double(); }
    static cplx times_i(const cplx& a) { return {-a.imag(), a.real()}; }
    static cplx real_part(const cplx& a) { return {a.real(), 0.0}; }
    static cplx imag_part(const cplx& a) { return {a.imag(), 0.0}; }
};

template <class S>
inline bool is_zero(const S& s)
{
    return ScalarOps<S>::is_zero(s);
}

} // namespace fedq
