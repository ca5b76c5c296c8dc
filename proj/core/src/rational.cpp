#include "fedq/rational.hpp"

#include <climits>
#include <ostream>
#include <stdexcept>

namespace fedq {

namespace {

using u64 = unsigned long long;
using i128 = __int128;
using u128 = unsigned __int128;

u64 gcd64(u64 a, u64 b) noexcept
{
    if (a == 0) return b;
    if (b == 0) return a;
    int shift = __builtin_ctzll(a | b);
    a >>= __builtin_ctzll(a);
    do {
        b >>= __builtin_ctzll(b);
        if (a > b) std::swap(a, b);
        b -= a;
    } while (b != 0);
    return a << shift;
}

u64 uabs(long long v) noexcept { return v < 0 ? u64(0) - u64(v) : u64(v); }

bool fits(i128 v) noexcept { return v > i128(LLONG_MIN) && v <= i128(LLONG_MAX); }

mpz_class to_mpz(i128 v)
{
    bool neg = v < 0;
    u128 u = neg ? u128(0) - u128(v) : u128(v);
    mpz_class hi(static_cast<unsigned long>(u >> 64));
    mpz_class lo(static_cast<unsigned long>(u & ~u64(0)));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
}

mpz_class to_mpz(long long v)
{
    mpz_class r;
    mpz_set_si(r.get_mpz_t(), v);
    return r;
}

} // namespace

Rational::Rational(long long v) noexcept
{
    if (v == LLONG_MIN) {
        big_ = new mpq_class(to_mpz(v));
    } else {
        n_ = v;
    }
}

Rational::Rational(long long num, long long den)
{
    if (den == 0) throw std::domain_error("rational with zero denominator");
    *this = from_i128(num, den);
}

Rational::Rational(const mpq_class& q)
{
    const mpz_class& num = q.get_num();
    const mpz_class& den = q.get_den();
    if (mpz_fits_slong_p(num.get_mpz_t()) && mpz_fits_slong_p(den.get_mpz_t())) {
        long n = num.get_si();
        if (n != LONG_MIN) {
            n_ = n;
            d_ = den.get_si();
            return;
        }
    }
    big_ = new mpq_class(q);
}

Rational::Rational(const Rational& o) : n_(o.n_), d_(o.d_), big_(o.big_ ? new mpq_class(*o.big_) : nullptr) {}

Rational::Rational(Rational&& o) noexcept : n_(o.n_), d_(o.d_), big_(o.big_) { o.big_ = nullptr; }

Rational& Rational::operator=(const Rational& o)
{
    if (this == &o) return *this;
    if (o.big_) {
        if (big_) {
            *big_ = *o.big_;
        } else {
            big_ = new mpq_class(*o.big_);
        }
    } else {
        delete big_;
        big_ = nullptr;
        n_ = o.n_;
        d_ = o.d_;
    }
    return *this;
}

Rational& Rational::operator=(Rational&& o) noexcept
{
    if (this == &o) return *this;
    delete big_;
    n_ = o.n_;
    d_ = o.d_;
    big_ = o.big_;
    o.big_ = nullptr;
    return *this;
}

Rational::~Rational() { delete big_; }

int Rational::sign() const noexcept
{
    if (big_) return sgn(*big_);
    return (n_ > 0) - (n_ < 0);
}

mpq_class Rational::to_mpq() const
{
    if (big_) return *big_;
    mpq_class q(to_mpz(n_), to_mpz(d_));
    return q;
}

double Rational::to_double() const
{
    if (big_) return big_->get_d();
    return double(n_) / double(d_);
}

std::string Rational::str() const
{
    if (big_) return big_->get_str();
    if (d_ == 1) return std::to_string(n_);
    return std::to_string(n_) + "/" + std::to_string(d_);
}

Rational Rational::parse(std::string_view s)
{
    mpq_class q;
    if (q.set_str(std::string(s), 10) != 0) throw std::invalid_argument("bad rational literal: " + std::string(s));
    if (q.get_den() == 0) throw std::invalid_argument("bad rational literal: " + std::string(s));
    q.canonicalize();
    return Rational(q);
}

Rational Rational::from_i128(i128 num, i128 den)
{
    if (num == 0) return Rational();
    if (den < 0) {
        num = -num;
        den = -den;
    }
    u128 a = num < 0 ? u128(0) - u128(num) : u128(num);
    u128 b = u128(den);
    // 128-bit Euclid; only reached on the spill path and in constructors.
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    num /= i128(a);
    den /= i128(a);
    if (fits(num) && fits(den)) return Rational(Raw{}, static_cast<long long>(num), static_cast<long long>(den));
    mpq_class q(to_mpz(num), to_mpz(den));
    Rational r;
    r.big_ = new mpq_class(q);
    return r;
}

Rational Rational::slow_add(const Rational& a, const Rational& b) { return Rational(mpq_class(a.to_mpq() + b.to_mpq())); }

Rational Rational::slow_mul(const Rational& a, const Rational& b) { return Rational(mpq_class(a.to_mpq() * b.to_mpq())); }

Rational operator+(const Rational& a, const Rational& b)
{
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.big_ || b.big_) return Rational::slow_add(a, b);
    if (a.d_ == b.d_) {
        long long s;
        if (!__builtin_add_overflow(a.n_, b.n_, &s) && s != LLONG_MIN) {
            if (s == 0) return Rational();
            if (a.d_ == 1) return Rational(Rational::Raw{}, s, 1);
            long long g = static_cast<long long>(gcd64(uabs(s), u64(a.d_)));
            return Rational(Rational::Raw{}, s / g, a.d_ / g);
        }
    }
    long long g = static_cast<long long>(gcd64(u64(a.d_), u64(b.d_)));
    i128 t = i128(a.n_) * (b.d_ / g) + i128(b.n_) * (a.d_ / g);
    if (t == 0) return Rational();
    long long g2 = g;
    if (g != 1) {
        i128 tm = t % g;
        if (tm < 0) tm = -tm;
        g2 = static_cast<long long>(gcd64(u64(tm), u64(g)));
    }
    i128 num = t / g2;
    i128 den = i128(a.d_ / g) * (b.d_ / g2);
    if (fits(num) && fits(den)) return Rational(Rational::Raw{}, static_cast<long long>(num), static_cast<long long>(den));
    return Rational::slow_add(a, b);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b)
{
    if (a.is_zero() || b.is_zero()) return Rational();
    if (a.big_ || b.big_) return Rational::slow_mul(a, b);
    if (a.d_ == 1 && b.d_ == 1) {
        long long p;
        if (!__builtin_mul_overflow(a.n_, b.n_, &p) && p != LLONG_MIN) return Rational(Rational::Raw{}, p, 1);
    }
    long long g1 = static_cast<long long>(gcd64(uabs(a.n_), u64(b.d_)));
    long long g2 = static_cast<long long>(gcd64(uabs(b.n_), u64(a.d_)));
    i128 num = i128(a.n_ / g1) * (b.n_ / g2);
    i128 den = i128(a.d_ / g2) * (b.d_ / g1);
    if (fits(num) && fits(den)) return Rational(Rational::Raw{}, static_cast<long long>(num), static_cast<long long>(den));
    return Rational::slow_mul(a, b);
}

Rational Rational::inverse() const
{
    if (is_zero()) throw std::domain_error("division by zero rational");
    if (big_) return Rational(mpq_class(1 / *big_));
    if (n_ < 0) return Rational(Raw{}, -d_, -n_);
    return Rational(Raw{}, d_, n_);
}

Rational operator/(const Rational& a, const Rational& b) { return a * b.inverse(); }

Rational Rational::operator-() const
{
    if (big_) return Rational(mpq_class(-*big_));
    return Rational(Raw{}, -n_, d_);
}

Rational& Rational::operator+=(const Rational& o) { return *this = *this + o; }
Rational& Rational::operator-=(const Rational& o) { return *this = *this - o; }
Rational& Rational::operator*=(const Rational& o) { return *this = *this * o; }
Rational& Rational::operator/=(const Rational& o) { return *this = *this / o; }

bool operator==(const Rational& a, const Rational& b) noexcept
{
    if (!a.big_ && !b.big_) return a.n_ == b.n_ && a.d_ == b.d_;
    if (a.big_ && b.big_) return *a.big_ == *b.big_;
    return false;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
    if (!a.big_ && !b.big_) {
        i128 l = i128(a.n_) * b.d_;
        i128 r = i128(b.n_) * a.d_;
        return l <=> r;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c <=> 0;
}

std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

} // namespace fedq
