#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace fedq {

// Exact rational number. Values whose reduced numerator and denominator fit
// in int64 are stored inline; anything larger spills to a heap mpq.
class Rational {
public:
    Rational() noexcept = default;
    Rational(long long v) noexcept; // NOLINT(google-explicit-constructor)
    Rational(long long num, long long den);
    explicit Rational(const mpq_class& q);

    Rational(const Rational& o);
    Rational(Rational&& o) noexcept;
    Rational& operator=(const Rational& o);
    Rational& operator=(Rational&& o) noexcept;
    ~Rational();

    bool is_zero() const noexcept { return big_ == nullptr && n_ == 0; }
    bool is_one() const noexcept { return big_ == nullptr && n_ == 1 && d_ == 1; }
    bool is_small() const noexcept { return big_ == nullptr; }
    int sign() const noexcept;

    mpq_class to_mpq() const;
    double to_double() const;
    std::string str() const;
    static Rational parse(std::string_view s);

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) noexcept;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    Rational inverse() const;
    Rational abs() const { return sign() < 0 ? -*this : *this; }

private:
    struct Raw {};
    Rational(Raw, long long n, long long d) noexcept : n_(n), d_(d) {}
    static Rational from_i128(__int128 num, __int128 den);
    static Rational slow_add(const Rational& a, const Rational& b);
    static Rational slow_mul(const Rational& a, const Rational& b);

    long long n_ = 0;
    long long d_ = 1;
    mpq_class* big_ = nullptr;
};

std::ostream& operator<<(std::ostream& os, const Rational& q);

} // namespace fedq
