#pragma once
// Exact rational arithmetic on 64-bit numerator / denominator.
//
// Values are always canonical: reduced to lowest terms, denominator > 0.
// Arithmetic runs through 128-bit intermediates, so a single operation never
// wraps; if the reduced result does not fit back into 64 bits the operation
// throws std::overflow_error instead of returning a wrong value.

#include <compare>
#include <cstdint>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace budget_match {

using i128 = __int128;

class Rat {
public:
    constexpr Rat() : num_(0), den_(1) {}
    constexpr Rat(long long n) : num_(n), den_(1) {}
    Rat(long long n, long long d) { *this = make(n, d); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ < 0 ? -1 : num_ > 0 ? 1 : 0; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rat operator-() const {
        Rat r;
        r.num_ = -num_;  // -INT64_MIN cannot occur: canonical values come out of make()
        r.den_ = den_;
        return r;
    }
    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        i128 lhs = i128(a.num_) * b.den_;
        i128 rhs = i128(b.num_) * a.den_;
        return lhs < rhs   ? std::strong_ordering::less
               : lhs > rhs ? std::strong_ordering::greater
                           : std::strong_ordering::equal;
    }

    double to_double() const { return double(num_) / double(den_); }

    // Canonical text form: "p" when the denominator is 1, otherwise "p/q".
    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

    // Accepts the canonical forms produced by str(): "p" or "p/q".
    static Rat parse(std::string_view text) {
        auto bad = [&] {
            return std::invalid_argument("bad rational literal: '" + std::string(text) + "'");
        };
        size_t b = text.find_first_not_of(" \t");
        size_t e = text.find_last_not_of(" \t");
        if (b == std::string_view::npos) throw bad();
        std::string_view body = text.substr(b, e - b + 1);
        size_t slash = body.find('/');
        long long n = 0, d = 1;
        auto parse_ll = [&](std::string_view part, long long& out) {
            auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
            if (ec != std::errc() || ptr != part.data() + part.size()) throw bad();
        };
        parse_ll(body.substr(0, slash), n);
        if (slash != std::string_view::npos) parse_ll(body.substr(slash + 1), d);
        if (d == 0) throw bad();
        return Rat(n, d);
    }

private:
    static i128 gcd128(i128 a, i128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rat make(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        i128 g = gcd128(n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr i128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi) throw std::overflow_error("rational overflow");
        Rat r;
        r.num_ = (long long)n;
        r.den_ = (long long)d;
        return r;
    }

    long long num_;
    long long den_;
};

// Largest integer <= a/b. Requires b > 0.
inline long long floor_div(const Rat& a, const Rat& b) {
    if (b.sign() <= 0) throw std::domain_error("floor_div needs a positive divisor");
    i128 p = i128(a.num()) * b.den();
    i128 q = i128(a.den()) * b.num();
    i128 r = p / q;
    if (p % q != 0 && (p < 0)) --r;
    if (r < INT64_MIN || r > INT64_MAX) throw std::overflow_error("floor_div overflow");
    return (long long)r;
}

// Smallest integer >= a/b. Requires b > 0.
inline long long ceil_div(const Rat& a, const Rat& b) {
    if (b.sign() <= 0) throw std::domain_error("ceil_div needs a positive divisor");
    i128 p = i128(a.num()) * b.den();
    i128 q = i128(a.den()) * b.num();
    i128 r = p / q;
    if (p % q != 0 && (p > 0)) ++r;
    if (r < INT64_MIN || r > INT64_MAX) throw std::overflow_error("ceil_div overflow");
    return (long long)r;
}

}  // namespace budget_match
