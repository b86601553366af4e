#pragma once

// Compensated double-double arithmetic: an unevaluated sum hi + lo carrying
// roughly 106 mantissa bits. Used where a quantity is needed far below the
// double rounding floor, such as certifying that a computed repelling orbit
// shadows a true one (the cycle multiplier amplifies representation error of
// the points by many orders of magnitude). Only the operations the library
// needs are provided: field arithmetic, exp, and sin/cos for moduli within
// the exactly reducible range.

#include <cmath>
#include <cstdlib>

#include "bouquet/util.hpp"

namespace bouquet::dd {

struct Real2 {
    double hi = 0.0;
    double lo = 0.0;

    constexpr Real2() = default;
    constexpr Real2(double h) : hi(h) {}
    constexpr Real2(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi + lo; }
};

namespace detail {

inline Real2 twoSum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

// Requires |a| >= |b| or a == 0.
inline Real2 quickTwoSum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline Real2 twoProd(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

}  // namespace detail

inline Real2 add(Real2 a, Real2 b) {
    Real2 s = detail::twoSum(a.hi, b.hi);
    const Real2 t = detail::twoSum(a.lo, b.lo);
    s.lo += t.hi;
    s = detail::quickTwoSum(s.hi, s.lo);
    s.lo += t.lo;
    return detail::quickTwoSum(s.hi, s.lo);
}

inline Real2 neg(Real2 a) { return {-a.hi, -a.lo}; }

inline Real2 sub(Real2 a, Real2 b) { return add(a, neg(b)); }

inline Real2 mul(Real2 a, Real2 b) {
    Real2 p = detail::twoProd(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return detail::quickTwoSum(p.hi, p.lo);
}

inline Real2 mul(Real2 a, double b) { return mul(a, Real2(b)); }

inline Real2 div(Real2 a, Real2 b) {
    const double q1 = a.hi / b.hi;
    Real2 r = sub(a, mul(b, q1));
    const double q2 = r.hi / b.hi;
    r = sub(r, mul(b, q2));
    const double q3 = r.hi / b.hi;
    const Real2 q = detail::quickTwoSum(q1, q2);
    return add(q, Real2(q3));
}

inline constexpr Real2 kLn2{6.931471805599453e-01, 2.3190468138462996e-17};
inline constexpr Real2 kTwoPi2{6.283185307179586, 2.4492935982947064e-16};
inline constexpr Real2 kHalfPi2{1.5707963267948966, 6.123233995736766e-17};

// exp by argument reduction against ln 2, a short Taylor tail on the scaled
// remainder, and repeated squaring. Standard double-double recipe.
inline Real2 exp(Real2 a) {
    if (a.hi > 690.0) throw OverflowError("dd::exp: argument too large");
    if (a.hi < -745.0) return Real2(0.0);
    const double m = std::floor(a.hi / kLn2.hi + 0.5);
    Real2 r = sub(a, mul(kLn2, m));
    // Scale so |r| <= ~0.00136, then e^r - 1 needs few terms.
    const double invScale = 1.0 / 512.0;
    r = mul(r, invScale);
    Real2 p = r;
    Real2 term = r;
    for (int k = 2; k <= 9; ++k) {
        // Divide by the exact integer; a rounded double coefficient would
        // cap the series at ~1e-17 relative.
        term = div(mul(term, r), Real2(static_cast<double>(k)));
        p = add(p, term);
    }
    // (1+p)^512 - 1 via p <- p^2 + 2p, nine times.
    for (int i = 0; i < 9; ++i) p = add(mul(p, p), mul(p, 2.0));
    Real2 out = add(p, Real2(1.0));
    return mul(out, std::ldexp(1.0, static_cast<int>(m)));
}

// sin and cos together, for |a| small enough that reduction modulo 2 pi by a
// modest integer multiple stays exact to the representation.
inline void sinCos(Real2 a, Real2& s, Real2& c) {
    const double j = std::floor(a.hi / kTwoPi2.hi + 0.5);
    Real2 r = sub(a, mul(kTwoPi2, j));
    const double k = std::floor(r.hi / kHalfPi2.hi + 0.5);
    r = sub(r, mul(kHalfPi2, k));
    // |r| <= pi/4: alternating Taylor series in r^2.
    const Real2 r2 = mul(r, r);
    Real2 sr = r;
    Real2 term = r;
    for (int n = 1; n <= 14; ++n) {
        term = div(mul(term, r2), Real2(static_cast<double>(-(2 * n) * (2 * n + 1))));
        sr = add(sr, term);
    }
    Real2 cr(1.0);
    term = Real2(1.0);
    for (int n = 1; n <= 14; ++n) {
        term = div(mul(term, r2), Real2(static_cast<double>(-(2 * n - 1) * (2 * n))));
        cr = add(cr, term);
    }
    switch (static_cast<int>(k) & 3) {
        case 0: s = sr; c = cr; break;
        case 1: s = cr; c = neg(sr); break;
        case 2: s = neg(sr); c = neg(cr); break;
        default: s = neg(cr); c = sr; break;
    }
}

struct Complex2 {
    Real2 re, im;

    Complex2() = default;
    Complex2(Real2 r, Real2 i) : re(r), im(i) {}
    Complex2(double r, double i = 0.0) : re(r), im(i) {}
    explicit Complex2(Complex z) : re(z.real()), im(z.imag()) {}

    Complex value() const { return {re.value(), im.value()}; }
};

inline Complex2 add(Complex2 a, Complex2 b) { return {add(a.re, b.re), add(a.im, b.im)}; }
inline Complex2 sub(Complex2 a, Complex2 b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }

inline Complex2 mul(Complex2 a, Complex2 b) {
    return {sub(mul(a.re, b.re), mul(a.im, b.im)), add(mul(a.re, b.im), mul(a.im, b.re))};
}

inline Complex2 mul(Complex2 a, double b) { return {mul(a.re, b), mul(a.im, b)}; }

inline Complex2 div(Complex2 a, Complex2 b) {
    const Real2 den = add(mul(b.re, b.re), mul(b.im, b.im));
    const Complex2 num = mul(a, Complex2{b.re, neg(b.im)});
    return {div(num.re, den), div(num.im, den)};
}

inline Complex2 exp(Complex2 a) {
    const Real2 ex = exp(a.re);
    Real2 s, c;
    sinCos(a.im, s, c);
    return {mul(ex, c), mul(ex, s)};
}

// Squared modulus collapsed to double; fine whenever the result is wanted at
// double precision only.
inline double absValue(Complex2 a) {
    const Real2 m = add(mul(a.re, a.re), mul(a.im, a.im));
    return std::sqrt(m.value());
}

}  // namespace bouquet::dd
