#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "bouquet/util.hpp"

namespace bouquet {

// Parameters of the p-fold exponential sum
//
//     f(z) = lambda * sum_{k=0}^{p-1} exp(w_k z),   w_k = exp(2 pi i k / p).
//
// The rotation table is precomputed once; all evaluators walk it in fixed
// k-ascending order with compensated summation so results are reproducible
// bit-for-bit regardless of call site or thread.
class FamilyParams {
public:
    FamilyParams(int p, double lambda = 1.0) : p_(p), lambda_(lambda) {
        if (p < 3) throw InvariantError("FamilyParams: p must be >= 3");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw InvariantError("FamilyParams: lambda must be positive and finite");
        roots_.reserve(static_cast<std::size_t>(p));
        for (int k = 0; k < p; ++k) {
            const double a = kTwoPi * k / p;
            roots_.emplace_back(std::cos(a), std::sin(a));
        }
    }

    int p() const { return p_; }
    double lambda() const { return lambda_; }
    Complex omega(int k) const { return roots_[static_cast<std::size_t>(mod(k))]; }

private:
    int mod(int k) const {
        int r = k % p_;
        if (r < 0) r += p_;
        return r;
    }

    int p_;
    double lambda_;
    std::vector<Complex> roots_;
};

// Value in log-polar form: e^{logMod} * e^{i phase}. logMod == -inf encodes an
// exact zero. Never overflows for representable z, unlike the direct value.
struct LogComplex {
    double logMod = 0.0;
    double phase = 0.0;

    Complex value() const { return std::polar(std::exp(logMod), phase); }
};

namespace detail {

inline Complex rotated(const FamilyParams& fam, int k, Complex z) {
    return fam.omega(k) * z;
}

}  // namespace detail

// f(z). Throws OverflowError when any term's exponent exceeds double range;
// callers needing the value beyond that use evalFLog.
inline Complex evalF(const FamilyParams& fam, Complex z) {
    CompensatedComplexSum sum;
    for (int k = 0; k < fam.p(); ++k) {
        const Complex w = detail::rotated(fam, k, z);
        if (w.real() > kMaxExp)
            throw OverflowError("evalF: term exponent " + formatDouble(w.real()) +
                                " exceeds double range");
        sum.add(std::exp(w));
    }
    return fam.lambda() * sum.value();
}

// f'(z) = lambda * sum_k w_k exp(w_k z).
inline Complex evalFPrime(const FamilyParams& fam, Complex z) {
    CompensatedComplexSum sum;
    for (int k = 0; k < fam.p(); ++k) {
        const Complex w = detail::rotated(fam, k, z);
        if (w.real() > kMaxExp)
            throw OverflowError("evalFPrime: term exponent " + formatDouble(w.real()) +
                                " exceeds double range");
        sum.add(fam.omega(k) * std::exp(w));
    }
    return fam.lambda() * sum.value();
}

// eps(z) = sum_{k=1}^{p-1} exp((w_k - 1) z), so that f(z) = lambda e^z (1 + eps(z)).
// Computed term by term; never as f/e^z, which would overflow long before the
// quotient does.
inline Complex evalEpsilon(const FamilyParams& fam, Complex z) {
    CompensatedComplexSum sum;
    for (int k = 1; k < fam.p(); ++k) {
        const Complex e = (fam.omega(k) - 1.0) * z;
        if (e.real() > kMaxExp)
            throw OverflowError("evalEpsilon: term exponent exceeds double range");
        sum.add(std::exp(e));
    }
    return sum.value();
}

// d/dz eps(z) = sum_{k=1}^{p-1} (w_k - 1) exp((w_k - 1) z).
inline Complex evalEpsilonPrime(const FamilyParams& fam, Complex z) {
    CompensatedComplexSum sum;
    for (int k = 1; k < fam.p(); ++k) {
        const Complex d = fam.omega(k) - 1.0;
        const Complex e = d * z;
        if (e.real() > kMaxExp)
            throw OverflowError("evalEpsilonPrime: term exponent exceeds double range");
        sum.add(d * std::exp(e));
    }
    return sum.value();
}

// f(z) in log-polar form via a complex log-sum-exp: factor out the term of
// largest real exponent, sum the remaining ratios (all of modulus <= 1).
inline LogComplex evalFLog(const FamilyParams& fam, Complex z) {
    int kStar = 0;
    double reMax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < fam.p(); ++k) {
        const double re = detail::rotated(fam, k, z).real();
        if (re > reMax) {
            reMax = re;
            kStar = k;
        }
    }
    const Complex wStar = detail::rotated(fam, kStar, z);
    CompensatedComplexSum sum;
    for (int k = 0; k < fam.p(); ++k) {
        sum.add(std::exp(detail::rotated(fam, k, z) - wStar));
    }
    const Complex s = sum.value();
    const double mag = std::abs(s);
    LogComplex out;
    out.logMod = wStar.real() + std::log(mag) + std::log(fam.lambda());
    out.phase = normalizeAngle(wStar.imag() + std::arg(s));
    return out;
}

// f'(z) in log-polar form. The k-th term is exp(w_k z + 2 pi i k / p), so the
// real exponents match evalFLog and the same factoring applies.
inline LogComplex evalFPrimeLog(const FamilyParams& fam, Complex z) {
    int kStar = 0;
    double reMax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < fam.p(); ++k) {
        const double re = detail::rotated(fam, k, z).real();
        if (re > reMax) {
            reMax = re;
            kStar = k;
        }
    }
    const Complex wStar = detail::rotated(fam, kStar, z);
    CompensatedComplexSum sum;
    for (int k = 0; k < fam.p(); ++k) {
        sum.add(fam.omega(k) * std::exp(detail::rotated(fam, k, z) - wStar));
    }
    const Complex s = sum.value();
    LogComplex out;
    out.logMod = wStar.real() + std::log(std::abs(s)) + std::log(fam.lambda());
    out.phase = normalizeAngle(wStar.imag() + std::arg(s));
    return out;
}

// Reduced function g with f(z) = g(z^p):
//
//     g(w) = lambda * p * sum_{j>=0} w^j / (jp)!
//
// Terms are built by the ratio recurrence term_{j+1} = term_j * w / prod(jp+1..jp+p),
// which never forms (jp)! directly. Truncation: first index with
// |term| < tol * max(1, |partial|), capped at 512 terms.
inline Complex evalG(const FamilyParams& fam, Complex w, double tol = 1e-16) {
    const int p = fam.p();
    Complex term = 1.0;
    CompensatedComplexSum sum;
    sum.add(term);
    double partialMag = 1.0;
    for (int j = 0; j < 512; ++j) {
        Complex next = term * w;
        for (int i = 1; i <= p; ++i) {
            next /= static_cast<double>(j) * p + i;
        }
        term = next;
        sum.add(term);
        partialMag = std::max(partialMag, std::abs(sum.value()));
        if (std::abs(term) < tol * std::max(1.0, partialMag)) break;
    }
    return fam.lambda() * static_cast<double>(p) * sum.value();
}

namespace detail {

// log |f| on the circle |z| = r at angle theta.
inline double logAbsOnCircle(const FamilyParams& fam, double r, double theta) {
    return evalFLog(fam, std::polar(r, theta)).logMod;
}

}  // namespace detail

// log M(r, f) = log max_{|z|=r} |f(z)|. Dense scan of one fundamental arc of
// width 2 pi / p (|f| is invariant under rotation by that angle), then
// golden-section refinement around the best sample. relTol bounds the final
// bracket's value spread relative to the maximum.
inline double logMaxModulus(const FamilyParams& fam, double r, double relTol = 1e-12,
                            int nSamples = 4096) {
    if (!(r > 0.0)) throw InvariantError("logMaxModulus: r must be positive");
    const double arc = kTwoPi / fam.p();
    int best = 0;
    double bestVal = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(static_cast<std::size_t>(nSamples));
    for (int i = 0; i < nSamples; ++i) {
        const double th = arc * i / nSamples - arc / 2.0;
        const double v = detail::logAbsOnCircle(fam, r, th);
        vals[static_cast<std::size_t>(i)] = v;
        if (v > bestVal) {
            bestVal = v;
            best = i;
        }
    }
    // Golden-section around the best sample and its neighbors. Work on the
    // log scale: a relative tolerance on M is an absolute one on log M.
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = arc * (best - 1) / nSamples - arc / 2.0;
    double b = arc * (best + 1) / nSamples - arc / 2.0;
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = detail::logAbsOnCircle(fam, r, c);
    double fd = detail::logAbsOnCircle(fam, r, d);
    const double absTol = std::abs(std::log1p(relTol));
    for (int it = 0; it < 200; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = detail::logAbsOnCircle(fam, r, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = detail::logAbsOnCircle(fam, r, d);
        }
        if (std::abs(fc - fd) < absTol) break;
    }
    return std::max(bestVal, std::max(fc, fd));
}

// M(r, f) as a direct value. Throws OverflowError if the maximum exceeds
// double range; logMaxModulus covers that regime.
inline double maxModulus(const FamilyParams& fam, double r, double relTol = 1e-12,
                         int nSamples = 4096) {
    const double lm = logMaxModulus(fam, r, relTol, nSamples);
    if (lm > kMaxExp)
        throw OverflowError("maxModulus: M(r) exceeds double range, use logMaxModulus");
    return std::exp(lm);
}

}  // namespace bouquet
