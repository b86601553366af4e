#pragma once

// Symbolic dynamics over the horizontal strips R(j): itineraries, the inverse
// branches landing in each strip's large-real-part half, periodic points with
// prescribed symbol sequences, and sampled checks of the covering picture
// that makes the coding work.
//
// The inverse branch needs care below the dominance threshold. For
// log|w/lambda| well past (2|j|+1) pi cot(pi/p) the leading exponential rules
// the strip and the classical correction iteration
//   z <- log(w/lambda) + 2 pi i j - log(1 + eps(z))
// contracts onto the unique preimage. Nearer the ray lines that iteration has
// no attracting fixed point (the correction is of order one), and f(z) = w
// can hold at several in-strip points; the branch value is then pinned by
// analytic continuation: lift w radially into the dominant zone, solve there,
// and track the root back down with an Euler predictor and damped Newton
// corrector. This keeps the result on the branch with large real part
// instead of whichever root a cold Newton start happens to hit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bouquet/dd.hpp"
#include "bouquet/family.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/util.hpp"

namespace bouquet {

struct ItinerarySpec {
    std::vector<int> preperiod;
    std::vector<int> period;
    int bound = 3;  // symbol bound K

    // Preperiod symbols may be 0 (real-axis digits); period symbols index
    // trapezia and must be nonzero.
    void validate() const {
        if (bound < 1) throw InvariantError("ItinerarySpec: bound must be >= 1");
        if (period.empty()) throw InvariantError("ItinerarySpec: period must be nonempty");
        for (int sym : preperiod)
            if (std::abs(sym) > bound)
                throw InvariantError("ItinerarySpec: preperiod symbol beyond the bound");
        for (int sym : period) {
            if (sym == 0) throw InvariantError("ItinerarySpec: period symbol 0 has no trapezium");
            if (std::abs(sym) > bound)
                throw InvariantError("ItinerarySpec: period symbol beyond the bound");
        }
    }

    ItinerarySpec shifted() const {
        ItinerarySpec out = *this;
        if (!out.preperiod.empty()) {
            out.preperiod.erase(out.preperiod.begin());
        } else {
            std::rotate(out.period.begin(), out.period.begin() + 1, out.period.end());
        }
        return out;
    }
};

// Serialized form: comma-separated integers, preperiod and period split by a
// single '|'; a string without '|' is a pure period.
inline std::string formatItinerary(const ItinerarySpec& spec) {
    std::string out;
    auto append = [&out](const std::vector<int>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out += ',';
            out += std::to_string(v[i]);
        }
    };
    if (!spec.preperiod.empty()) {
        append(spec.preperiod);
        out += '|';
    }
    append(spec.period);
    return out;
}

namespace detail {

inline std::vector<int> parseSymbolList(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string token = text.substr(pos, comma - pos);
        if (token.empty())
            throw InvariantError("parseItinerary: empty symbol token");
        char* end = nullptr;
        const long value = std::strtol(token.c_str(), &end, 10);
        if (end != token.c_str() + token.size())
            throw InvariantError("parseItinerary: malformed integer '" + token + "'");
        out.push_back(static_cast<int>(value));
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

}  // namespace detail

inline ItinerarySpec parseItinerary(const std::string& text, int bound = 3) {
    ItinerarySpec spec;
    spec.bound = bound;
    const std::size_t bar = text.find('|');
    if (bar == std::string::npos) {
        spec.period = detail::parseSymbolList(text);
    } else {
        if (text.find('|', bar + 1) != std::string::npos)
            throw InvariantError("parseItinerary: more than one '|'");
        if (bar > 0) spec.preperiod = detail::parseSymbolList(text.substr(0, bar));
        spec.period = detail::parseSymbolList(text.substr(bar + 1));
    }
    spec.validate();
    return spec;
}

namespace detail {

// Evaluation noise scale of f at z: cancellation between the p exponentials
// leaves an absolute error of this order, so residual targets below it are
// unreachable no matter how the root is polished.
inline double evalNoiseFloor(const FamilyParams& fam, Complex z) {
    double top = z.real();
    for (int k = 1; k < fam.p(); ++k) top = std::max(top, (fam.omega(k) * z).real());
    return std::numeric_limits<double>::epsilon() * fam.lambda() * fam.p() * std::exp(top);
}

// Damped Newton on f(z) = w from an explicit seed, aiming at an absolute
// residual target. Returns the final iterate; the caller judges the residual.
inline Complex newtonBranchStep(const FamilyParams& fam, Complex w, Complex z, double absTol,
                                int maxIter = 48) {
    Complex fz = evalF(fam, z);
    double res = std::abs(fz - w);
    for (int it = 0; it < maxIter && res > std::max(absTol, 4.0 * evalNoiseFloor(fam, z));
         ++it) {
        const Complex fp = evalFPrime(fam, z);
        if (!(std::abs(fp) > 0.0)) break;
        const Complex full = (fz - w) / fp;
        double t = 1.0;
        Complex zn = z - full;
        Complex fn;
        double rn = std::numeric_limits<double>::infinity();
        for (;;) {
            bool ok = true;
            try {
                fn = evalF(fam, zn);
            } catch (const OverflowError&) {
                ok = false;
            }
            if (ok) rn = std::abs(fn - w);
            if ((ok && rn < res) || t < 1.0 / 1024.0) break;
            t *= 0.5;
            zn = z - t * full;
        }
        if (!(rn < res)) break;  // stalled; let the caller decide
        z = zn;
        fz = fn;
        res = rn;
    }
    return z;
}

// Correction iteration for the dominant zone; returns nullopt when it fails
// to settle (no attracting fixed point there).
inline std::optional<Complex> correctionIteration(const FamilyParams& fam, Complex logSeed) {
    Complex z = logSeed;
    for (int it = 0; it < 64; ++it) {
        const Complex eps = evalEpsilon(fam, z);
        const Complex next = logSeed - std::log(Complex(1.0, 0.0) + eps);
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) return std::nullopt;
        const double step = std::abs(next - z);
        z = next;
        if (step < 1e-14 * (1.0 + std::abs(z))) return z;
    }
    return std::nullopt;
}

}  // namespace detail

// Branch of the inverse landing in strip R(j) with large real part. The
// dominance threshold (2|j|+1) pi cot(pi/p) marks where the strip's slanted
// ray line sits at the preimage's height; beyond it (plus margin) the
// correction iteration is a contraction, below it the root is continued down
// from the lifted modulus as described at the top of the file.
inline Complex inverseBranch(const RegionScheme& s, Complex w, int j, double tol = 1e-12) {
    const FamilyParams& fam = s.params;
    if (!(std::abs(w) > 0.0))
        throw InvariantError("inverseBranch: w must be nonzero");
    if (!(tol > 0.0)) throw InvariantError("inverseBranch: tol must be positive");
    const double yLo = (2.0 * j - 1.0) * kPi;
    const double yHi = (2.0 * j + 1.0) * kPi;
    const double wAbs = std::abs(w);
    const double logW = std::log(wAbs / fam.lambda());
    const double argW = std::arg(w);
    const double threshold =
        (2.0 * std::abs(j) + 1.0) * kPi / std::tan(kPi / fam.p()) + 3.0;

    // Residual acceptance is noise-aware: close to the slant lines the
    // exponentials cancel and |f| is far below the largest term, so the best
    // reachable absolute residual is the evaluation floor, not tol |w|. The
    // multiple leaves room above the Newton stop level (4x the floor), since
    // a stalled line search can settle anywhere between the two.
    const auto accepted = [&fam, w, wAbs, tol](Complex z) {
        return std::abs(evalF(fam, z) - w) <=
               std::max(tol * wAbs, 16.0 * detail::evalNoiseFloor(fam, z));
    };

    Complex z;
    if (logW >= threshold) {
        const Complex seed(logW, argW + kTwoPi * j);
        const std::optional<Complex> fast = detail::correctionIteration(fam, seed);
        z = fast.value_or(seed);
        if (!accepted(z)) z = detail::newtonBranchStep(fam, w, z, tol * 0.1 * wAbs);
    } else {
        // Radial continuation from the dominant zone down to w. The step is
        // adaptive: when the Newton correction after the Euler predictor is
        // no longer small against the predicted move, the path is near a fold
        // (a critical value of f close to the ray), and a full-size step
        // would overshoot into the basin of the other preimage sheet. Halve
        // until the correction ratio is healthy again, regrow afterwards.
        const double lift = threshold - logW;
        const auto stepTo = [&fam, tol](Complex& zc, Complex wPrev, Complex wNext) {
            const Complex fp = evalFPrime(fam, zc);
            if (!(std::abs(fp) > 0.0)) return false;
            const Complex dzPred = (wNext - wPrev) / fp;
            const Complex zPred = zc + dzPred;
            const Complex zNew =
                detail::newtonBranchStep(fam, wNext, zPred, tol * 0.1 * std::abs(wNext));
            const double floor = detail::evalNoiseFloor(fam, zNew);
            const bool onTrack =
                std::abs(evalF(fam, zNew) - wNext) <=
                    std::max(1e-9 * std::abs(wNext), 8.0 * floor) &&
                std::abs(zNew - zPred) <= 0.5 * std::abs(dzPred) + 1e-9;
            if (!onTrack) return false;
            zc = zNew;
            return true;
        };
        // One descent attempt along the ray arg w + phaseOff, then a phase
        // sweep back to arg w at the target modulus. A nonzero offset routes
        // the path around a critical value sitting close to the direct ray.
        const auto descend = [&](double phaseOff) -> std::optional<Complex> {
            const Complex wOff = w * std::polar(1.0, phaseOff);
            const std::optional<Complex> top = detail::correctionIteration(
                fam, Complex(logW + lift, argW + phaseOff + kTwoPi * j));
            if (!top) return std::nullopt;
            Complex zc = *top;
            double sCur = lift;
            double ds = 0.5;
            while (sCur > 0.0) {
                ds = std::min(ds, sCur);
                if (!stepTo(zc, wOff * std::exp(sCur), wOff * std::exp(sCur - ds))) {
                    ds *= 0.5;
                    if (ds < 1e-4) return std::nullopt;
                    continue;
                }
                sCur -= ds;
                ds = std::min(0.5, 1.6 * ds);
            }
            double phi = phaseOff;
            double dphi = 0.1;
            while (phi != 0.0) {
                const double sign = phi > 0.0 ? 1.0 : -1.0;
                const double step = std::min(dphi, std::abs(phi));
                const double phiNext = phi - sign * step;
                if (!stepTo(zc, w * std::polar(1.0, phi), w * std::polar(1.0, phiNext))) {
                    dphi *= 0.5;
                    if (dphi < 1e-4) return std::nullopt;
                    continue;
                }
                phi = phiNext;
                dphi = std::min(0.25, 1.6 * dphi);
            }
            return zc;
        };
        std::optional<Complex> got;
        for (double off : {0.0, 0.2, -0.2, 0.45, -0.45}) {
            got = descend(off);
            if (got) break;
        }
        if (!got)
            throw ConvergenceError(
                "inverseBranch: continuation step control underflow near a critical value");
        z = *got;
    }
    if (!accepted(z))
        throw ConvergenceError("inverseBranch: no convergence within the iteration budget");
    if (!(z.imag() > yLo && z.imag() < yHi))
        throw BranchError("inverseBranch: limit left the branch strip");
    return z;
}

enum class ItineraryStatus { Completed, Escaped, BoundaryHit, Overflow };

// digits holds the strip index of every orbit point seen before the stop;
// steps is the orbit index at which the stop condition fired (for Overflow,
// the index whose image is unrepresentable; its own digit is recorded).
struct ItineraryResult {
    std::vector<int> digits;
    ItineraryStatus status = ItineraryStatus::Completed;
    int steps = 0;
};

inline ItineraryResult itineraryOf(const RegionScheme& s, Complex z, int nMax,
                                   double escapeRadius) {
    if (nMax < 0) throw InvariantError("itineraryOf: nMax must be >= 0");
    if (!(escapeRadius > 0.0)) throw InvariantError("itineraryOf: escape radius must be positive");
    ItineraryResult out;
    Complex cur = z;
    for (int n = 0; n < nMax; ++n) {
        if (std::abs(cur) > escapeRadius) {
            out.status = ItineraryStatus::Escaped;
            out.steps = n;
            return out;
        }
        const std::optional<int> k = stripIndex(cur);
        if (!k) {
            out.status = ItineraryStatus::BoundaryHit;
            out.steps = n;
            return out;
        }
        out.digits.push_back(*k);
        double top = cur.real();
        for (int q = 1; q < s.p(); ++q)
            top = std::max(top, (s.params.omega(q) * cur).real());
        if (top > 700.0) {
            out.status = ItineraryStatus::Overflow;
            out.steps = n;
            return out;
        }
        cur = evalF(s.params, cur);
    }
    out.status = ItineraryStatus::Completed;
    out.steps = nMax;
    return out;
}

struct PeriodicPointRecord {
    ItinerarySpec itinerary;  // pure period
    Complex z;
    Complex multiplier;  // (f^n)'(z) by the chain rule along the orbit
    int period = 0;
};

// Unique point whose itinerary repeats the given digits, found as the fixed
// point of the composite inverse branch (a strong contraction: every factor
// shrinks by better than 1/2). Seeded at the strip center on the right edge.
inline PeriodicPointRecord periodicPoint(const RegionScheme& s, const std::vector<int>& digits,
                                         double tol = 1e-10, int symbolBound = 0) {
    if (digits.empty()) throw InvariantError("periodicPoint: period must be nonempty");
    int bound = symbolBound;
    for (int d : digits) {
        if (d == 0) throw InvariantError("periodicPoint: symbol 0 has no trapezium");
        if (symbolBound > 0 && std::abs(d) > symbolBound)
            throw InvariantError("periodicPoint: symbol beyond the bound");
        bound = std::max(bound, std::abs(d));
    }
    if (!(tol > 0.0)) throw InvariantError("periodicPoint: tol must be positive");
    const int n = static_cast<int>(digits.size());

    Complex z(s.c, kTwoPi * digits[0]);
    double prevStep = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < 160; ++it) {
        Complex next = z;
        for (int i = n - 1; i >= 0; --i) {
            try {
                next = inverseBranch(s, next, digits[i], 1e-13);
            } catch (const BranchError&) {
                throw BranchError("periodicPoint: intermediate left its half-strip");
            }
        }
        const double step = std::abs(next - z);
        z = next;
        // Polish past the requested tolerance until the steps either reach
        // rounding scale or stop shrinking (the branch evaluation floor).
        if (step < 1e-13 * (1.0 + std::abs(z))) {
            converged = true;
            break;
        }
        if (it >= 8 && step >= 0.5 * prevStep) {
            converged = step < tol * (1.0 + std::abs(z));
            break;
        }
        prevStep = step;
    }
    if (!converged)
        throw ConvergenceError("periodicPoint: composite iteration did not settle");

    Complex multiplier(1.0, 0.0);
    Complex orbit = z;
    for (int i = 0; i < n; ++i) {
        multiplier *= evalFPrime(s.params, orbit);
        orbit = evalF(s.params, orbit);
    }
    PeriodicPointRecord rec;
    rec.itinerary.preperiod = {};
    rec.itinerary.period = digits;
    rec.itinerary.bound = bound;
    rec.z = z;
    rec.multiplier = multiplier;
    rec.period = n;
    return rec;
}

namespace detail {

// f and f' at a double-double point, with the unit roots themselves carried
// at double-double accuracy so the cancellation between the exponentials is
// resolved far below the double rounding floor.
inline void evalFPair2(const FamilyParams& fam, dd::Complex2 z, dd::Complex2& f,
                       dd::Complex2& fp) {
    f = dd::Complex2(0.0);
    fp = dd::Complex2(0.0);
    for (int k = 0; k < fam.p(); ++k) {
        dd::Real2 sk, ck;
        dd::sinCos(dd::div(dd::mul(dd::kTwoPi2, static_cast<double>(k)),
                           dd::Real2(static_cast<double>(fam.p()))),
                   sk, ck);
        const dd::Complex2 om{ck, sk};
        const dd::Complex2 e = dd::exp(dd::mul(om, z));
        f = dd::add(f, e);
        fp = dd::add(fp, dd::mul(om, e));
    }
    f = dd::mul(f, fam.lambda());
    fp = dd::mul(fp, fam.lambda());
}

}  // namespace detail

// Shadowing certificate for a periodic orbit. A repelling cycle multiplies
// the representation error of its points when iterated forward, so for large
// multipliers the double-precision closure |f^n(z) - z| measures the float
// format rather than the orbit. This polishes the full cycle with a cyclic
// shooting Newton method in compensated (double-double) arithmetic: the
// closed-cycle correction dz_b = S / (1 - M) divides by the multiplier M and
// is therefore perfectly conditioned for repelling orbits. The reported
// closure is then the compensated forward residual of the refined cycle, and
// maxCorrection bounds how far the input points sat from it.
struct OrbitRefinement {
    std::vector<Complex> points;
    Complex multiplier;
    double closure = 0.0;
    double maxCorrection = 0.0;
    bool converged = false;
};

inline OrbitRefinement refineOrbit(const FamilyParams& fam, const std::vector<Complex>& orbit) {
    if (orbit.empty()) throw InvariantError("refineOrbit: orbit must be nonempty");
    const int n = static_cast<int>(orbit.size());
    std::vector<dd::Complex2> z;
    z.reserve(orbit.size());
    for (Complex q : orbit) z.emplace_back(q);

    OrbitRefinement out;
    std::vector<dd::Complex2> r(orbit.size()), fp(orbit.size());
    for (int it = 0; it < 12 && !out.converged; ++it) {
        for (int i = 0; i < n; ++i) {
            dd::Complex2 f;
            detail::evalFPair2(fam, z[static_cast<std::size_t>(i)], f,
                               fp[static_cast<std::size_t>(i)]);
            r[static_cast<std::size_t>(i)] = dd::sub(f, z[static_cast<std::size_t>((i + 1) % n)]);
        }
        double corr = 0.0;
        std::vector<dd::Complex2> dz(orbit.size());
        for (int b = 0; b < n; ++b) {
            // Linearized cycle: dz_{i+1} = f'_i dz_i + r_i, closed over one
            // full turn starting at b.
            dd::Complex2 M(1.0);
            dd::Complex2 S(0.0);
            for (int q = 0; q < n; ++q) {
                const std::size_t i = static_cast<std::size_t>((b + q) % n);
                S = dd::add(dd::mul(fp[i], S), r[i]);
                M = dd::mul(fp[i], M);
            }
            const dd::Complex2 den = dd::sub(M, dd::Complex2(1.0));
            if (dd::absValue(den) < 1e-6)
                throw ConvergenceError("refineOrbit: cycle is numerically neutral");
            dz[static_cast<std::size_t>(b)] =
                dd::div(dd::sub(dd::Complex2(0.0), S), den);
            corr = std::max(corr, dd::absValue(dz[static_cast<std::size_t>(b)]));
        }
        for (int i = 0; i < n; ++i)
            z[static_cast<std::size_t>(i)] =
                dd::add(z[static_cast<std::size_t>(i)], dz[static_cast<std::size_t>(i)]);
        out.converged = corr < 1e-24;
    }
    if (!out.converged)
        throw ConvergenceError("refineOrbit: corrections did not reach the compensated floor");

    dd::Complex2 cur = z[0];
    dd::Complex2 mult(1.0);
    for (int i = 0; i < n; ++i) {
        dd::Complex2 f, d;
        detail::evalFPair2(fam, cur, f, d);
        mult = dd::mul(d, mult);
        cur = f;
    }
    out.closure = dd::absValue(dd::sub(cur, z[0]));
    out.multiplier = mult.value();
    out.points.reserve(orbit.size());
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        out.points.push_back(z[i].value());
        out.maxCorrection = std::max(out.maxCorrection, std::abs(out.points[i] - orbit[i]));
    }
    return out;
}

// Sampled covering checks over the trapezia of |m| <= K: the horizontal
// sides must map into the left half-plane, and on the outer vertical side f
// hugs the circle of radius lambda e^c, with the band halfwidth reported
// relative to that radius. Crossings counts the sign changes of Re f along
// the vertical side (the image must reach both imaginary half-axes).
struct CoveringReport {
    int symbolBound = 0;
    int nSamples = 0;
    double c = 0.0;
    double minHorizontalMargin = 0.0;  // min over Y samples of (-Re f) / (lambda e^{Re z})
    double maxAnnulusRatio = 0.0;      // max over m of band halfwidth / (lambda e^c)
    int minAxisCrossings = 0;          // min over m of Re f sign changes on the vertical side
    bool horizontalPass = false;
    bool crossingsPass = false;
};

inline CoveringReport verifyCovering(const RegionScheme& s, int symbolBound, int nSamples = 512) {
    if (symbolBound < 1) throw InvariantError("verifyCovering: symbol bound must be >= 1");
    if (nSamples < 8) throw InvariantError("verifyCovering: need at least 8 samples per side");
    const FamilyParams& fam = s.params;
    const int p = fam.p();
    CoveringReport rep;
    rep.symbolBound = symbolBound;
    rep.nSamples = nSamples;
    rep.c = s.c;
    rep.minHorizontalMargin = std::numeric_limits<double>::infinity();
    rep.maxAnnulusRatio = 0.0;
    rep.minAxisCrossings = std::numeric_limits<int>::max();

    auto secondary = [&fam, p](Complex z) {
        CompensatedComplexSum rest;
        for (int k = 1; k < p; ++k) rest.add(std::exp(fam.omega(k) * z - z.real()));
        return rest.value();  // (f(z) - lambda e^z) / (lambda e^{Re z})
    };

    for (int mAbs = 1; mAbs <= symbolBound; ++mAbs) {
        for (int sign : {1, -1}) {
            const int m = sign * mAbs;
            const TrapeziumSpec trap = trapezium(s, m);
            for (int side = 0; side < 4; ++side) {
                const auto [a, b] = trap.side(side);
                const bool horizontal = std::abs(a.imag() - b.imag()) < 1e-12;
                const bool vertical = std::abs(a.real() - s.c) < 1e-9 &&
                                      std::abs(b.real() - s.c) < 1e-9;
                if (horizontal) {
                    for (int i = 0; i <= nSamples; ++i) {
                        const Complex z = a + (b - a) * (static_cast<double>(i) / nSamples);
                        // f = lambda e^z (1 + ...): on Im z odd*pi the head is
                        // -lambda e^{Re z}, so the scale-free margin is
                        // 1 - Re(secondary rotated by the head's phase).
                        const Complex f = std::polar(1.0, z.imag()) + secondary(z);
                        rep.minHorizontalMargin = std::min(rep.minHorizontalMargin, -f.real());
                    }
                } else if (vertical) {
                    double halfwidth = 0.0;
                    int crossings = 0;
                    double prevSign = 0.0;
                    for (int i = 0; i <= nSamples; ++i) {
                        const Complex z = a + (b - a) * (static_cast<double>(i) / nSamples);
                        const Complex sec = secondary(z);
                        halfwidth = std::max(halfwidth, std::abs(sec));
                        const Complex f = std::polar(1.0, z.imag()) + sec;
                        const double sg = f.real() > 0.0 ? 1.0 : (f.real() < 0.0 ? -1.0 : 0.0);
                        if (prevSign != 0.0 && sg != 0.0 && sg != prevSign) ++crossings;
                        if (sg != 0.0) prevSign = sg;
                    }
                    rep.maxAnnulusRatio = std::max(rep.maxAnnulusRatio, halfwidth);
                    rep.minAxisCrossings = std::min(rep.minAxisCrossings, crossings);
                }
            }
        }
    }
    rep.horizontalPass = rep.minHorizontalMargin > 0.0;
    rep.crossingsPass = rep.minAxisCrossings >= 2;
    return rep;
}

// Right edge large enough for the covering to close over symbols |j| <= K:
// the leading exponential must outweigh the secondary terms on the outer
// side of the top trapezium by a fixed factor, and the image circle must
// reach around every trapezium point. The candidate is then checked by
// sampling before it is returned.
inline double effectiveC(const RegionScheme& s, int symbolBound, double safety = 1.05) {
    if (symbolBound < 1) throw InvariantError("effectiveC: symbol bound must be >= 1");
    const int p = s.p();
    const double lambda = s.params.lambda();
    const double beta = kTwoPi / p;
    const double yTop = (2.0 * symbolBound + 1.0) * kPi;
    const double cDominance =
        (yTop * std::sin(beta) + std::log(100.0 * (p - 1))) / (1.0 - std::cos(beta));
    double cReach = s.c;
    for (int it = 0; it < 64; ++it) {
        const double need = std::log(std::hypot(cReach, yTop) / (0.99 * lambda));
        if (need <= cReach) break;
        cReach = need;
    }
    const double c = std::max(s.c, safety * std::max(cDominance, cReach));

    RegionScheme widened = s;
    widened.c = c;
    const CoveringReport rep = verifyCovering(widened, symbolBound, 256);
    const bool reaches =
        lambda * std::exp(c) * (1.0 - rep.maxAnnulusRatio) > std::hypot(c, yTop);
    if (!(rep.horizontalPass && rep.crossingsPass && rep.maxAnnulusRatio < 2e-2 && reaches))
        throw ConvergenceError("effectiveC: sampled covering check failed at the candidate");
    return c;
}

}  // namespace bouquet
