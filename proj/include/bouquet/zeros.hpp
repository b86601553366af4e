#pragma once

// Zeros and critical points of the family on its symmetry rays, an
// argument-principle counting oracle, and the dominant-pair comparison that
// underpins the one-zero-per-rectangle picture.
//
// Everything works in the radial coordinate r along the ray through
// e^{i(2k+1)pi/p}.  Restricted to such a ray the sum collapses to a real
// function of r whose conjugate terms pair into 2 e^{a_k r} cos(b_k r);
// factoring out the dominant growth e^{r cos(pi/p)} leaves a bounded
// oscillation, so the pipeline stays finite for any representable r even
// where f itself overflows by thousands of orders of magnitude.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/family.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/util.hpp"

namespace bouquet {

// Scaled sample of the ray restriction and its first two radial derivatives.
// With a_k = cos((2k+1)pi/p), b_k = sin((2k+1)pi/p),
//   f(r e^{i pi/p}) = lambda [ 2 sum_{k<floor(p/2)} e^{a_k r} cos(b_k r)
//                              + (p odd) e^{-r} ],
// and each derivative in r advances the cosine phase by (2k+1)pi/p.  All
// three fields carry the factor e^{-a_0 r} / lambda, so Newton ratios are
// scale free and the stored numbers live in [-2p, 2p].
struct RayPoint {
    double f = 0.0;
    double df = 0.0;
    double d2f = 0.0;
    double logScale = 0.0;  // log lambda + r cos(pi/p)

    double value() const { return f * std::exp(logScale); }  // +-inf past overflow
};

inline RayPoint rayRestriction(const FamilyParams& fam, double r) {
    if (!(r >= 0.0)) throw InvariantError("rayRestriction: r must be >= 0");
    const int p = fam.p();
    const double a0 = std::cos(kPi / p);
    RayPoint out;
    for (int k = 0; k < p / 2; ++k) {
        const double theta = (2.0 * k + 1.0) * kPi / p;
        const double a = std::cos(theta);
        const double b = std::sin(theta);
        const double e = 2.0 * std::exp((a - a0) * r);
        out.f += e * std::cos(b * r);
        out.df += e * std::cos(b * r + theta);
        out.d2f += e * std::cos(b * r + 2.0 * theta);
    }
    if (p % 2 == 1) {
        // Unpaired direction at angle pi contributes e^{-r}; its derivatives
        // follow the same phase-advance rule with theta = pi.
        const double e = std::exp(-(1.0 + a0) * r);
        out.f += e;
        out.df -= e;
        out.d2f += e;
    }
    out.logScale = std::log(fam.lambda()) + a0 * r;
    return out;
}

struct ZeroRecord {
    int rayIndex = 0;
    int m = 0;          // rectangle index; Im z / sin-scaled bracket below
    double r = 0.0;     // radial coordinate on the ray
    Complex z;
    double residual = 0.0;   // |f(z)| / e^{Re z}, the scale-free residual
    double bracketLo = 0.0;  // y = r sin(pi/p) endpoints where the sign change
    double bracketHi = 0.0;  // was observed: m pi and (m+1) pi
};

namespace detail {

// Bracketed Newton: keeps a sign-change interval at all times and falls back
// to bisection whenever the Newton candidate leaves it, so the loop can
// neither escape nor stall.  eval returns (value, slope).
template <typename Eval>
inline double solveBracketed(Eval eval, double lo, double hi, double guess) {
    double signLo = eval(lo).first < 0.0 ? -1.0 : 1.0;
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const auto [fx, sx] = eval(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0 ? -1.0 : 1.0) == signLo) {
            lo = x;
        } else {
            hi = x;
        }
        double cand = x - fx / sx;
        if (!std::isfinite(cand) || cand <= lo || cand >= hi) cand = 0.5 * (lo + hi);
        if (std::abs(cand - x) < 1e-16 * std::max(1.0, std::abs(x))) return cand;
        if (hi - lo < 1e-16 * std::max(1.0, hi)) return 0.5 * (lo + hi);
        x = cand;
    }
    return x;
}

}  // namespace detail

// One zero per index m, bracketed by the observed sign change of the scaled
// restriction over y in (m pi, (m+1) pi) and polished from the asymptotic
// guess y = m pi + pi/2.  The restriction is the same real function on every
// ray; only the embedding direction changes.
inline std::vector<ZeroRecord> findZerosOnRay(const RegionScheme& s, int rayIndex,
                                              int mLo, int mHi) {
    const FamilyParams& fam = s.params;
    const int p = fam.p();
    if (rayIndex < 0 || rayIndex >= p)
        throw InvariantError("findZerosOnRay: ray index out of range");
    if (mLo < 1 || mHi < mLo)
        throw InvariantError("findZerosOnRay: need 1 <= mLo <= mHi");
    const double sinA = std::sin(kPi / p);
    const double rayAngle = (2.0 * rayIndex + 1.0) * kPi / p;
    auto eval = [&fam](double t) {
        const RayPoint q = rayRestriction(fam, t);
        return std::pair<double, double>(q.f, q.df);
    };
    std::vector<ZeroRecord> out;
    out.reserve(static_cast<std::size_t>(mHi - mLo + 1));
    for (int m = mLo; m <= mHi; ++m) {
        const double rLo = m * kPi / sinA;
        const double rHi = (m + 1) * kPi / sinA;
        if (!(eval(rLo).first * eval(rHi).first < 0.0))
            throw BracketError("findZerosOnRay: no sign change over the bracket for m=" +
                               std::to_string(m));
        const double guess = (m + 0.5) * kPi / sinA;
        const double r = detail::solveBracketed(eval, rLo, rHi, guess);
        ZeroRecord rec;
        rec.rayIndex = rayIndex;
        rec.m = m;
        rec.r = r;
        rec.z = std::polar(r, rayAngle);
        rec.residual = fam.lambda() * std::abs(rayRestriction(fam, r).f);
        rec.bracketLo = m * kPi;
        rec.bracketHi = (m + 1) * kPi;
        out.push_back(rec);
    }
    return out;
}

// Argument-principle count of zeros inside a closed polygonal contour.
// Phases come from the log-domain evaluator; adjacent samples are subdivided
// until every step turns by less than pi/2, which pins the branch of the
// accumulated argument.  A sample whose scale-free modulus drops below 1e-6
// means a zero sits essentially on the contour and the count is refused.
inline int countZerosWinding(const FamilyParams& fam, const std::vector<Complex>& contour,
                             int nSamples = 512) {
    if (contour.size() < 3)
        throw InvariantError("countZerosWinding: contour needs at least 3 vertices");
    if (nSamples < static_cast<int>(2 * contour.size()))
        nSamples = static_cast<int>(2 * contour.size());

    struct Walker {
        const FamilyParams& fam;
        double logLambda;

        LogComplex guarded(Complex z) const {
            const LogComplex v = evalFLog(fam, z);
            double top = z.real();
            for (int k = 1; k < fam.p(); ++k)
                top = std::max(top, (fam.omega(k) * z).real());
            if (v.logMod - logLambda - top < std::log(1e-6))
                throw ContourError("countZerosWinding: zero within tolerance of the contour");
            return v;
        }
        double step(Complex a, const LogComplex& va, Complex b, const LogComplex& vb,
                    int depth) const {
            const double d = normalizeAngle(vb.phase - va.phase);
            if (std::abs(d) < kPi / 2) return d;
            if (depth >= 48)
                throw ContourError("countZerosWinding: subdivision limit hit");
            const Complex mid = 0.5 * (a + b);
            const LogComplex vm = guarded(mid);
            return step(a, va, mid, vm, depth + 1) + step(mid, vm, b, vb, depth + 1);
        }
    };
    const Walker walker{fam, std::log(fam.lambda())};

    // Distribute the samples over the edges by length; each edge keeps its
    // starting vertex, so consecutive samples always share a straight edge
    // and subdivision midpoints stay on the contour.
    const std::size_t nv = contour.size();
    double perimeter = 0.0;
    for (std::size_t i = 0; i < nv; ++i)
        perimeter += std::abs(contour[(i + 1) % nv] - contour[i]);
    if (!(perimeter > 0.0))
        throw InvariantError("countZerosWinding: degenerate contour");
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(nSamples) + nv);
    for (std::size_t i = 0; i < nv; ++i) {
        const Complex a = contour[i];
        const Complex b = contour[(i + 1) % nv];
        const double len = std::abs(b - a);
        const int ns = std::max(2, static_cast<int>(std::lround(nSamples * len / perimeter)));
        for (int j = 0; j < ns; ++j)
            pts.push_back(a + (b - a) * (static_cast<double>(j) / ns));
    }
    std::vector<LogComplex> vals;
    vals.reserve(pts.size());
    for (const Complex& z : pts) vals.push_back(walker.guarded(z));

    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t j = (i + 1) % pts.size();
        total += walker.step(pts[i], vals[i], pts[j], vals[j], 0);
    }
    const double turns = total / kTwoPi;
    const long wind = std::lround(turns);
    if (std::abs(turns - wind) > 1e-3)
        throw ContourError("countZerosWinding: accumulated argument is not a whole turn");
    return static_cast<int>(wind);
}

// Dominant-pair comparison on the boundary of the m-th rectangle: with
// phi(z) = lambda (e^z + e^{omega^{p-1} z}) the remainder f - phi must stay
// strictly smaller than phi on the whole boundary for the rectangle to
// inherit phi's single zero.  Margins are reported scale free (divided by
// lambda e^{s}, s the larger of the two dominant exponents' real parts).
// The companion check samples the sector boundary region around direction 1
// and asks that the leading term alone outweigh the sum of all others.
struct RoucheReport {
    int m = 0;
    int nSamples = 0;
    double minMargin = 0.0;    // min over the rectangle boundary of (|phi| - |f - phi|) / (lambda e^s)
    bool boundaryPass = false;
    double t0MinMargin = 0.0;  // min over sector samples of 1 - sum_{k>=1} e^{Re((omega^k - 1) z)}
    bool t0Pass = false;

    bool pass() const { return boundaryPass && t0Pass; }
};

inline RoucheReport verifyRouche(const RegionScheme& s, int m, int nSamples = 2048) {
    const FamilyParams& fam = s.params;
    const int p = fam.p();
    RoucheReport rep;
    rep.m = m;
    rep.nSamples = nSamples;

    const std::array<Complex, 4> box = dRectangle(s, m);
    double perimeter = 0.0;
    for (int i = 0; i < 4; ++i) perimeter += std::abs(box[(i + 1) % 4] - box[i]);
    double minMargin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        const Complex a = box[i];
        const Complex b = box[(i + 1) % 4];
        const double len = std::abs(b - a);
        const int ns = std::max(2, static_cast<int>(std::lround(nSamples * len / perimeter)));
        for (int j = 0; j < ns; ++j) {
            const Complex z = a + (b - a) * (static_cast<double>(j) / ns);
            const Complex w0 = z;
            const Complex w1 = fam.omega(p - 1) * z;
            const double sref = std::max(w0.real(), w1.real());
            const Complex phi = std::exp(w0 - sref) + std::exp(w1 - sref);
            CompensatedComplexSum rest;
            for (int k = 1; k <= p - 2; ++k)
                rest.add(std::exp(fam.omega(k) * z - sref));
            minMargin = std::min(minMargin, std::abs(phi) - std::abs(rest.value()));
        }
    }
    rep.minMargin = minMargin;
    rep.boundaryPass = minMargin > 0.0;

    double t0Min = std::numeric_limits<double>::infinity();
    for (const Complex& z : detail::sampleT0(s, 256, 400)) {
        double sum = 0.0;
        for (int k = 1; k < p; ++k)
            sum += std::exp((fam.omega(k) * z).real() - z.real());
        t0Min = std::min(t0Min, 1.0 - sum);
    }
    rep.t0MinMargin = t0Min;
    rep.t0Pass = t0Min >= 0.0;
    return rep;
}

// Smallest m whose rectangle passes the comparison together with its
// successor.  The threshold exists abstractly for every scheme; this makes
// it concrete for the parameters at hand.
inline int calibrateMHat(const RegionScheme& s, int nSamples = 2048, int mMax = 64) {
    bool prev = verifyRouche(s, 1, nSamples).pass();
    for (int m = 1; m < mMax; ++m) {
        const bool next = verifyRouche(s, m + 1, nSamples).pass();
        if (prev && next) return m;
        prev = next;
    }
    throw ConvergenceError("calibrateMHat: no passing pair of rectangles below the cap");
}

struct CriticalRecord {
    int rayIndex = 0;
    int mLo = 0;  // rectangle indices of the bracketing zeros (mHi = mLo + 1)
    int mHi = 0;
    double r = 0.0;
    Complex z;
    double scaledValue = 0.0;  // f(z) / e^{Re z}; bounded, sign alternates along the ray
    double logScale = 0.0;     // Re z, so f(z) = scaledValue * e^{logScale}

    double value() const { return scaledValue * std::exp(logScale); }  // +-inf past overflow
};

// Exactly one critical point between consecutive zeros, located by a sign
// change of the restricted derivative.  A scan first isolates the change;
// seeing more than one at coarse resolution triggers a finer scan before
// anything is reported.
inline std::vector<CriticalRecord> findCriticalPointsOnRay(
        const RegionScheme& s, int rayIndex, const std::vector<ZeroRecord>& zeros) {
    const FamilyParams& fam = s.params;
    if (zeros.size() < 2)
        throw InvariantError("findCriticalPointsOnRay: need at least two zeros");
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        if (zeros[i].rayIndex != rayIndex)
            throw InvariantError("findCriticalPointsOnRay: zero list is from another ray");
        if (i > 0 && zeros[i].m != zeros[i - 1].m + 1)
            throw InvariantError("findCriticalPointsOnRay: zero list must be consecutive in m");
    }
    const double rayAngle = (2.0 * rayIndex + 1.0) * kPi / fam.p();
    auto eval = [&fam](double t) {
        const RayPoint q = rayRestriction(fam, t);
        return std::pair<double, double>(q.df, q.d2f);
    };
    std::vector<CriticalRecord> out;
    out.reserve(zeros.size() - 1);
    for (std::size_t i = 0; i + 1 < zeros.size(); ++i) {
        const double lo = zeros[i].r;
        const double hi = zeros[i + 1].r;
        double subLo = 0.0, subHi = 0.0;
        int changes = 0;
        for (int nScan : {64, 1024}) {
            changes = 0;
            double prevT = lo;
            double prevV = eval(lo).first;
            for (int j = 1; j <= nScan; ++j) {
                const double t = lo + (hi - lo) * j / nScan;
                const double v = eval(t).first;
                if (prevV * v < 0.0 || v == 0.0) {
                    ++changes;
                    subLo = prevT;
                    subHi = t;
                }
                prevT = t;
                prevV = v;
            }
            if (changes == 1) break;
        }
        if (changes == 0)
            throw BracketError("findCriticalPointsOnRay: no derivative sign change between zeros m=" +
                               std::to_string(zeros[i].m) + " and m=" + std::to_string(zeros[i + 1].m));
        if (changes > 1)
            throw ConvergenceError("findCriticalPointsOnRay: multiple derivative sign changes persist");
        const double r = detail::solveBracketed(eval, subLo, subHi, 0.5 * (subLo + subHi));
        const RayPoint q = rayRestriction(fam, r);
        CriticalRecord rec;
        rec.rayIndex = rayIndex;
        rec.mLo = zeros[i].m;
        rec.mHi = zeros[i + 1].m;
        rec.r = r;
        rec.z = std::polar(r, rayAngle);
        rec.scaledValue = fam.lambda() * q.f;
        rec.logScale = std::cos(kPi / fam.p()) * r;
        out.push_back(rec);
    }
    return out;
}

// One row per record, zeros and critical points interleaved by (ray_index, r)
// so the alternation is visible in the file itself.  Columns are fixed:
//   ray_index, m, r, re, im, residual, critical_value
// with residual blank on critical rows and critical_value blank on zero rows;
// critical_value carries the scale-free f(z) / e^{Re z}.
inline void writeRecordsCsv(std::ostream& os, const std::vector<ZeroRecord>& zeros,
                            const std::vector<CriticalRecord>& criticals) {
    struct Row {
        int ray;
        double r;
        std::string line;
    };
    std::vector<Row> rows;
    rows.reserve(zeros.size() + criticals.size());
    for (const ZeroRecord& zr : zeros) {
        rows.push_back({zr.rayIndex, zr.r,
                        std::to_string(zr.rayIndex) + "," + std::to_string(zr.m) + "," +
                            formatDouble(zr.r) + "," + formatDouble(zr.z.real()) + "," +
                            formatDouble(zr.z.imag()) + "," + formatDouble(zr.residual) + ","});
    }
    for (const CriticalRecord& cr : criticals) {
        rows.push_back({cr.rayIndex, cr.r,
                        std::to_string(cr.rayIndex) + "," + std::to_string(cr.mLo) + "," +
                            formatDouble(cr.r) + "," + formatDouble(cr.z.real()) + "," +
                            formatDouble(cr.z.imag()) + ",," + formatDouble(cr.scaledValue)});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.ray != b.ray ? a.ray < b.ray : a.r < b.r;
    });
    os << "ray_index,m,r,re,im,residual,critical_value\n";
    for (const Row& row : rows) os << row.line << "\n";
    if (!os) throw IoError("writeRecordsCsv: stream write failed");
}

}  // namespace bouquet
