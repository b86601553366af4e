#pragma once

// Hair curves of the exponential-sum bouquet. A hair with bounded address
// s = (s_0, s_1, ...) is the limit of the depth-n compositions
//   G^n_s(t) = L_{s_0} o ... o L_{s_{n-1}} (E^n(t)),   E(t) = e^{t-1},
// parametrized by t >= 1. The tower E^n(t) explodes past double range after
// a handful of stages, so the innermost applications are taken in closed
// form: once E^k(t) clears a scheme-dependent threshold, the branch value
// collapses to the plain logarithm shifted into the stage's strip,
//   L_{s_k}(E^{k+1}(t) ...) = (E^k(t) - 1) - log(lambda) + 2 pi i s_k,
// exact to below one ulp because the secondary exponentials decay like
// e^{-(1-cos(2pi/p)) x} and the next stage divides the argument error by
// E^{k+1}(t). Only the stages beneath the collapse are solved numerically,
// and their branch targets never fall below the periodic-point range.
//
// The t = 1 endpoint is not reachable through the tower (E fixes 1, and the
// parabolic escape from 1+u needs about 2/u stages), so it comes from the
// cycle solver instead: the endpoint of a periodic address is its periodic
// point, pulled back through any preperiod digits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "bouquet/family.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/symbolic.hpp"
#include "bouquet/util.hpp"

namespace bouquet {

// Parameter map driving the tower; fixed at t = 1, increasing for t > 1.
inline double eMap(double t) {
    if (!(t >= 1.0)) throw InvariantError("eMap: t must be >= 1");
    return std::exp(t - 1.0);
}

// E^n(t), or a log-domain marker once the tower leaves double range. A
// marker with level L carries the last representable stage; the full value
// is recovered conceptually through log E^{k+1}(t) = E^k(t) - 1, applied L
// times.
struct ETower {
    double mantissa = 1.0;
    int level = 0;

    bool isMarker() const { return level > 0; }
};

inline ETower eIter(double t, int n) {
    if (!(t >= 1.0)) throw InvariantError("eIter: t must be >= 1");
    if (n < 0) throw InvariantError("eIter: n must be >= 0");
    ETower out{t, 0};
    for (int k = 0; k < n; ++k) {
        if (out.mantissa - 1.0 > kMaxExp) {
            out.level = n - k;
            return out;
        }
        out.mantissa = std::exp(out.mantissa - 1.0);
    }
    return out;
}

namespace detail {

// Infinite address read off an itinerary spec: preperiod digits first, then
// the period repeated forever.
inline int hairSymbolAt(const ItinerarySpec& addr, std::size_t k) {
    if (k < addr.preperiod.size()) return addr.preperiod[k];
    return addr.period[(k - addr.preperiod.size()) % addr.period.size()];
}

inline int maxAbsSymbol(const ItinerarySpec& addr) {
    int m = 1;
    for (int sym : addr.preperiod) m = std::max(m, std::abs(sym));
    for (int sym : addr.period) m = std::max(m, std::abs(sym));
    return m;
}

}  // namespace detail

// Real part beyond which the collapsed branch value is exact to below one
// ulp: the secondary exponentials contribute at most
// (p-1) e^{-(1-cos(2pi/p)) x + sin(2pi/p)(2K+1)pi} at |Im| <= (2K+1)pi, and
// the target here is 1e-18 with a five-unit margin on top.
inline double collapseThreshold(const RegionScheme& s, int symbolBound) {
    const double beta = 2.0 * s.alpha();
    const double logLambda = std::log(s.params.lambda());
    const double num = std::sin(beta) * (2.0 * symbolBound + 1.0) * kPi +
                       std::log((s.p() - 1.0) / 1e-18) + std::abs(logLambda);
    return num / (1.0 - std::cos(beta)) + 5.0;
}

// Endpoint z(s): the cycle point of the repeating part pulled back through
// the preperiod digits.
inline Complex hairEndpoint(const RegionScheme& s, const ItinerarySpec& addr,
                            double tol = 1e-10) {
    addr.validate();
    Complex z = periodicPoint(s, addr.period, tol, addr.bound).z;
    for (std::size_t k = addr.preperiod.size(); k-- > 0;)
        z = inverseBranch(s, z, addr.preperiod[k]);
    return z;
}

struct HairDiagnostics {
    int nUsed = 0;                   // composition depth at acceptance
    double cauchyGap = 0.0;          // tail gap bound at that depth
    double droppedCorrection = 0.0;  // secondary-exponential bound at the collapse
    int collapseLevel = 0;           // tower stage where the closed form took over
    std::vector<double> gaps;        // |G^{n+1} - G^n| for computable shallow depths
};

struct HairPointResult {
    Complex z;
    HairDiagnostics diag;
};

inline HairPointResult hairPoint(const RegionScheme& s, const ItinerarySpec& addr, double t,
                                 double tol = 1e-10) {
    addr.validate();
    if (!(t >= 1.0)) throw InvariantError("hairPoint: t must be >= 1");
    if (!(tol > 0.0)) throw InvariantError("hairPoint: tol must be positive");

    if (t == 1.0) {
        HairPointResult out;
        out.z = hairEndpoint(s, addr, std::min(tol, 1e-10));
        return out;
    }

    const double logLambda = std::log(s.params.lambda());
    const int maxSym = detail::maxAbsSymbol(addr);
    const double xc = collapseThreshold(s, maxSym);

    // Tower stages below the collapse threshold. The budget keeps the total
    // composition depth at 24; the parabolic crawl away from t = 1 exhausts
    // it for t - 1 below roughly 0.1.
    std::vector<double> tower{t};
    while (tower.back() < xc) {
        if (tower.size() > 22)
            throw ConvergenceError(
                "hairPoint: tower does not ignite within the level budget (t too close to 1)");
        tower.push_back(std::exp(tower.back() - 1.0));
    }
    const int kc = static_cast<int>(tower.size()) - 1;

    HairDiagnostics diag;
    diag.collapseLevel = kc;
    const double beta = 2.0 * s.alpha();
    diag.droppedCorrection =
        (s.p() - 1.0) * std::exp(-(1.0 - std::cos(beta)) * (tower[kc] - 1.0 - logLambda) +
                                 std::sin(beta) * (2.0 * maxSym + 1.0) * kPi);

    auto descend = [&](Complex w, int fromLevel) {
        for (int k = fromLevel; k-- > 0;) w = inverseBranch(s, w, detail::hairSymbolAt(addr, k));
        return w;
    };

    Complex zMain;
    if (kc == 0) {
        zMain = Complex(t - 1.0 - logLambda, kTwoPi * detail::hairSymbolAt(addr, 0));
    } else {
        Complex wTop(tower[kc] - 1.0 - logLambda, kTwoPi * detail::hairSymbolAt(addr, kc));
        zMain = descend(wTop, kc);
    }

    // Shallow approximants feed the raw tower value to the innermost branch;
    // they only serve the recorded Cauchy tail, so a failed branch solve at
    // a tiny modulus drops that depth rather than the hair point.
    Complex prev;
    bool havePrev = false;
    for (int n = 1; n <= kc; ++n) {
        if (tower[n] < 2.5) continue;
        Complex g;
        try {
            g = descend(Complex(tower[n], 0.0), n);
        } catch (const std::runtime_error&) {
            continue;
        }
        if (havePrev) diag.gaps.push_back(std::abs(g - prev));
        prev = g;
        havePrev = true;
    }
    if (havePrev) diag.gaps.push_back(std::abs(zMain - prev));

    // One more stage would contract the tail by |L'| ~ 1/E^{kc+1}(t); that
    // factor certifies the collapsed value against any sane tolerance.
    const double seed = 1.0 + std::abs(logLambda) + kTwoPi * maxSym;
    const double tail = diag.gaps.empty() ? seed : diag.gaps.back();
    diag.cauchyGap = tail * std::exp(-(tower[kc] - 1.0));
    diag.nUsed = kc + 2;
    if (!(diag.cauchyGap < tol))
        throw ConvergenceError("hairPoint: Cauchy tail above tolerance at the level budget");
    return {zMain, diag};
}

struct HairSample {
    double t = 1.0;
    Complex z;
    int nUsed = 0;
    double cauchyGap = 0.0;
};

struct HairCurve {
    ItinerarySpec itinerary;
    std::vector<HairSample> samples;  // t strictly increasing; samples[0].t == 1
    Complex endpoint;
};

// Polyline along one hair: the exact t = 1 endpoint row, then a grid
// geometric in t - 1 from just above the endpoint out to tMax, densified
// wherever consecutive points are farther apart than maxStep. Refinement
// floors at a relative t-gap so the slow region near the endpoint cannot
// absorb the whole budget.
inline HairCurve traceHair(const RegionScheme& s, const ItinerarySpec& addr, double tMax,
                           int nSamples, double tol = 1e-10, double maxStep = 0.5) {
    addr.validate();
    if (nSamples < 3) throw InvariantError("traceHair: need at least 3 samples");
    if (!(maxStep > 0.0)) throw InvariantError("traceHair: maxStep must be positive");
    const double tFloor = 1.12;  // tower ignition within the level budget
    if (!(tMax > tFloor))
        throw InvariantError("traceHair: tMax must exceed 1.12 (level budget near the endpoint)");

    HairCurve curve;
    curve.itinerary = addr;
    curve.endpoint = hairEndpoint(s, addr, std::min(tol, 1e-10));

    const double d0 = tFloor - 1.0;
    const double span = tMax - 1.0;
    const int nGeo = nSamples - 1;
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(nGeo));
    for (int i = 0; i < nGeo; ++i)
        ts.push_back(1.0 + d0 * std::pow(span / d0, double(i) / (nGeo - 1)));
    ts.back() = tMax;

    auto evalAt = [&](double t) {
        HairPointResult r = hairPoint(s, addr, t, tol);
        return HairSample{t, r.z, r.diag.nUsed, r.diag.cauchyGap};
    };

    std::vector<HairSample> grid;
    grid.reserve(ts.size());
    for (double t : ts) grid.push_back(evalAt(t));

    const std::size_t hardCap = static_cast<std::size_t>(4 * nSamples + 64);
    for (std::size_t i = 0; i + 1 < grid.size() && grid.size() < hardCap;) {
        const double ta = grid[i].t;
        const double tb = grid[i + 1].t;
        // The curve moves at |dz/dt| ~ 1 once the tower carries it, so a
        // t-gap floor of a fraction of maxStep suffices; it tightens further
        // near the endpoint only to stay proportionate there.
        const double gapFloor = std::max(1e-9, std::min(0.05 * (ta - 1.0), 0.2 * maxStep));
        if (std::abs(grid[i + 1].z - grid[i].z) > maxStep && tb - ta > gapFloor) {
            const double tm = 1.0 + std::sqrt((ta - 1.0) * (tb - 1.0));
            if (tm <= ta || tm >= tb) {
                ++i;
                continue;
            }
            grid.insert(grid.begin() + static_cast<std::ptrdiff_t>(i) + 1, evalAt(tm));
        } else {
            ++i;
        }
    }

    curve.samples.push_back({1.0, curve.endpoint, 0, 0.0});
    curve.samples.insert(curve.samples.end(), grid.begin(), grid.end());
    return curve;
}

struct HairCalibration {
    double qHat = 0.0;
    double mHat = 0.0;
    double maxDeviation = 0.0;  // sup |Re h_s(t) - t| before the safety factor
    int nProbes = 0;
};

// Empirical constants for the real-part band t - M <= Re h_s(t) <= t + M:
// probe every ordered symbol pair within the bound across t in [5, 40], set
// mHat to 1.2 times the worst deviation, and qHat to the first probe t from
// which the band holds onward.
inline HairCalibration calibrateHairBounds(const RegionScheme& s, int symbolBound) {
    if (symbolBound < 1) throw InvariantError("calibrateHairBounds: symbolBound must be >= 1");
    const double tProbes[] = {5.0, 7.0, 10.0, 14.0, 20.0, 28.0, 40.0};
    const int nT = static_cast<int>(sizeof(tProbes) / sizeof(tProbes[0]));

    std::vector<ItinerarySpec> addrs;
    for (int a = -symbolBound; a <= symbolBound; ++a) {
        if (a == 0) continue;
        for (int b = -symbolBound; b <= symbolBound; ++b) {
            if (b == 0) continue;
            ItinerarySpec addr;
            addr.period = {a, b};
            addr.bound = symbolBound;
            addrs.push_back(addr);
        }
    }

    HairCalibration cal;
    std::vector<double> worstAt(static_cast<std::size_t>(nT), 0.0);
    for (const ItinerarySpec& addr : addrs)
        for (int i = 0; i < nT; ++i) {
            const double dev = std::abs(hairPoint(s, addr, tProbes[i]).z.real() - tProbes[i]);
            worstAt[static_cast<std::size_t>(i)] = std::max(worstAt[static_cast<std::size_t>(i)], dev);
            cal.maxDeviation = std::max(cal.maxDeviation, dev);
            ++cal.nProbes;
        }
    cal.mHat = 1.2 * cal.maxDeviation;
    cal.qHat = tProbes[0];
    for (int i = nT; i-- > 0;) {
        if (worstAt[static_cast<std::size_t>(i)] > cal.mHat) break;
        cal.qHat = tProbes[i];
    }
    return cal;
}

struct HairPropertyReport {
    double endpointGap = 0.0;  // curve endpoint vs an independent cycle solve
    bool endpointOk = false;
    int digitsAvailable = 0;  // forward digits before double range runs out
    int digitsMatched = 0;
    bool digitsOk = false;
    double semiconjugacyMaxRel = 0.0;  // |f(h_s(t)) - h_{sigma s}(E t)| scaled
    int semiconjugacyChecks = 0;
    bool semiconjugacyOk = false;
    bool reChainIncreasingOk = false;  // Re along the forward tower chain
    double reAtTMax = 0.0;
    int monotoneViolations = 0;  // sample pairs beyond qHat+1 breaking the 2 mHat band
    bool bandOk = false;         // t - mHat <= Re <= t + mHat for samples past qHat+1
    bool imagConfinementOk = false;  // |Im z - 2 pi s0| < pi + 1e-6 everywhere
    bool containmentOk = false;      // closure of the s0 strip holds every sample
    double orbitMaxModulus = 0.0;    // shift-cycled endpoint orbit
    double orbitMaxResidual = 0.0;   // relative one-step residuals along it
    bool orbitBoundedOk = false;
    bool pass = false;
};

// Numerical audit of the defining hair properties on a traced curve: the
// endpoint anchors to the cycle point, sampled points carry the address in
// their forward digits, one application of f advances the parameter by E,
// the real part respects the calibrated band past qHat+1, every sample stays
// in the closure of the leading strip, and the endpoint orbit stays bounded
// (checked by cycling the shift rather than iterating forward, since a
// repelling multiplier amplifies forward error past any fixed horizon).
inline HairPropertyReport verifyHairProperties(const RegionScheme& s, const HairCurve& curve,
                                               double qHat, double mHat, int digitHorizon = 6,
                                               int orbitSteps = 50) {
    if (curve.samples.empty()) throw InvariantError("verifyHairProperties: empty curve");
    const ItinerarySpec& addr = curve.itinerary;
    HairPropertyReport rep;

    rep.endpointGap = std::abs(curve.endpoint - hairEndpoint(s, addr));
    rep.endpointOk = rep.endpointGap <= 1e-8 && std::abs(curve.samples.front().z - curve.endpoint) == 0.0;

    // Forward digits are trustworthy only while the accumulated derivative
    // keeps the computed orbit within half a strip width of the true one;
    // past that the recorded digits are conditioning noise, not the hair's
    // address, so the comparison stops there.
    rep.digitsOk = true;
    for (const HairSample& smp : curve.samples) {
        int trusted = 0;
        {
            double amp = 1.0;
            Complex zj = smp.z;
            for (int k = 0; k < digitHorizon; ++k) {
                if (amp * 2e-15 * (1.0 + std::abs(smp.z)) > 0.5) break;
                ++trusted;
                if (zj.real() > 700.0) break;
                amp *= std::abs(evalFPrime(s.params, zj));
                zj = evalF(s.params, zj);
            }
        }
        if (trusted == 0) continue;
        const ItineraryResult itn = itineraryOf(s, smp.z, trusted, 1e100);
        const int available = std::min(trusted, static_cast<int>(itn.digits.size()));
        int matched = 0;
        for (int k = 0; k < available; ++k)
            if (itn.digits[static_cast<std::size_t>(k)] == detail::hairSymbolAt(addr, static_cast<std::size_t>(k)))
                ++matched;
            else
                break;
        if (matched < available) rep.digitsOk = false;
        if (available > rep.digitsAvailable) {
            rep.digitsAvailable = available;
            rep.digitsMatched = matched;
        }
    }
    rep.digitsOk = rep.digitsOk && rep.digitsAvailable >= 1;

    // Semiconjugacy f(h_s(t)) = h_{sigma s}(E(t)) at every sample, plus the
    // deeper tower chain from the sample nearest t = 2 while f stays inside
    // double range.
    const ItinerarySpec shifted = addr.shifted();
    double maxRel = 0.0;
    int checks = 0;
    for (const HairSample& smp : curve.samples) {
        if (smp.z.real() > 700.0 || smp.t - 1.0 > kMaxExp) continue;
        const Complex lhs = evalF(s.params, smp.z);
        const Complex rhs = hairPoint(s, shifted, eMap(smp.t)).z;
        maxRel = std::max(maxRel, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
        ++checks;
    }
    const HairSample* base = &curve.samples.front();
    for (const HairSample& smp : curve.samples)
        if (std::abs(smp.t - 2.0) < std::abs(base->t - 2.0)) base = &smp;
    {
        ItinerarySpec cursor = addr;
        double tk = base->t;
        Complex hk = base->z;
        std::vector<double> reChain{hk.real()};
        int chainSteps = 0;
        while (tk > 1.0 && tk - 1.0 <= kMaxExp && hk.real() <= 700.0 && ++chainSteps <= 40) {
            const double tNext = eMap(tk);
            const ItinerarySpec next = cursor.shifted();
            const Complex hNext = hairPoint(s, next, tNext).z;
            maxRel = std::max(maxRel,
                              std::abs(evalF(s.params, hk) - hNext) / (1.0 + std::abs(hNext)));
            ++checks;
            reChain.push_back(hNext.real());
            cursor = next;
            tk = tNext;
            hk = hNext;
        }
        rep.reChainIncreasingOk = true;
        for (std::size_t k = 2; k + 1 < reChain.size(); ++k)
            if (!(reChain[k + 1] > reChain[k] + 10.0)) rep.reChainIncreasingOk = false;
    }
    rep.semiconjugacyMaxRel = maxRel;
    rep.semiconjugacyChecks = checks;
    rep.semiconjugacyOk = maxRel <= 1e-6;

    // Real-part band and weak monotonicity past qHat + 1.
    rep.reAtTMax = curve.samples.back().z.real();
    rep.bandOk = true;
    for (const HairSample& smp : curve.samples)
        if (smp.t >= qHat + 1.0 &&
            !(smp.t - mHat <= smp.z.real() && smp.z.real() <= smp.t + mHat))
            rep.bandOk = false;
    for (std::size_t i = 0; i < curve.samples.size(); ++i)
        for (std::size_t j = i + 1; j < curve.samples.size(); ++j) {
            if (curve.samples[i].t < qHat + 1.0) continue;
            if (curve.samples[j].z.real() <= curve.samples[i].z.real() - 2.0 * mHat)
                ++rep.monotoneViolations;
        }

    // Strip confinement: the closure of R(s0).
    const double im0 = kTwoPi * detail::hairSymbolAt(addr, 0);
    rep.imagConfinementOk = true;
    for (const HairSample& smp : curve.samples)
        if (!(std::abs(smp.z.imag() - im0) < kPi + 1e-6)) rep.imagConfinementOk = false;
    rep.containmentOk = rep.imagConfinementOk;

    // Endpoint orbit via the shift: z(sigma^k s) cycles through finitely many
    // points; one-step residuals certify it is the forward orbit.
    {
        std::vector<Complex> pts;
        ItinerarySpec cursor = addr;
        const std::size_t distinct = addr.preperiod.size() + addr.period.size();
        for (std::size_t k = 0; k <= distinct; ++k) {
            pts.push_back(hairEndpoint(s, cursor));
            cursor = cursor.shifted();
        }
        auto orbitAt = [&](int k) {
            const std::size_t pre = addr.preperiod.size();
            if (static_cast<std::size_t>(k) < pre) return pts[static_cast<std::size_t>(k)];
            return pts[pre + (static_cast<std::size_t>(k) - pre) % addr.period.size()];
        };
        // Cycle points can sit near slant lines where the exponentials cancel,
        // so each residual is accepted against the larger of the relative
        // target and the evaluation noise floor at that point.
        bool residualsOk = true;
        for (int k = 0; k < orbitSteps; ++k) {
            const Complex zk = orbitAt(k);
            const Complex zNext = orbitAt(k + 1);
            rep.orbitMaxModulus = std::max(rep.orbitMaxModulus, std::abs(zk));
            const double resAbs = std::abs(evalF(s.params, zk) - zNext);
            rep.orbitMaxResidual =
                std::max(rep.orbitMaxResidual, resAbs / (1.0 + std::abs(zNext)));
            residualsOk = residualsOk &&
                          resAbs <= std::max(1e-8 * (1.0 + std::abs(zNext)),
                                             16.0 * detail::evalNoiseFloor(s.params, zk));
        }
        rep.orbitBoundedOk = rep.orbitMaxModulus <= 100.0 && residualsOk;
    }

    rep.pass = rep.endpointOk && rep.digitsOk && rep.semiconjugacyOk && rep.reChainIncreasingOk &&
               rep.bandOk && rep.monotoneViolations == 0 && rep.imagConfinementOk &&
               rep.orbitBoundedOk;
    return rep;
}

// Fixed columns: t, re, im, n_used, cauchy_gap. The t = 1 endpoint row
// carries n_used 0 and gap 0: it comes from the cycle solver, not the tower.
inline void writeHairCsv(std::ostream& os, const HairCurve& curve) {
    os << "t,re,im,n_used,cauchy_gap\n";
    for (const HairSample& smp : curve.samples)
        os << formatDouble(smp.t) << "," << formatDouble(smp.z.real()) << ","
           << formatDouble(smp.z.imag()) << "," << smp.nUsed << ","
           << formatDouble(smp.cauchyGap) << "\n";
    if (!os) throw IoError("writeHairCsv: stream write failed");
}

}  // namespace bouquet
