#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "bouquet/family.hpp"
#include "bouquet/util.hpp"

namespace bouquet {

// Constants of the plane partition
//
//   P(nu):  regular p-gon, facet distance nu, vertices (nu/cos(pi/p)) e^{(2k+1)i pi/p}
//   Q_k:    closed ray strips of half-width tau around the rays arg z = (2k+1) pi/p
//   T_j:    the p unbounded components of the complement, T_0 meeting the
//           positive real axis, T_{j+1} the clockwise rotation of T_j
//
// sigma and eta are the expansion bookkeeping constants; tau is pinned by the
// requirement e^{2 tau sin(pi/p)} >= 4 p eta, which makes the single-term
// domination inequality hold along the strip edges with exact equality in the
// worst direction. nu is calibrated by sampling (see makeRegionScheme), c is
// the truncation abscissa used by the trapezium modules.
struct RegionScheme {
    FamilyParams params;
    double sigma = 0.0;
    double eta = 0.0;
    double tau = 0.0;
    double nu = 0.0;
    double c = 0.0;
    double safety = 0.0;

    int p() const { return params.p(); }
    double alpha() const { return kPi / params.p(); }
};

struct SchemeOverrides {
    std::optional<double> sigma, eta, tau, nu, c, safety;
};

enum class RegionKind { Polygon, Strip, Sector, Boundary };

struct RegionLabel {
    RegionKind kind = RegionKind::Boundary;
    int index = 0;  // strip or sector index; 0 for Polygon/Boundary

    bool operator==(const RegionLabel&) const = default;
};

inline constexpr double kBoundaryTol = 1e-12;

namespace detail {

// Support function of the polygon: max_k Re(z e^{-2 pi i k/p}); the polygon
// interior is where this stays below nu.
inline double polygonSupport(const FamilyParams& fam, Complex z) {
    double s = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < fam.p(); ++k) {
        s = std::max(s, (std::conj(fam.omega(k)) * z).real());
    }
    return s;
}

inline Complex stripFrame(const FamilyParams& fam, int k, Complex z) {
    // Rotate so the strip's central ray lies on the positive real axis.
    const double a = (2 * k + 1) * kPi / fam.p();
    return z * std::polar(1.0, -a);
}

}  // namespace detail

// min over k >= 1 of Re z - Re(w_k z) - log(4 p eta): positive means the
// leading exponential beats every rotated term by the required factor at z.
inline double singleTermMargin(const RegionScheme& s, Complex z) {
    const double bar = std::log(4.0 * s.p() * s.eta);
    double m = std::numeric_limits<double>::infinity();
    for (int k = 1; k < s.p(); ++k) {
        m = std::min(m, z.real() - (s.params.omega(k) * z).real() - bar);
    }
    return m;
}

namespace detail {

// Sample points of the closure of T_0(nu): the exposed part of the polygon
// facet x = nu, the two bounding strip edges, and a coarse interior mesh.
inline std::vector<Complex> sampleT0(const RegionScheme& s, int nBoundary, int nMesh) {
    std::vector<Complex> pts;
    const double a = s.alpha();
    const double facetHalf = s.nu * std::tan(a) - s.tau / std::cos(a);
    if (facetHalf > 0.0) {
        for (int i = 0; i <= nBoundary; ++i) {
            const double y = -facetHalf + 2.0 * facetHalf * i / nBoundary;
            pts.emplace_back(s.nu, y);
        }
    }
    // Lower edge of Q_0 and upper edge of Q_{p-1}, from the facet out to ~6 nu.
    const double t0 = (s.nu - s.tau * std::sin(a)) / std::cos(a);
    for (int i = 0; i <= nBoundary; ++i) {
        const double t = t0 + (6.0 * s.nu - t0) * i / nBoundary;
        pts.push_back(Complex(t, -s.tau) * std::polar(1.0, a));
        pts.push_back(Complex(t, s.tau) * std::polar(1.0, -a));
    }
    // Interior mesh: x in [nu, 5 nu], y across the sector, skipping strip points.
    const int side = std::max(4, static_cast<int>(std::sqrt(double(nMesh))));
    for (int i = 0; i <= side; ++i) {
        const double x = s.nu + (4.0 * s.nu) * i / side;
        for (int j = 0; j <= side; ++j) {
            const double y = -x * std::tan(a) + 2.0 * x * std::tan(a) * j / side;
            const Complex z(x, y);
            bool inStrip = false;
            for (int k : {0, s.p() - 1}) {
                const Complex w = stripFrame(s.params, k, z);
                if (w.real() > 0.0 && std::abs(w.imag()) < s.tau) inStrip = true;
            }
            if (!inStrip && polygonSupport(s.params, z) >= s.nu) pts.push_back(z);
        }
    }
    return pts;
}

}  // namespace detail

// Worst single-term margin over sampled closure of T_0(nu). With tau at its
// formula value the infimum is exactly 0 (attained along the strip edges), so
// callers should treat anything >= -1e-9 as a pass.
inline double minSingleTermMargin(const RegionScheme& s, int nBoundary = 256, int nMesh = 400) {
    double m = std::numeric_limits<double>::infinity();
    for (const Complex& z : detail::sampleT0(s, nBoundary, nMesh)) {
        m = std::min(m, singleTermMargin(s, z));
    }
    return m;
}

// Build a validated scheme. Defaults: sigma = 1/16, eta = safety * 4 / sigma,
// tau at its formula value, nu found by a doubling-then-bisection search on
// the sampled single-term inequality (times safety), c at least
// safety * tau / sin(pi/p).
inline RegionScheme makeRegionScheme(const FamilyParams& params,
                                     const SchemeOverrides& ov = {}) {
    RegionScheme s{params};
    const int p = params.p();
    const double alpha = kPi / p;

    s.safety = ov.safety.value_or(1.05);
    if (!(s.safety >= 1.0)) throw InvariantError("RegionScheme: safety must be >= 1");

    s.sigma = ov.sigma.value_or(1.0 / 16.0);
    if (!(s.sigma > 0.0 && s.sigma < 1.0 / (8.0 * std::sqrt(2.0))))
        throw InvariantError("RegionScheme: need 0 < sigma < 1/(8 sqrt 2)");

    s.eta = ov.eta.value_or(s.safety * 4.0 / s.sigma);
    if (!(s.eta > 4.0 / s.sigma)) throw InvariantError("RegionScheme: need eta > 4/sigma");

    const double tauFormula = std::log(4.0 * p * s.eta) / (2.0 * std::sin(alpha));
    s.tau = ov.tau.value_or(tauFormula);
    if (s.tau < tauFormula * (1.0 - 1e-12))
        throw InvariantError("RegionScheme: tau below its formula bound " +
                             formatDouble(tauFormula));

    // nu: the strips must leave part of the polygon facet exposed, which
    // requires nu > tau / sin(alpha); below that the search predicate fails.
    const double nuFloor = s.tau / std::sin(alpha) * (1.0 + 1e-9);
    if (ov.nu) {
        s.nu = *ov.nu;
        if (!(s.nu >= nuFloor))
            throw InvariantError("RegionScheme: nu leaves no exposed facet (needs > " +
                                 formatDouble(nuFloor) + ")");
    } else {
        auto passes = [&](double nu) {
            if (nu < nuFloor) return false;
            RegionScheme trial = s;
            trial.nu = nu;
            return minSingleTermMargin(trial, 64, 100) >= -1e-9;
        };
        double hi = s.tau * p;
        while (!passes(hi) && hi < 1e6) hi *= 2.0;
        if (!passes(hi)) throw InvariantError("RegionScheme: nu search failed");
        double lo = std::max(nuFloor, hi / 2.0);
        // Bisect to 1% on the passing threshold; lo may itself pass, in which
        // case the search settles at the degeneracy floor.
        for (int it = 0; it < 60 && (hi - lo) > 0.01 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (passes(mid) ? hi : lo) = mid;
        }
        s.nu = hi * s.safety;
    }

    const double cFloor = s.safety * s.tau / std::sin(alpha);
    s.c = std::max(cFloor, ov.c.value_or(0.0));
    return s;
}

// Region label of a point: polygon first, then strips, then the sector by
// angle. Within kBoundaryTol of a polygon facet or strip edge -> Boundary.
inline RegionLabel classifyPoint(const RegionScheme& s, Complex z) {
    const double sup = detail::polygonSupport(s.params, z);
    if (std::abs(sup - s.nu) <= kBoundaryTol) return {RegionKind::Boundary, 0};
    if (sup < s.nu) return {RegionKind::Polygon, 0};
    for (int k = 0; k < s.p(); ++k) {
        const Complex w = detail::stripFrame(s.params, k, z);
        if (w.real() <= 0.0) continue;
        const double d = std::abs(w.imag());
        if (std::abs(d - s.tau) <= kBoundaryTol) return {RegionKind::Boundary, 0};
        if (d < s.tau) return {RegionKind::Strip, k};
    }
    // Sector: T_j is centered on direction -2 pi j / p (clockwise labels).
    const double frac = -std::arg(z) * s.p() / kTwoPi;
    int j = static_cast<int>(std::lround(frac)) % s.p();
    if (j < 0) j += s.p();
    return {RegionKind::Sector, j};
}

// Index of the horizontal strip R(k) = {(2k-1) pi < Im z < (2k+1) pi};
// nullopt within kBoundaryTol of a boundary line.
inline std::optional<int> stripIndex(Complex z, double tol = kBoundaryTol) {
    const double y = z.imag();
    const double k = std::floor((y + kPi) / kTwoPi);
    const double nearestOdd = (2.0 * std::round((y - kPi) / kTwoPi) + 1.0) * kPi;
    if (std::abs(y - nearestOdd) <= tol) return std::nullopt;
    return static_cast<int>(k);
}

// Zero-bracketing rectangle around the ray V_0: bounded by the perpendicular
// lines C_m, C_{m+1} (C_m crosses V_0 at height m pi) and the two horizontal
// translates of V_0 by +-tau/cos(pi/p). Counterclockwise vertex order.
inline std::array<Complex, 4> dRectangle(const RegionScheme& s, int m) {
    if (m < 1) throw InvariantError("dRectangle: m must be >= 1");
    const double a = s.alpha();
    const double h = s.tau / std::cos(a);
    auto corner = [&](int mm, double shift) {
        const double x = mm * kPi / std::tan(a) + shift * std::sin(a) * std::sin(a);
        const double y = mm * kPi - shift * std::sin(a) * std::cos(a);
        return Complex(x, y);
    };
    return {corner(m, h), corner(m + 1, h), corner(m + 1, -h), corner(m, -h)};
}

// Truncated trapezium T_{m,c}: slab (2m-1)pi <= y <= (2m+1)pi between the ray
// line through the origin and x = c. Negative m is the reflection in the real
// axis. Vertices counterclockwise.
struct TrapeziumSpec {
    int m = 0;
    double c = 0.0;
    std::array<Complex, 4> vertices{};

    // Side from vertex i to vertex i+1 (mod 4).
    std::pair<Complex, Complex> side(int i) const {
        return {vertices[static_cast<std::size_t>(i % 4)],
                vertices[static_cast<std::size_t>((i + 1) % 4)]};
    }
};

inline TrapeziumSpec trapezium(const RegionScheme& s, int m, std::optional<double> cOpt = {}) {
    if (m == 0) throw InvariantError("trapezium: m = 0 is not part of the ladder");
    const double c = cOpt.value_or(s.c);
    const double cot = 1.0 / std::tan(s.alpha());
    const int am = std::abs(m);
    if (c <= (2 * am + 1) * kPi * cot)
        throw InvariantError("trapezium: c too small, right edge x = " + formatDouble(c) +
                             " does not clear the ray line");
    TrapeziumSpec t;
    t.m = m;
    t.c = c;
    const double yLo = (2 * am - 1) * kPi;
    const double yHi = (2 * am + 1) * kPi;
    if (m > 0) {
        t.vertices = {Complex(yLo * cot, yLo), Complex(c, yLo), Complex(c, yHi),
                      Complex(yHi * cot, yHi)};
    } else {
        t.vertices = {Complex(yHi * cot, -yHi), Complex(c, -yHi), Complex(c, -yLo),
                      Complex(yLo * cot, -yLo)};
    }
    return t;
}

// Inclusive membership with an absolute slack on each edge's half-plane.
inline bool trapeziumContains(const TrapeziumSpec& t, Complex z, double tol = kBoundaryTol) {
    for (int i = 0; i < 4; ++i) {
        const auto [a, b] = t.side(i);
        const Complex e = b - a;
        const double cross = e.real() * (z.imag() - a.imag()) - e.imag() * (z.real() - a.real());
        if (cross < -tol * (1.0 + std::abs(e))) return false;
    }
    return true;
}

// Half-strip H_{m,c}: the part of R(m)'s closure right of x = c.
inline bool halfStripContains(int m, double c, Complex z, double tol = kBoundaryTol) {
    return z.real() >= c - tol && std::abs(z.imag() - 2.0 * kPi * m) <= kPi + tol;
}

// Largest eps in a coarse grid such that log |f(z)| > max(eps * nu, log M(eps |z|))
// for every sampled z in T_0(nu). The costly exact max-modulus evaluation is
// reserved for samples where the cheap bound log M(r) <= r + log p is not
// already decisive.
inline double calibrateEpsilonHat(const RegionScheme& s, int nBoundary = 96, int nMesh = 144) {
    const auto pts = detail::sampleT0(s, nBoundary, nMesh);
    const double logP = std::log(static_cast<double>(s.p()));
    double best = 0.0;
    for (int g = 1; g <= 19; ++g) {
        const double eps = 0.05 * g;
        bool ok = true;
        for (const Complex& z : pts) {
            const double lf = evalFLog(s.params, z).logMod;
            if (lf <= eps * s.nu) {
                ok = false;
                break;
            }
            const double r = eps * std::abs(z);
            if (lf > r + logP) continue;  // beats even the upper bound on M
            if (lf <= logMaxModulus(s.params, r, 1e-9, 512)) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
        best = eps;
    }
    return best;
}

// Sampled check of the expansion inequalities on T_0(nu): |f'| > 2,
// |z f'/f| > 2, and the lower bound |f| > max(e^{epsHat nu}, M(epsHat |z|)).
struct ExpansionReport {
    double minAbsFPrime = 0.0;     // min sampled |f'(z)|
    double minAbsZRatio = 0.0;     // min sampled |z f'(z)/f(z)|
    double epsHat = 0.0;           // calibrated exponent for the lower bound
    bool derivativePass = false;
    bool ratioPass = false;
    bool lowerBoundPass = false;

    bool pass() const { return derivativePass && ratioPass && lowerBoundPass; }
};

inline ExpansionReport checkExpansion(const RegionScheme& s, int nBoundary = 128,
                                      int nMesh = 256) {
    ExpansionReport rep;
    rep.epsHat = calibrateEpsilonHat(s, nBoundary, nMesh);
    rep.minAbsFPrime = std::numeric_limits<double>::infinity();
    rep.minAbsZRatio = std::numeric_limits<double>::infinity();
    rep.lowerBoundPass = rep.epsHat > 0.0;
    const double logP = std::log(static_cast<double>(s.p()));
    for (const Complex& z : detail::sampleT0(s, nBoundary, nMesh)) {
        const LogComplex fp = evalFPrimeLog(s.params, z);
        const LogComplex f = evalFLog(s.params, z);
        // |f'| and |z f'/f| compared on the log scale to stay finite far out.
        rep.minAbsFPrime =
            std::min(rep.minAbsFPrime, fp.logMod > kMaxExp ? std::exp(kMaxExp) : std::exp(fp.logMod));
        const double logRatio = std::log(std::abs(z)) + fp.logMod - f.logMod;
        rep.minAbsZRatio = std::min(rep.minAbsZRatio, std::exp(std::min(logRatio, kMaxExp)));
        if (rep.lowerBoundPass && f.logMod <= rep.epsHat * s.nu) rep.lowerBoundPass = false;
        if (rep.lowerBoundPass) {
            const double r = rep.epsHat * std::abs(z);
            if (f.logMod <= r + logP &&
                f.logMod <= logMaxModulus(s.params, r, 1e-9, 512)) {
                rep.lowerBoundPass = false;
            }
        }
    }
    rep.derivativePass = rep.minAbsFPrime > 2.0;
    rep.ratioPass = rep.minAbsZRatio > 2.0;
    return rep;
}

}  // namespace bouquet
