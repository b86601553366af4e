#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "bouquet/zeros.hpp"

using namespace bouquet;
using Catch::Approx;

TEST_CASE("ray restriction matches the complex evaluators") {
    for (int p : {3, 4, 5, 8}) {
        for (double lambda : {1.0, 0.35}) {
            const FamilyParams fam(p, lambda);
            const double alpha = kPi / p;
            for (double r : {0.3, 1.7, 5.0, 12.0, 40.0}) {
                const Complex z = std::polar(r, alpha);
                const Complex direct = evalF(fam, z);
                const RayPoint q = rayRestriction(fam, r);
                // Imaginary parts cancel only up to rounding in the largest
                // term, so tolerances are relative to the term scale.
                const double termScale = lambda * p * std::exp(r * std::cos(alpha));
                REQUIRE(std::abs(direct.imag()) <= 1e-10 * termScale);
                REQUIRE(q.value() ==
                        Approx(direct.real()).epsilon(1e-10).margin(1e-12 * termScale));
                // d/dr f(r e^{i alpha}) = e^{i alpha} f'(z), real on the ray.
                const Complex dir = std::polar(1.0, alpha) * evalFPrime(fam, z);
                REQUIRE(std::abs(dir.imag()) <= 1e-10 * termScale);
                REQUIRE(q.df * std::exp(q.logScale) ==
                        Approx(dir.real()).epsilon(1e-9).margin(1e-12 * termScale));
            }
            // Far past double overflow the log-domain evaluator is the oracle.
            const double r = 5000.0;
            const LogComplex big = evalFLog(fam, std::polar(r, alpha));
            const RayPoint q = rayRestriction(fam, r);
            REQUIRE(big.logMod == Approx(q.logScale + std::log(std::abs(q.f))).epsilon(1e-12));
            const double expectedPhase = q.f > 0.0 ? 0.0 : kPi;
            REQUIRE(std::abs(normalizeAngle(big.phase - expectedPhase)) < 1e-8);
        }
    }
}

TEST_CASE("ray restriction derivatives are consistent under finite differences") {
    const FamilyParams fam(5, 0.8);
    const double h = 1e-6;
    for (double r : {2.0, 9.3, 27.0, 113.0}) {
        const RayPoint lo = rayRestriction(fam, r - h);
        const RayPoint hi = rayRestriction(fam, r + h);
        const RayPoint mid = rayRestriction(fam, r);
        const double a0 = std::cos(kPi / 5);
        // The stored fields carry e^{-a0 r}, so the derivative of the scaled
        // value is df - a0 f, and of the scaled slope is d2f - a0 df.
        const double dScaled = (hi.f - lo.f) / (2.0 * h);
        REQUIRE(dScaled == Approx(mid.df - a0 * mid.f).margin(1e-7));
        const double dSlope = (hi.df - lo.df) / (2.0 * h);
        REQUIRE(dSlope == Approx(mid.d2f - a0 * mid.df).margin(1e-7));
    }
}

TEST_CASE("scaled restriction stays bounded for huge radii") {
    for (int p : {3, 7}) {
        const FamilyParams fam(p);
        for (double r = 0.0; r <= 5000.0; r += 13.7) {
            const RayPoint q = rayRestriction(fam, r);
            REQUIRE(std::isfinite(q.f));
            REQUIRE(std::abs(q.f) <= 2.0 * p + 1.0);
            REQUIRE(std::abs(q.df) <= 2.0 * p + 1.0);
            REQUIRE(std::abs(q.d2f) <= 2.0 * p + 1.0);
        }
    }
}

TEST_CASE("restriction sign alternates at multiples of pi along the ray") {
    const FamilyParams fam(3);
    const double sinA = std::sin(kPi / 3);
    for (int m = 1; m <= 300; ++m) {
        const double value = rayRestriction(fam, m * kPi / sinA).f;
        if (m % 2 == 0) {
            REQUIRE(value > 0.0);
        } else {
            REQUIRE(value < 0.0);
        }
    }
}

TEST_CASE("zeros are localized with tiny scale-free residuals") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const auto zeros = findZerosOnRay(s, 0, 1, 25);
    REQUIRE(zeros.size() == 25);
    const double sinA = std::sin(kPi / 3);
    for (const ZeroRecord& rec : zeros) {
        const double y = rec.r * sinA;
        REQUIRE(y > rec.bracketLo);
        REQUIRE(y < rec.bracketHi);
        REQUIRE(rec.residual < 1e-11);
        // Cross-check through the complex log evaluator: |f(z)| relative to
        // the ambient scale e^{Re z} must vanish to the same tolerance.
        const LogComplex v = evalFLog(s.params, rec.z);
        REQUIRE(v.logMod - rec.z.real() < std::log(1e-9));
        if (rec.m >= 5) {
            // The asymptotic location is y = m pi + pi/2.
            REQUIRE(std::abs(y - (rec.m + 0.5) * kPi) < 0.1);
        }
    }
    // Zeros sit strictly inside their rectangles, one turn of winding each.
    for (int m : {1, 7, 19}) {
        const auto box = dRectangle(s, m);
        const std::vector<Complex> contour(box.begin(), box.end());
        REQUIRE(countZerosWinding(s.params, contour, 512) == 1);
    }
    // A small square around a found zero also counts exactly one.
    const Complex z0 = zeros[3].z;
    const double hs = 0.4;
    const std::vector<Complex> square = {z0 + Complex(-hs, -hs), z0 + Complex(hs, -hs),
                                         z0 + Complex(hs, hs), z0 + Complex(-hs, hs)};
    REQUIRE(countZerosWinding(s.params, square, 256) == 1);
}

TEST_CASE("winding over a chain of rectangles equals the record count") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const auto zeros = findZerosOnRay(s, 0, 4, 9);
    int total = 0;
    for (int m = 4; m <= 9; ++m) {
        const auto box = dRectangle(s, m);
        total += countZerosWinding(s.params, {box.begin(), box.end()}, 384);
    }
    REQUIRE(total == static_cast<int>(zeros.size()));
}

TEST_CASE("sector interiors are zero free") {
    for (int p : {3, 5}) {
        const RegionScheme s = makeRegionScheme(FamilyParams(p));
        const Complex center(3.0 * s.nu, 0.0);
        const double hs = 0.5 * s.nu;
        const std::vector<Complex> square = {center + Complex(-hs, -hs), center + Complex(hs, -hs),
                                             center + Complex(hs, hs), center + Complex(-hs, hs)};
        REQUIRE(countZerosWinding(s.params, square, 256) == 0);
    }
}

TEST_CASE("winding refuses contours that graze a zero") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const auto zeros = findZerosOnRay(s, 0, 3, 3);
    const Complex z0 = zeros[0].z;
    const double hs = 1e-9;
    const std::vector<Complex> square = {z0 + Complex(-hs, -hs), z0 + Complex(hs, -hs),
                                         z0 + Complex(hs, hs), z0 + Complex(-hs, hs)};
    REQUIRE_THROWS_AS(countZerosWinding(s.params, square, 64), ContourError);
    REQUIRE_THROWS_AS(countZerosWinding(s.params, {z0, z0 + 1.0}, 64), InvariantError);
}

TEST_CASE("zeros rotate onto the other rays and pair up for even p") {
    const RegionScheme s3 = makeRegionScheme(FamilyParams(3));
    const auto ray0 = findZerosOnRay(s3, 0, 2, 6);
    const auto ray1 = findZerosOnRay(s3, 1, 2, 6);
    for (std::size_t i = 0; i < ray0.size(); ++i) {
        REQUIRE(ray1[i].r == Approx(ray0[i].r));
        const Complex rotated = s3.params.omega(1) * ray0[i].z;
        REQUIRE(std::abs(rotated - ray1[i].z) < 1e-10 * std::abs(rotated));
        // The rotated point is itself a zero to the same scale-free residual;
        // the ambient scale e^{r cos(pi/p)} is shared by every ray.
        const LogComplex v = evalFLog(s3.params, rotated);
        REQUIRE(v.logMod - ray0[i].r * std::cos(kPi / 3) < std::log(1e-9));
    }

    const RegionScheme s4 = makeRegionScheme(FamilyParams(4));
    const auto rayA = findZerosOnRay(s4, 0, 2, 6);
    const auto rayB = findZerosOnRay(s4, 2, 2, 6);
    for (std::size_t i = 0; i < rayA.size(); ++i) {
        REQUIRE(std::abs(-rayA[i].z - rayB[i].z) < 1e-10 * rayA[i].r);
        const Complex w(0.37, 1.9);
        REQUIRE(std::abs(evalF(s4.params, -w) - evalF(s4.params, w)) <=
                1e-12 * std::abs(evalF(s4.params, w)));
    }
}

TEST_CASE("input validation on the ray searches") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    REQUIRE_THROWS_AS(findZerosOnRay(s, 3, 1, 2), InvariantError);
    REQUIRE_THROWS_AS(findZerosOnRay(s, -1, 1, 2), InvariantError);
    REQUIRE_THROWS_AS(findZerosOnRay(s, 0, 0, 2), InvariantError);
    REQUIRE_THROWS_AS(findZerosOnRay(s, 0, 5, 4), InvariantError);
    REQUIRE_THROWS_AS(rayRestriction(s.params, -1.0), InvariantError);
    const auto zeros = findZerosOnRay(s, 0, 1, 4);
    REQUIRE_THROWS_AS(findCriticalPointsOnRay(s, 1, zeros), InvariantError);
    auto gappy = zeros;
    gappy.erase(gappy.begin() + 1);
    REQUIRE_THROWS_AS(findCriticalPointsOnRay(s, 0, gappy), InvariantError);
}

TEST_CASE("rectangle boundary comparison passes and the threshold calibrates") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const int mHat = calibrateMHat(s, 512);
    REQUIRE(mHat >= 1);
    const RoucheReport at = verifyRouche(s, mHat, 2048);
    const RoucheReport next = verifyRouche(s, mHat + 5, 2048);
    REQUIRE(at.pass());
    REQUIRE(next.pass());
    REQUIRE(next.minMargin > 0.0);
    REQUIRE(at.t0Pass);
    REQUIRE(at.t0MinMargin >= 0.0);
    // The m = 1 rectangle is below the asymptotic regime; the report is
    // informative either way, so only its shape is checked here.
    const RoucheReport first = verifyRouche(s, 1, 512);
    REQUIRE(first.m == 1);
    REQUIRE(first.t0Pass);
    REQUIRE_THROWS_AS(verifyRouche(s, 0, 64), InvariantError);
}

TEST_CASE("boundary comparison margins do not shrink with m") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const int mHat = calibrateMHat(s, 256);
    double prev = -1.0;
    for (int m = mHat + 1; m <= mHat + 10; ++m) {
        const RoucheReport rep = verifyRouche(s, m, 512);
        REQUIRE(rep.minMargin > 0.0);
        // Observed monotone growth; recorded loosely since it is a sampled
        // quantity rather than a proved one.
        REQUIRE(rep.minMargin > prev - 1e-6);
        prev = rep.minMargin;
    }
}

TEST_CASE("critical points interlace the zeros with alternating real values") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const auto zeros = findZerosOnRay(s, 0, 1, 20);
    const auto crits = findCriticalPointsOnRay(s, 0, zeros);
    REQUIRE(crits.size() == zeros.size() - 1);
    for (std::size_t i = 0; i < crits.size(); ++i) {
        REQUIRE(crits[i].r > zeros[i].r);
        REQUIRE(crits[i].r < zeros[i + 1].r);
        REQUIRE(crits[i].mLo == zeros[i].m);
        REQUIRE(crits[i].mHi == zeros[i + 1].m);
        REQUIRE(crits[i].scaledValue != 0.0);
        if (i > 0) {
            REQUIRE(crits[i].scaledValue * crits[i - 1].scaledValue < 0.0);
        }
        // The critical value is real: the phase of f there is 0 or pi.
        const LogComplex v = evalFLog(s.params, crits[i].z);
        const double expected = crits[i].scaledValue > 0.0 ? 0.0 : kPi;
        REQUIRE(std::abs(normalizeAngle(v.phase - expected)) < 1e-8);
        // Local quadratic model: the leftover slope is negligible against
        // the curvature over the zero spacing.
        const RayPoint q = rayRestriction(s.params, crits[i].r);
        const double spacing = zeros[i + 1].r - zeros[i].r;
        REQUIRE(std::abs(q.df) < 1e-8 * std::abs(q.d2f) * spacing);
    }
    // The origin is the one off-ray critical point in sight: the roots of
    // unity sum to zero.
    REQUIRE(std::abs(evalFPrime(s.params, Complex(0.0, 0.0))) < 1e-14);
}

TEST_CASE("exponential comparison is monotone past its threshold") {
    // E(x) = e^x - d e^{a x} with 0 < a < 1 must increase without bound once
    // x (1 - a) exceeds log+(a d); checked on the grid of pairs the ray
    // arguments lean on.
    for (double d : {0.5, 1.0, 2.0, 6.0}) {
        for (double a : {0.25, 0.309, 0.5, 0.9}) {
            const double threshold = std::max(0.0, std::log(a * d)) / (1.0 - a);
            double prev = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < 40; ++i) {
                const double x = threshold + 0.01 + 0.37 * i;
                const double value = std::exp(x) - d * std::exp(a * x);
                const double slope = std::exp(x) - d * a * std::exp(a * x);
                REQUIRE(slope > 0.0);
                REQUIRE(value > prev);
                prev = value;
            }
            REQUIRE(prev > 1.0);
        }
    }
}

TEST_CASE("record csv has the documented fixed columns") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3));
    const auto zeros = findZerosOnRay(s, 0, 1, 4);
    const auto crits = findCriticalPointsOnRay(s, 0, zeros);
    std::ostringstream out;
    writeRecordsCsv(out, zeros, crits);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "ray_index,m,r,re,im,residual,critical_value");
    int nRows = 0;
    double prevR = 0.0;
    while (std::getline(in, line)) {
        ++nRows;
        REQUIRE(std::count(line.begin(), line.end(), ',') == 6);
        // Interleaved by r within the ray: zeros and critical points
        // alternate in the emitted order.
        const std::size_t c2 = line.find(',', line.find(',') + 1);
        const double r = std::stod(line.substr(c2 + 1));
        REQUIRE(r > prevR);
        prevR = r;
    }
    REQUIRE(nRows == static_cast<int>(zeros.size() + crits.size()));
}
