#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bouquet/family.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/tower.hpp"
#include "bouquet/util.hpp"

namespace bouquet {

// Iterated maximum modulus M^n(base) with M(r) = max_{|z|=r} |f(z)|. The
// entries outgrow double within two or three steps of any workable base, so
// they are carried as tower magnitudes.
struct MGrowthTable {
    double base = 0.0;
    std::vector<TowerReal> values;  // values[n] = M^n(base), n = 0..nMax
};

// Two regimes: while M^n still fits a double the next entry is measured on
// the circle directly; past that the subleading exponentials sit below
// e^{-(1-cos(2 pi/p)) r} and M(r) = lambda e^r to far beyond double rounding,
// so the next entry is exp of the previous one, scaled by lambda.
inline MGrowthTable buildMTable(const FamilyParams& fam, double base, int nMax) {
    if (!(base > 0.0) || !std::isfinite(base))
        throw InvariantError("buildMTable: base must be positive and finite");
    if (nMax < 0) throw InvariantError("buildMTable: nMax must be >= 0");
    if (!(logMaxModulus(fam, base) > std::log(base)))
        throw InvariantError("buildMTable: base too small, M(base) <= base");

    MGrowthTable t;
    t.base = base;
    t.values.reserve(static_cast<std::size_t>(nMax) + 1);
    t.values.push_back(TowerReal::fromValue(base));
    for (int n = 0; n < nMax; ++n) {
        const TowerReal& prev = t.values.back();
        const double r = prev.toDouble();
        const TowerReal next = r < 1e300 ? TowerReal::fromLog(logMaxModulus(fam, r))
                                         : prev.exp().scaled(fam.lambda());
        if (!(next > prev))
            throw InvariantError("buildMTable: max-modulus iterate failed to increase");
        t.values.push_back(next);
    }
    return t;
}

struct FastEscapeResult {
    bool qualifies = false;
    std::optional<int> L;
};

namespace detail {

// The single-term model below is trusted only while the leading exponent
// beats the second one by this margin; the neglected terms are then below
// (p-1) e^{-margin}, under double rounding.
inline constexpr double kModelMargin = 40.0;

// Orbit modulus tracker. While log|z| fits a double the point is carried
// exactly as (log|z|, arg z) and advanced through evalFLog. Past that only
// the modulus survives, in tower form, and f is replaced by its dominant
// term lambda exp(omega^{k*} z). The argument is still reducible when it is
// exactly 0 (orbits pinned to the positive real axis stay pinned); any other
// argument is multiplied by |z| in one step, far past angular resolution,
// and is dropped in favor of the sector-worst coefficient cos(pi/p).
struct EscapeOrbit {
    double logMod = 0.0;
    double phase = 0.0;
    TowerReal modulus;
    bool exact = true;       // (logMod, phase) representation still in range
    bool phaseKnown = true;
};

inline EscapeOrbit escapeOrbitStart(Complex z) {
    EscapeOrbit o;
    o.logMod = std::log(std::abs(z));
    o.phase = std::arg(z);
    o.modulus = TowerReal::fromValue(std::abs(z));
    return o;
}

// One orbit step. Returns false when the dominant-term model cannot certify
// the step: the direction sits at a sector boundary where two exponentials
// tie and their sum can cancel to anything, including a modulus small enough
// to invalidate the log-scale representation.
inline bool escapeOrbitStep(const FamilyParams& fam, EscapeOrbit& o) {
    if (o.exact) {
        const LogComplex lc = evalFLog(fam, std::polar(std::exp(o.logMod), o.phase));
        o.modulus = TowerReal::fromLog(lc.logMod);
        o.phase = lc.phase;
        if (lc.logMod > kMaxExp) {
            o.exact = false;
        } else {
            o.logMod = lc.logMod;
        }
        return true;
    }
    const double sector = kTwoPi / fam.p();
    double cosStar;
    if (o.phaseKnown) {
        const double thetaStar = std::remainder(o.phase, sector);
        const double dcos = std::cos(thetaStar) - std::cos(sector - std::abs(thetaStar));
        if (!(dcos > 0.0) || o.modulus.scaled(dcos) < TowerReal::fromValue(kModelMargin))
            return false;
        cosStar = std::cos(thetaStar);
        if (thetaStar == 0.0) {
            o.phase = 0.0;
        } else {
            o.phaseKnown = false;
        }
    } else {
        cosStar = std::cos(kPi / fam.p());
    }
    o.modulus = o.modulus.scaled(cosStar).exp().scaled(fam.lambda());
    return true;
}

}  // namespace detail

// Smallest lead L <= LMax with |f^{n+L}(z)| >= M^n(base) for every
// n <= horizon. Orbits that outrun double precision are compared in tower
// form; a step the dominant-term model cannot certify makes the whole test
// report not-qualifying.
inline FastEscapeResult fastEscapeTest(const FamilyParams& fam, const MGrowthTable& table,
                                       Complex z, int LMax, int horizon) {
    if (LMax < 0) throw InvariantError("fastEscapeTest: LMax must be >= 0");
    if (horizon < 0) throw InvariantError("fastEscapeTest: horizon must be >= 0");
    if (static_cast<std::size_t>(horizon) >= table.values.size())
        throw InvariantError("fastEscapeTest: horizon exceeds the growth table");

    const int steps = LMax + horizon;
    std::vector<TowerReal> mags;
    mags.reserve(static_cast<std::size_t>(steps) + 1);
    detail::EscapeOrbit orbit = detail::escapeOrbitStart(z);
    mags.push_back(orbit.modulus);
    for (int k = 0; k < steps; ++k) {
        if (!detail::escapeOrbitStep(fam, orbit)) return {};
        mags.push_back(orbit.modulus);
    }
    for (int L = 0; L <= LMax; ++L) {
        bool ok = true;
        for (int n = 0; n <= horizon && ok; ++n)
            ok = mags[static_cast<std::size_t>(L + n)] >= table.values[static_cast<std::size_t>(n)];
        if (ok) return {true, L};
    }
    return {};
}

struct GridWindow {
    double reMin = 0.0, reMax = 0.0;
    double imMin = 0.0, imMax = 0.0;
};

struct CellClass {
    std::optional<int> escapeN;  // first n with |f^n(z)| > radius
    RegionLabel finalLabel;      // region of the stopping point
    double logLogModulus = 0.0;  // log log|stopping point|, floored at 0
    std::optional<int> digit0;   // horizontal strip index of the pixel itself

    bool operator==(const CellClass&) const = default;
};

struct EscapeGrid {
    GridWindow window;
    int width = 0, height = 0;
    std::vector<CellClass> cells;  // row-major, top row first
};

// Pixel-center coordinate; row 0 is the top of the window.
inline Complex gridPoint(const GridWindow& w, int width, int height, int ix, int iy) {
    const double re = w.reMin + (ix + 0.5) * (w.reMax - w.reMin) / width;
    const double im = w.imMax - (iy + 0.5) * (w.imMax - w.imMin) / height;
    return {re, im};
}

// Orbit classification of one point. The orbit is carried as (log|z|, arg z),
// which never overflows: the loop only continues below the escape radius, so
// reconstruction stays in double range, and the one crossing step can push
// the log-modulus at most to radius + log(lambda p). The optional trace
// receives log|f^n(z)| for every visited orbit point.
inline CellClass classifyCell(const RegionScheme& s, Complex z0, int maxIter,
                              double escapeRadius, std::vector<double>* logModTrace = nullptr) {
    if (maxIter < 0) throw InvariantError("classifyCell: maxIter must be >= 0");
    if (!(escapeRadius > 0.0) || !(escapeRadius <= 1e300))
        throw InvariantError("classifyCell: escape radius outside (0, 1e300]");

    CellClass cell;
    cell.digit0 = stripIndex(z0);
    const double logR = std::log(escapeRadius);
    double lm = std::log(std::abs(z0));
    double ph = std::arg(z0);
    if (logModTrace) {
        logModTrace->clear();
        logModTrace->push_back(lm);
    }
    for (int n = 0; n <= maxIter; ++n) {
        if (lm > logR) {
            cell.escapeN = n;
            break;
        }
        if (n == maxIter) break;
        const LogComplex lc = evalFLog(s.params, std::polar(std::exp(lm), ph));
        lm = lc.logMod;
        ph = lc.phase;
        if (logModTrace) logModTrace->push_back(lm);
    }
    // The stopping modulus can exceed double range by one exponential jump;
    // at that size the label depends only on the direction, so it is taken
    // on a radially capped representative.
    cell.finalLabel = classifyPoint(s, std::polar(std::exp(std::min(lm, kMaxExp)), ph));
    cell.logLogModulus = std::log(std::max(1.0, lm));
    return cell;
}

// Row-parallel grid classification. Rows are claimed through an atomic
// counter, written into per-row buffers, and merged in index order, so the
// cell array is identical for every worker count.
inline EscapeGrid classifyGrid(const RegionScheme& s, const GridWindow& window, int width,
                               int height, int maxIter, double escapeRadius, int workers = 1) {
    if (width < 1 || height < 1) throw InvariantError("classifyGrid: empty grid");
    if (!(window.reMax > window.reMin) || !(window.imMax > window.imMin))
        throw InvariantError("classifyGrid: degenerate window");
    if (!(escapeRadius >= std::exp(std::min(s.c, kMaxExp))))
        throw InvariantError("classifyGrid: escape radius below e^c");
    if (workers < 1) throw InvariantError("classifyGrid: workers must be >= 1");

    EscapeGrid g;
    g.window = window;
    g.width = width;
    g.height = height;
    g.cells.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    auto fillRow = [&](int iy, CellClass* row) {
        for (int ix = 0; ix < width; ++ix)
            row[ix] = classifyCell(s, gridPoint(window, width, height, ix, iy), maxIter,
                                   escapeRadius);
    };
    if (workers == 1) {
        for (int iy = 0; iy < height; ++iy)
            fillRow(iy, g.cells.data() + static_cast<std::size_t>(iy) * width);
        return g;
    }
    std::vector<std::vector<CellClass>> rows(static_cast<std::size_t>(height));
    std::atomic<int> nextRow{0};
    auto work = [&] {
        for (int iy = nextRow.fetch_add(1); iy < height; iy = nextRow.fetch_add(1)) {
            auto& row = rows[static_cast<std::size_t>(iy)];
            row.resize(static_cast<std::size_t>(width));
            fillRow(iy, row.data());
        }
    };
    std::vector<std::thread> pool;
    const int nThreads = std::min(workers, height);
    pool.reserve(static_cast<std::size_t>(nThreads));
    for (int i = 0; i < nThreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    for (int iy = 0; iy < height; ++iy)
        std::copy(rows[static_cast<std::size_t>(iy)].begin(),
                  rows[static_cast<std::size_t>(iy)].end(),
                  g.cells.begin() + static_cast<std::size_t>(iy) * width);
    return g;
}

// Default palette: hue from escape_n around a fixed wheel, lightness from
// the starting strip digit (half the span of the wheel's brightness), black
// for cells that never escaped. Byte arithmetic only, so rendered files are
// bit-identical across platforms.
struct PaletteSpec {
    int cycle = 16;     // escape counts per trip around the hue wheel, 1..256
    int digitSpan = 4;  // digits clamped to [-digitSpan, digitSpan]
};

namespace detail {

// 16-step hue wheel, saturation 3/4, full value, as RGB bytes.
inline constexpr unsigned char kHueWheel[16][3] = {
    {255, 64, 64},  {255, 136, 64}, {255, 207, 64}, {231, 255, 64},
    {160, 255, 64}, {88, 255, 64},  {64, 255, 112}, {64, 255, 184},
    {64, 255, 255}, {64, 184, 255}, {64, 112, 255}, {88, 64, 255},
    {160, 64, 255}, {231, 64, 255}, {255, 64, 207}, {255, 64, 136},
};

inline void paletteColor(const PaletteSpec& pal, const CellClass& cell, unsigned char* rgb) {
    if (!cell.escapeN) {
        rgb[0] = rgb[1] = rgb[2] = 0;
        return;
    }
    const int idx = (*cell.escapeN % pal.cycle) * 16 / pal.cycle;
    const int d = cell.digit0 ? std::clamp(*cell.digit0, -pal.digitSpan, pal.digitSpan) : 0;
    // Lightness factor 160..256: the brightest digit keeps the wheel color.
    const int f = 160 + (d + pal.digitSpan) * 96 / (2 * pal.digitSpan);
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<unsigned char>((kHueWheel[idx][c] * f) >> 8);
}

}  // namespace detail

// P6 image bytes: header exactly "P6\n<w> <h>\n255\n", then RGB rows top to
// bottom.
inline std::string renderPpmBytes(const EscapeGrid& g, const PaletteSpec& pal = {}) {
    if (g.width < 1 || g.height < 1 ||
        g.cells.size() != static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height))
        throw InvariantError("renderPpmBytes: incomplete grid");
    if (pal.cycle < 1 || pal.cycle > 256)
        throw InvariantError("renderPpmBytes: palette cycle outside 1..256");
    if (pal.digitSpan < 1) throw InvariantError("renderPpmBytes: digit span must be >= 1");

    std::string out = "P6\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n";
    out.reserve(out.size() + 3 * g.cells.size());
    unsigned char rgb[3];
    for (const CellClass& cell : g.cells) {
        detail::paletteColor(pal, cell, rgb);
        out.append(reinterpret_cast<const char*>(rgb), 3);
    }
    return out;
}

inline void writePpm(const EscapeGrid& g, const std::string& path, const PaletteSpec& pal = {}) {
    const std::string bytes = renderPpmBytes(g, pal);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("writePpm: cannot open " + path);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) throw IoError("writePpm: write failed for " + path);
}

}  // namespace bouquet
