#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "bouquet/escape.hpp"
#include "bouquet/escape_json.hpp"
#include "bouquet/hair.hpp"

using namespace bouquet;
using Catch::Approx;

namespace {

RegionScheme widenedScheme(int p, int bound, double lambda = 1.0) {
    const RegionScheme base = makeRegionScheme(FamilyParams(p, lambda));
    SchemeOverrides ov;
    ov.c = effectiveC(base, bound);
    return makeRegionScheme(FamilyParams(p, lambda), ov);
}

ItinerarySpec addrOf(std::vector<int> period, std::vector<int> preperiod = {}, int bound = 3) {
    ItinerarySpec addr;
    addr.preperiod = std::move(preperiod);
    addr.period = std::move(period);
    addr.bound = bound;
    return addr;
}

}  // namespace

TEST_CASE("growth table measures then exponentiates") {
    const FamilyParams fam(3, 1.0);
    const MGrowthTable t = buildMTable(fam, 10.0, 6);

    REQUIRE(t.base == 10.0);
    REQUIRE(t.values.size() == 7);
    for (std::size_t n = 0; n + 1 < t.values.size(); ++n) {
        REQUIRE(t.values[n + 1] > t.values[n]);
    }

    // M(10) = e^10 (1 + O(e^-15)), so the first iterate's log sits at the
    // base radius itself up to a microscopic correction.
    REQUIRE(t.values[0].toDouble() == 10.0);
    REQUIRE(t.values[1].logToDouble() >= 10.0 - 1e-4);
    REQUIRE(t.values[1].logToDouble() == Approx(10.0).margin(1e-4));

    // log M^2 = M^1 up to log(lambda) and the same correction.
    REQUIRE(t.values[2].logToDouble() ==
            Approx(std::exp(t.values[1].logToDouble())).epsilon(1e-9));

    // Tower levels grow one per entry once doubles run out; with lambda = 1
    // the asymptotic step leaves the stored exponent untouched.
    REQUIRE(t.values[1].level() == 0);
    REQUIRE(t.values[2].level() == 1);
    REQUIRE(t.values[3].level() == 2);
    REQUIRE(t.values[6].level() == 5);
    REQUIRE(t.values[3].mantissa() == t.values[2].mantissa());

    // A base the maximum modulus cannot beat is rejected: with lambda = 0.01
    // the whole circle |z| = 0.1 maps inside |w| <= ~0.031.
    REQUIRE_THROWS_AS(buildMTable(FamilyParams(3, 0.01), 0.1, 3), InvariantError);
    REQUIRE_THROWS_AS(buildMTable(fam, -1.0, 3), InvariantError);
    REQUIRE_THROWS_AS(buildMTable(fam, 10.0, -1), InvariantError);
}

TEST_CASE("fast escape separates bounded starts from escaping points") {
    const FamilyParams fam(3, 1.0);
    // The base must exceed |f^2(0)| = 19.70..., otherwise a bounded start
    // clears the first rung of the table by accident two steps in.
    const MGrowthTable table = buildMTable(fam, 25.0, 8);

    const FastEscapeResult onAxis = fastEscapeTest(fam, table, Complex(25.0, 0.0), 2, 5);
    REQUIRE(onAxis.qualifies);
    REQUIRE(onAxis.L.has_value());
    REQUIRE(*onAxis.L <= 2);

    // f(0) = p and |f^2(0)| < 25, so every lead L <= 2 fails on the first
    // comparison no matter the horizon.
    for (int horizon = 0; horizon <= 5; ++horizon) {
        const FastEscapeResult origin = fastEscapeTest(fam, table, Complex(0.0, 0.0), 2, horizon);
        REQUIRE_FALSE(origin.qualifies);
        REQUIRE_FALSE(origin.L.has_value());
    }

    // A hair sample rides the fast-escape regime: one exponential jump puts
    // it ahead of the table for good.
    const RegionScheme ws = widenedScheme(3, 3);
    const Complex hairSample = hairPoint(ws, addrOf({2}), 10.0).z;
    const FastEscapeResult hair = fastEscapeTest(fam, table, hairSample, 2, 4);
    REQUIRE(hair.qualifies);
    REQUIRE(*hair.L <= 2);

    REQUIRE_THROWS_AS(fastEscapeTest(fam, table, Complex(1.0, 0.0), -1, 2), InvariantError);
    REQUIRE_THROWS_AS(fastEscapeTest(fam, table, Complex(1.0, 0.0), 2, 9), InvariantError);
}

TEST_CASE("dominant model guards the sector boundary") {
    const FamilyParams fam(3, 1.0);

    // Pinned to the positive real axis the model is exact: each step lifts
    // the tower one level and keeps the argument at zero.
    detail::EscapeOrbit pinned;
    pinned.exact = false;
    pinned.phaseKnown = true;
    pinned.phase = 0.0;
    pinned.modulus = TowerReal::fromLog(800.0);
    REQUIRE(detail::escapeOrbitStep(fam, pinned));
    REQUIRE(pinned.phaseKnown);
    REQUIRE(pinned.modulus.level() == 2);
    REQUIRE(pinned.modulus.mantissa() == Approx(800.0).epsilon(1e-12));
    REQUIRE(detail::escapeOrbitStep(fam, pinned));
    REQUIRE(pinned.modulus.level() == 3);

    // Off axis the argument survives exactly one model step, then the
    // sector-worst coefficient takes over (invisible at tower level >= 2).
    detail::EscapeOrbit offAxis = pinned;
    offAxis.phaseKnown = true;
    offAxis.phase = 0.3;
    offAxis.modulus = TowerReal::fromLog(800.0);
    REQUIRE(detail::escapeOrbitStep(fam, offAxis));
    REQUIRE_FALSE(offAxis.phaseKnown);
    REQUIRE(offAxis.modulus.level() == 2);
    REQUIRE(offAxis.modulus.mantissa() == Approx(800.0 + std::log(std::cos(0.3))).epsilon(1e-12));
    REQUIRE(detail::escapeOrbitStep(fam, offAxis));
    REQUIRE(offAxis.modulus.level() == 3);

    // On a sector boundary two exponentials tie and the sum can cancel to
    // anything: the model refuses the step.
    detail::EscapeOrbit boundary = pinned;
    boundary.phaseKnown = true;
    boundary.phase = kPi / 3.0;
    boundary.modulus = TowerReal::fromLog(5000.0);
    REQUIRE_FALSE(detail::escapeOrbitStep(fam, boundary));

    // Near the boundary with too little modulus the required exponent gap is
    // not met either.
    detail::EscapeOrbit thin = pinned;
    thin.phaseKnown = true;
    thin.phase = 0.1;
    thin.modulus = TowerReal::fromValue(20.0);
    REQUIRE_FALSE(detail::escapeOrbitStep(fam, thin));
}

TEST_CASE("cells classify bounded and escaping pixels") {
    // Small lambda keeps an attracting basin around the origin: 0 -> 0.15
    // -> 0.1501 -> ... stays put, while far-out pixels still escape.
    const RegionScheme s = makeRegionScheme(FamilyParams(3, 0.05));
    const double radius = std::exp(s.c);

    const CellClass bounded = classifyCell(s, Complex(0.0, 0.0), 50, radius);
    REQUIRE_FALSE(bounded.escapeN.has_value());
    REQUIRE(bounded.finalLabel.kind == RegionKind::Polygon);
    REQUIRE(bounded.digit0.has_value());
    REQUIRE(*bounded.digit0 == 0);
    REQUIRE(bounded.logLogModulus == 0.0);

    const CellClass escaping = classifyCell(s, Complex(30.0, 0.0), 50, radius);
    REQUIRE(escaping.escapeN.has_value());
    REQUIRE(*escaping.escapeN == 1);
    REQUIRE(escaping.finalLabel.kind == RegionKind::Sector);
    REQUIRE(escaping.finalLabel.index == 0);
    REQUIRE(*escaping.digit0 == 0);
    REQUIRE(escaping.logLogModulus > std::log(s.c));

    // The trace carries log-moduli of every visited orbit point; for the
    // bounded pixel it hovers at the fixed point log(0.1501...) ~ -1.9.
    std::vector<double> trace;
    classifyCell(s, Complex(0.0, 0.0), 50, radius, &trace);
    REQUIRE(trace.size() == 51);
    REQUIRE(trace.front() == -std::numeric_limits<double>::infinity());
    REQUIRE(trace.back() == Approx(std::log(0.15)).margin(0.05));

    classifyCell(s, Complex(30.0, 0.0), 50, radius, &trace);
    REQUIRE(trace.size() == 2);
    REQUIRE(trace[1] == Approx(30.0 + std::log(0.05)).epsilon(1e-9));

    REQUIRE_THROWS_AS(classifyCell(s, Complex(1.0, 0.0), -1, radius), InvariantError);
    REQUIRE_THROWS_AS(classifyCell(s, Complex(1.0, 0.0), 10, 1e301), InvariantError);
}

TEST_CASE("grids are deterministic across worker counts") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3, 0.05));
    const GridWindow win{-6.0, 6.0, -4.0, 4.0};
    const double radius = std::exp(s.c);

    const EscapeGrid g1 = classifyGrid(s, win, 48, 32, 50, radius, 1);
    REQUIRE(g1.cells.size() == 48u * 32u);

    // The picture must mix basins for the determinism check to mean much.
    std::size_t escaped = 0;
    for (const CellClass& c : g1.cells)
        if (c.escapeN) ++escaped;
    REQUIRE(escaped > 0);
    REQUIRE(escaped < g1.cells.size());

    const EscapeGrid g4 = classifyGrid(s, win, 48, 32, 50, radius, 4);
    const EscapeGrid g8 = classifyGrid(s, win, 48, 32, 50, radius, 8);
    REQUIRE(g1.cells == g4.cells);
    REQUIRE(g1.cells == g8.cells);
    REQUIRE(renderPpmBytes(g1) == renderPpmBytes(g8));

    REQUIRE_THROWS_AS(classifyGrid(s, win, 0, 32, 50, radius, 1), InvariantError);
    REQUIRE_THROWS_AS(classifyGrid(s, win, 48, 32, 50, radius / 2.0, 1), InvariantError);
    REQUIRE_THROWS_AS(classifyGrid(s, GridWindow{1.0, 1.0, 0.0, 2.0}, 8, 8, 50, radius, 1),
                      InvariantError);
}

TEST_CASE("escape counts respect the family symmetries") {
    // Rotation by 2 pi / p maps orbits onto orbits from the first step on,
    // so the escape count is the same at z and omega z.
    const RegionScheme s3 = makeRegionScheme(FamilyParams(3, 1.0));
    const double r3 = std::exp(s3.c);
    std::mt19937 rng(20240816u);
    std::uniform_real_distribution<double> radial(0.0, 1.0), angular(-kPi, kPi);
    for (int i = 0; i < 40; ++i) {
        const Complex z = std::polar(12.0 * std::sqrt(radial(rng)), angular(rng));
        const CellClass a = classifyCell(s3, z, 40, r3);
        const CellClass b = classifyCell(s3, s3.params.omega(1) * z, 40, r3);
        REQUIRE(a.escapeN == b.escapeN);
    }

    // Even p makes f even, so a point-reflected window classifies to a
    // point-reflected grid.
    const RegionScheme s4 = makeRegionScheme(FamilyParams(4, 1.0));
    const GridWindow win{-8.0, 8.0, -8.0, 8.0};
    const EscapeGrid g = classifyGrid(s4, win, 32, 32, 30, std::exp(s4.c), 1);
    for (int iy = 0; iy < 32; ++iy) {
        for (int ix = 0; ix < 32; ++ix) {
            const CellClass& a = g.cells[static_cast<std::size_t>(iy) * 32 + ix];
            const CellClass& b = g.cells[static_cast<std::size_t>(31 - iy) * 32 + (31 - ix)];
            REQUIRE(a.escapeN == b.escapeN);
        }
    }
}

TEST_CASE("escaped sector pixels grow monotonically at the end") {
    const RegionScheme s = makeRegionScheme(FamilyParams(3, 1.0));
    const double radius = std::exp(s.c);
    const GridWindow win{-15.0, 15.0, -15.0, 15.0};
    const int maxIter = 40;
    const EscapeGrid g = classifyGrid(s, win, 48, 48, maxIter, radius, 1);

    // Below the polygon scale nu the orbit may wander or graze a zero, so
    // the growth claim only binds once the recorded window sits above it.
    const double floorLog = std::log(s.nu);
    std::vector<double> trace;
    int checked = 0;
    for (int iy = 0; iy < g.height; ++iy) {
        for (int ix = 0; ix < g.width; ++ix) {
            const CellClass& c = g.cells[static_cast<std::size_t>(iy) * g.width + ix];
            if (!c.escapeN || *c.escapeN > maxIter - 5) continue;
            if (c.finalLabel.kind != RegionKind::Sector) continue;
            classifyCell(s, gridPoint(win, g.width, g.height, ix, iy), maxIter, radius, &trace);
            const std::size_t last = trace.size() - 1;
            const std::size_t first = last >= 4 ? last - 4 : 0;
            bool aboveFloor = true;
            for (std::size_t k = first; k < last; ++k) {
                if (!(trace[k] > floorLog)) aboveFloor = false;
            }
            if (!aboveFloor) continue;
            for (std::size_t k = first; k < last; ++k) {
                REQUIRE(trace[k + 1] > trace[k]);
            }
            ++checked;
        }
    }
    REQUIRE(checked > 500);
}

TEST_CASE("ppm renderer is bit-exact") {
    // All pixels of this window clear the radius after exactly one step, so
    // the image is a stack of digit-lightness bands with one hue.
    const RegionScheme s = makeRegionScheme(FamilyParams(3, 1.0));
    const GridWindow win{25.0, 45.0, -10.0, 10.0};
    const EscapeGrid g = classifyGrid(s, win, 64, 64, 20, std::exp(s.c), 1);
    for (const CellClass& c : g.cells) {
        REQUIRE(c.escapeN.has_value());
        REQUIRE(*c.escapeN == 1);
    }

    const std::string bytes = renderPpmBytes(g);
    const std::string header = "P6\n64 64\n255\n";
    REQUIRE(bytes.substr(0, header.size()) == header);
    REQUIRE(bytes.size() == header.size() + 3u * 64u * 64u);

    // Frozen digest of the full byte stream; any platform or palette drift
    // shows up here.
    REQUIRE(hashHex(fnv1a64(bytes.data(), bytes.size())) == "325455295a8140fb");

    // Cells that never escaped render black.
    EscapeGrid tiny;
    tiny.window = {0.0, 1.0, 0.0, 1.0};
    tiny.width = 1;
    tiny.height = 1;
    tiny.cells.resize(1);
    const std::string black = renderPpmBytes(tiny);
    REQUIRE(black.substr(black.size() - 3) == std::string(3, '\0'));

    PaletteSpec bad;
    bad.cycle = 0;
    REQUIRE_THROWS_AS(renderPpmBytes(tiny, bad), InvariantError);
    bad.cycle = 16;
    bad.digitSpan = 0;
    REQUIRE_THROWS_AS(renderPpmBytes(tiny, bad), InvariantError);

    // File round trip, with the path surfaced on failure.
    const std::string path = "/tmp/bouquet_escape_render_test.ppm";
    writePpm(g, path);
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string readBack((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(readBack == bytes);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(writePpm(g, "/nonexistent_dir_bouquet/out.ppm"), IoError);
}

TEST_CASE("escape structures serialize with stable keys") {
    const FamilyParams fam(3, 1.0);
    const MGrowthTable t = buildMTable(fam, 10.0, 4);
    const nlohmann::ordered_json jt = mTableToJson(t);
    REQUIRE(jt.at("base").get<double>() == 10.0);
    REQUIRE(jt.at("values").size() == 5);
    REQUIRE(jt.at("values")[2].at("level").get<int>() == 1);
    REQUIRE(jt.at("values")[0].at("mantissa").get<double>() == 10.0);
    REQUIRE(jt.at("values")[3].at("repr").get<std::string>().rfind("exp(", 0) == 0);

    const RegionScheme s = makeRegionScheme(FamilyParams(3, 0.05));
    const EscapeGrid g = classifyGrid(s, GridWindow{-6.0, 6.0, -4.0, 4.0}, 16, 8, 30,
                                      std::exp(s.c), 1);
    const nlohmann::ordered_json jg = gridSummaryToJson(g);
    REQUIRE(jg.at("width").get<int>() == 16);
    REQUIRE(jg.at("height").get<int>() == 8);
    REQUIRE(jg.at("window").at("re_min").get<double>() == -6.0);
    REQUIRE(jg.at("escaped").get<std::size_t>() + jg.at("bounded").get<std::size_t>() == 16u * 8u);
}
