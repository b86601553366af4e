// Command-line front end over the bouquet headers: one binary, subcommand
// style, JSON config merged under explicit flags, every output accompanied
// by a sidecar carrying the effective config and content hashes.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/config error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bouquet/escape.hpp"
#include "bouquet/escape_json.hpp"
#include "bouquet/family.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/geometry_json.hpp"
#include "bouquet/hair.hpp"
#include "bouquet/hair_json.hpp"
#include "bouquet/symbolic.hpp"
#include "bouquet/symbolic_json.hpp"
#include "bouquet/zeros.hpp"

namespace {

using namespace bouquet;
using nlohmann::ordered_json;

struct RunConfig {
    std::string command;
    int p = 3;
    double lambda = 1.0;
    int symbolBound = 3;
    std::optional<double> c;
    std::string mRange;
    std::string itinerary;
    double tMax = 30.0;
    std::string window = "-8,8,-8,8";
    std::string size = "512";
    int maxIter = 60;
    std::optional<double> radius;
    int workers = 1;
    std::string outDir;
    std::string configPath;
    std::uint64_t seed = 1;
    std::string zText;
    std::string rays = "0";
    // Scheme constants are config-file-only knobs; the formula defaults are
    // what the flags expose.
    std::optional<double> tau, nu, sigma, eta, safety;

    ordered_json echo() const {
        ordered_json j;
        j["command"] = command;
        j["p"] = p;
        j["lambda"] = lambda;
        j["K"] = symbolBound;
        if (c) j["c"] = *c;
        if (!mRange.empty()) j["m"] = mRange;
        if (!itinerary.empty()) j["s"] = itinerary;
        j["tmax"] = tMax;
        j["window"] = window;
        j["size"] = size;
        j["max_iter"] = maxIter;
        if (radius) j["radius"] = *radius;
        j["workers"] = workers;
        j["out"] = outDir;
        j["seed"] = seed;
        if (!zText.empty()) j["z"] = zText;
        j["rays"] = rays;
        if (tau) j["tau"] = *tau;
        if (nu) j["nu"] = *nu;
        if (sigma) j["sigma"] = *sigma;
        if (eta) j["eta"] = *eta;
        if (safety) j["safety"] = *safety;
        return j;
    }
};

// Writes command outputs into the output directory and accumulates the
// sidecar rows; finish() lands <command>.sidecar.json next to them.
class OutputSet {
  public:
    OutputSet(const RunConfig& cfg) : dir_(cfg.outDir), echo_(cfg.echo()) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string());
    }

    std::filesystem::path writeBytes(const std::string& name, const std::string& bytes) {
        const std::filesystem::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + path.string());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw IoError("write failed for " + path.string());
        ordered_json row;
        row["file"] = name;
        row["bytes"] = bytes.size();
        row["fnv1a64"] = hashHex(fnv1a64(bytes.data(), bytes.size()));
        files_.push_back(std::move(row));
        return path;
    }

    std::filesystem::path writeJson(const std::string& name, const ordered_json& j) {
        return writeBytes(name, j.dump(2) + "\n");
    }

    void finish(const std::string& command) {
        ordered_json sidecar;
        sidecar["command"] = command;
        sidecar["config"] = echo_;
        sidecar["outputs"] = files_;
        const std::filesystem::path path = dir_ / (command + ".sidecar.json");
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + path.string());
        os << sidecar.dump(2) << "\n";
        if (!os) throw IoError("write failed for " + path.string());
    }

  private:
    std::filesystem::path dir_;
    ordered_json echo_;
    ordered_json files_ = ordered_json::array();
};

std::pair<int, int> parseMRange(const std::string& text) {
    const std::size_t dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const int m = std::stoi(text);
            return {m, m};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw InvariantError("--m expects 'lo..hi' or a single integer, got '" + text + "'");
    }
}

std::vector<double> parseNumberList(const std::string& text, std::size_t n,
                                    const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw InvariantError(what + ": malformed number '" + token + "'");
        }
    }
    if (out.size() != n)
        throw InvariantError(what + ": expected " + std::to_string(n) + " comma-separated values");
    return out;
}

GridWindow parseWindow(const std::string& text) {
    const std::vector<double> v = parseNumberList(text, 4, "--window");
    return GridWindow{v[0], v[1], v[2], v[3]};
}

std::pair<int, int> parseSize(const std::string& text) {
    const std::size_t x = text.find('x');
    try {
        if (x == std::string::npos) {
            const int n = std::stoi(text);
            return {n, n};
        }
        return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    } catch (const std::exception&) {
        throw InvariantError("--size expects 'N' or 'WxH', got '" + text + "'");
    }
}

Complex parseComplexArg(const std::string& text) {
    const std::vector<double> v = parseNumberList(text, 2, "--z");
    return Complex(v[0], v[1]);
}

std::vector<int> parseRays(const std::string& text, int p) {
    std::vector<int> out;
    if (text == "all") {
        for (int k = 0; k < p; ++k) out.push_back(k);
        return out;
    }
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        int ray = 0;
        try {
            ray = std::stoi(token);
        } catch (const std::exception&) {
            throw InvariantError("--rays expects 'all' or integers, got '" + token + "'");
        }
        if (ray < 0 || ray >= p)
            throw InvariantError("--rays: index " + std::to_string(ray) + " outside 0.." +
                                 std::to_string(p - 1));
        out.push_back(ray);
    }
    if (out.empty()) throw InvariantError("--rays: empty list");
    return out;
}

SchemeOverrides overridesFor(const RunConfig& cfg) {
    SchemeOverrides ov;
    ov.c = cfg.c;
    ov.tau = cfg.tau;
    ov.nu = cfg.nu;
    ov.sigma = cfg.sigma;
    ov.eta = cfg.eta;
    ov.safety = cfg.safety;
    return ov;
}

RegionScheme schemeFor(const RunConfig& cfg) {
    return makeRegionScheme(FamilyParams(cfg.p, cfg.lambda), overridesFor(cfg));
}

// Scheme with the right edge pushed out far enough for the covering over
// symbols |j| <= K to close; an explicit --c wins.
RegionScheme wideSchemeFor(const RunConfig& cfg) {
    if (cfg.c) return schemeFor(cfg);
    const RegionScheme base = schemeFor(cfg);
    SchemeOverrides ov = overridesFor(cfg);
    ov.c = effectiveC(base, cfg.symbolBound);
    return makeRegionScheme(FamilyParams(cfg.p, cfg.lambda), ov);
}

const char* statusName(ItineraryStatus st) {
    switch (st) {
        case ItineraryStatus::Completed: return "completed";
        case ItineraryStatus::Escaped: return "escaped";
        case ItineraryStatus::BoundaryHit: return "boundary-hit";
        default: return "overflow";
    }
}

int cmdZeros(const RunConfig& cfg) {
    const RegionScheme s = schemeFor(cfg);
    const int mHat = calibrateMHat(s, 1024);
    auto [mLo, mHi] = cfg.mRange.empty() ? std::pair<int, int>{mHat + 1, mHat + 20}
                                         : parseMRange(cfg.mRange);
    if (mLo < 1 || mHi < mLo) throw InvariantError("--m: need 1 <= lo <= hi");
    const std::vector<int> rays = parseRays(cfg.rays, s.p());

    std::vector<ZeroRecord> all;
    int windingChecks = 0;
    int windingMismatches = 0;
    double maxResidual = 0.0;
    for (int ray : rays) {
        const std::vector<ZeroRecord> zs = findZerosOnRay(s, ray, mLo, mHi);
        for (const ZeroRecord& zr : zs) maxResidual = std::max(maxResidual, zr.residual);
        // Independent count: one turn of the argument around each bracketing
        // rectangle, rotated from the reference ray onto this one.
        const Complex rot = s.params.omega(ray);
        for (int m = mLo; m <= mHi; ++m) {
            const std::array<Complex, 4> box = dRectangle(s, m);
            std::vector<Complex> contour;
            contour.reserve(4);
            for (const Complex& v : box) contour.push_back(rot * v);
            ++windingChecks;
            if (countZerosWinding(s.params, contour, 512) != 1) ++windingMismatches;
        }
        all.insert(all.end(), zs.begin(), zs.end());
    }

    OutputSet out(cfg);
    std::ostringstream csv;
    writeRecordsCsv(csv, all, {});
    out.writeBytes("zeros.csv", csv.str());

    ordered_json summary;
    summary["p"] = cfg.p;
    summary["lambda"] = cfg.lambda;
    summary["m_hat"] = mHat;
    summary["m_lo"] = mLo;
    summary["m_hi"] = mHi;
    summary["rays"] = rays;
    summary["n_zeros"] = all.size();
    summary["max_residual"] = maxResidual;
    summary["winding_checks"] = windingChecks;
    summary["winding_mismatches"] = windingMismatches;
    out.writeJson("zeros_summary.json", summary);
    out.finish("zeros");

    std::cout << "zeros: " << all.size() << " rows over m in [" << mLo << ", " << mHi
              << "], m_hat = " << mHat << ", winding " << (windingChecks - windingMismatches)
              << "/" << windingChecks << " ok, max residual " << formatDouble(maxResidual)
              << "\n";
    return windingMismatches == 0 ? 0 : 1;
}

int cmdCritical(const RunConfig& cfg) {
    const RegionScheme s = schemeFor(cfg);
    const int mHat = calibrateMHat(s, 1024);
    auto [mLo, mHi] = cfg.mRange.empty() ? std::pair<int, int>{mHat + 1, mHat + 20}
                                         : parseMRange(cfg.mRange);
    if (mLo < 1 || mHi <= mLo)
        throw InvariantError("--m: need 1 <= lo < hi (two zeros bracket one critical point)");
    const std::vector<int> rays = parseRays(cfg.rays, s.p());

    std::vector<ZeroRecord> allZeros;
    std::vector<CriticalRecord> allCrits;
    bool interlaced = true;
    bool signsAlternate = true;
    double maxImagRel = 0.0;
    for (int ray : rays) {
        const std::vector<ZeroRecord> zs = findZerosOnRay(s, ray, mLo, mHi);
        const std::vector<CriticalRecord> cs = findCriticalPointsOnRay(s, ray, zs);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (!(zs[i].r < cs[i].r && cs[i].r < zs[i + 1].r)) interlaced = false;
            if (i > 0 && !(cs[i - 1].scaledValue * cs[i].scaledValue < 0.0))
                signsAlternate = false;
            // The restricted value is real by symmetry; measure how far the
            // full complex evaluation strays from the real axis.
            const double phase = evalFLog(s.params, cs[i].z).phase;
            maxImagRel = std::max(maxImagRel,
                                  std::min(std::abs(phase), kPi - std::abs(phase)));
        }
        allZeros.insert(allZeros.end(), zs.begin(), zs.end());
        allCrits.insert(allCrits.end(), cs.begin(), cs.end());
    }
    const bool realOk = maxImagRel <= 1e-8;

    OutputSet out(cfg);
    std::ostringstream csv;
    writeRecordsCsv(csv, allZeros, allCrits);
    out.writeBytes("critical.csv", csv.str());

    ordered_json summary;
    summary["p"] = cfg.p;
    summary["lambda"] = cfg.lambda;
    summary["m_hat"] = mHat;
    summary["m_lo"] = mLo;
    summary["m_hi"] = mHi;
    summary["rays"] = rays;
    summary["n_zeros"] = allZeros.size();
    summary["n_criticals"] = allCrits.size();
    summary["interlaced"] = interlaced;
    summary["signs_alternate"] = signsAlternate;
    summary["max_imag_rel"] = maxImagRel;
    summary["values_real"] = realOk;
    out.writeJson("critical_summary.json", summary);
    out.finish("critical");

    const bool pass = interlaced && signsAlternate && realOk;
    std::cout << "critical: " << allCrits.size() << " points between " << allZeros.size()
              << " zeros, interlaced = " << (interlaced ? "yes" : "NO")
              << ", alternating signs = " << (signsAlternate ? "yes" : "NO") << "\n";
    return pass ? 0 : 1;
}

int cmdPeriodic(const RunConfig& cfg) {
    if (cfg.itinerary.empty()) throw InvariantError("periodic: --s is required");
    const ItinerarySpec spec = parseItinerary(cfg.itinerary, cfg.symbolBound);
    if (!spec.preperiod.empty())
        throw InvariantError("periodic: itinerary must be purely periodic (no '|')");
    const RegionScheme s = wideSchemeFor(cfg);
    const PeriodicPointRecord rec = periodicPoint(s, spec.period, 1e-12, cfg.symbolBound);

    OutputSet out(cfg);
    ordered_json j = periodicPointToJson(rec);
    j["c"] = s.c;
    out.writeJson("periodic.json", j);
    out.finish("periodic");

    std::cout << "periodic " << formatItinerary(rec.itinerary) << ": z = ("
              << formatDouble(rec.z.real()) << ", " << formatDouble(rec.z.imag())
              << "), |multiplier| = " << formatDouble(std::abs(rec.multiplier)) << "\n";
    return 0;
}

int cmdItinerary(const RunConfig& cfg) {
    if (cfg.zText.empty()) throw InvariantError("itinerary: --z is required");
    const Complex z = parseComplexArg(cfg.zText);
    const RegionScheme s = wideSchemeFor(cfg);
    const double radius = cfg.radius.value_or(std::exp(s.c));
    const ItineraryResult res = itineraryOf(s, z, cfg.maxIter, radius);

    OutputSet out(cfg);
    ordered_json j;
    j["z"] = {z.real(), z.imag()};
    j["status"] = statusName(res.status);
    j["steps"] = res.steps;
    j["digits"] = res.digits;
    out.writeJson("itinerary.json", j);
    out.finish("itinerary");

    std::cout << "itinerary of (" << formatDouble(z.real()) << ", " << formatDouble(z.imag())
              << "): " << res.digits.size() << " digits, " << statusName(res.status) << "\n";
    return 0;
}

int cmdHair(const RunConfig& cfg) {
    if (cfg.itinerary.empty()) throw InvariantError("hair: --s is required");
    const ItinerarySpec spec = parseItinerary(cfg.itinerary, cfg.symbolBound);
    const RegionScheme s = wideSchemeFor(cfg);
    const double tol = 1e-10;

    const HairCurve curve = traceHair(s, spec, cfg.tMax, 200, tol);
    const HairCalibration cal = calibrateHairBounds(s, cfg.symbolBound);
    const HairPropertyReport rep = verifyHairProperties(s, curve, cal.qHat, cal.mHat);

    OutputSet out(cfg);
    std::ostringstream csv;
    writeHairCsv(csv, curve);
    out.writeBytes("hair.csv", csv.str());

    ordered_json manifest = hairManifestToJson(curve, tol, cal);
    manifest["c"] = s.c;
    manifest["properties"] = hairPropertyReportToJson(rep);
    out.writeJson("hair_manifest.json", manifest);
    out.finish("hair");

    std::cout << "hair " << formatItinerary(spec) << ": " << curve.samples.size()
              << " samples to t = " << formatDouble(cfg.tMax) << ", endpoint ("
              << formatDouble(curve.endpoint.real()) << ", "
              << formatDouble(curve.endpoint.imag()) << "), properties "
              << (rep.pass ? "pass" : "FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmdRender(const RunConfig& cfg) {
    const RegionScheme s = schemeFor(cfg);
    const GridWindow win = parseWindow(cfg.window);
    const auto [width, height] = parseSize(cfg.size);
    const double radius = cfg.radius.value_or(std::exp(std::min(s.c, kMaxExp)));

    const EscapeGrid grid = classifyGrid(s, win, width, height, cfg.maxIter, radius,
                                         cfg.workers);
    const std::string bytes = renderPpmBytes(grid);

    OutputSet out(cfg);
    out.writeBytes("render.ppm", bytes);

    ordered_json summary = gridSummaryToJson(grid);
    summary["p"] = cfg.p;
    summary["lambda"] = cfg.lambda;
    summary["max_iter"] = cfg.maxIter;
    summary["escape_radius"] = radius;
    summary["workers"] = cfg.workers;
    summary["ppm_fnv1a64"] = hashHex(fnv1a64(bytes.data(), bytes.size()));
    out.writeJson("render_summary.json", summary);
    out.finish("render");

    std::cout << "render: " << width << "x" << height << ", "
              << summary["escaped"].get<std::size_t>() << " escaped / "
              << summary["bounded"].get<std::size_t>() << " bounded, ppm hash "
              << summary["ppm_fnv1a64"].get<std::string>() << "\n";
    return 0;
}

int cmdVerify(const RunConfig& cfg) {
    ordered_json checks = ordered_json::array();
    bool allPass = true;
    auto record = [&checks, &allPass](const std::string& name, bool pass,
                                      const ordered_json& detail) {
        ordered_json row;
        row["name"] = name;
        row["pass"] = pass;
        for (const auto& [k, v] : detail.items()) row[k] = v;
        checks.push_back(std::move(row));
        allPass = allPass && pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
    };

    std::optional<RegionScheme> maybeScheme;
    try {
        maybeScheme.emplace(schemeFor(cfg));
        ordered_json d;
        d["scheme"] = schemeToJson(*maybeScheme);
        record("scheme-invariants", true, d);
    } catch (const InvariantError& e) {
        ordered_json d;
        d["error"] = e.what();
        record("scheme-invariants", false, d);
    }

    if (maybeScheme) {
        const RegionScheme& s = *maybeScheme;

        {
            // Single-term domination on the sampled outer region; equality
            // holds on strip edges, hence the one-ulp allowance.
            const double margin = minSingleTermMargin(s, 256, 400);
            ordered_json d;
            d["min_margin"] = margin;
            record("single-term-inequality", margin >= -1e-9, d);
        }

        {
            const ExpansionReport rep = checkExpansion(s, 96, 144);
            ordered_json d;
            d["min_abs_f_prime"] = rep.minAbsFPrime;
            d["min_abs_z_ratio"] = rep.minAbsZRatio;
            d["eps_hat"] = rep.epsHat;
            record("expansion-inequalities", rep.pass(), d);
        }

        {
            const int mHat = calibrateMHat(s, 1024);
            bool pass = true;
            double minMargin = std::numeric_limits<double>::infinity();
            for (int m = mHat + 1; m <= mHat + 10; ++m) {
                const RoucheReport rep = verifyRouche(s, m, 1024);
                pass = pass && rep.pass();
                minMargin = std::min(minMargin, rep.minMargin);
            }
            ordered_json d;
            d["m_hat"] = mHat;
            d["m_range"] = {mHat + 1, mHat + 10};
            d["min_margin"] = minMargin;
            record("rouche-rectangles", pass, d);
        }

        {
            const RegionScheme wide = wideSchemeFor(cfg);
            const CoveringReport rep = verifyCovering(wide, cfg.symbolBound, 512);
            record("covering-traps", rep.horizontalPass && rep.crossingsPass,
                   coveringReportToJson(rep));
        }

        {
            const RegionScheme wide = wideSchemeFor(cfg);
            const HairCalibration cal = calibrateHairBounds(wide, cfg.symbolBound);
            ItinerarySpec spec;
            spec.period = {2};
            spec.bound = cfg.symbolBound;
            const HairCurve curve = traceHair(wide, spec, 20.0, 120);
            const HairPropertyReport rep = verifyHairProperties(wide, curve, cal.qHat, cal.mHat);
            ordered_json d = hairPropertyReportToJson(rep);
            d["q_hat"] = cal.qHat;
            d["m_hat"] = cal.mHat;
            record("hair-properties", rep.pass, d);
        }

        {
            std::mt19937 rng(static_cast<std::uint32_t>(cfg.seed));
            std::uniform_real_distribution<double> radial(0.0, 1.0), angular(-kPi, kPi);
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const Complex z = std::polar(20.0 * std::sqrt(radial(rng)), angular(rng));
                const Complex a = evalF(s.params, z);
                const Complex b = evalF(s.params, s.params.omega(1) * z);
                worst = std::max(worst, std::abs(b - a) / (1.0 + std::abs(a)));
            }
            ordered_json d;
            d["worst_rel"] = worst;
            d["n_samples"] = 1000;
            record("rotation-symmetry-sampler", worst <= 1e-12, d);
        }

        {
            std::mt19937 rng(static_cast<std::uint32_t>(cfg.seed) + 1);
            std::uniform_real_distribution<double> radial(0.0, 1.0), angular(-kPi, kPi);
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) {
                const Complex z = std::polar(3.0 * std::sqrt(radial(rng)), angular(rng));
                const Complex a = evalF(s.params, z);
                const Complex b = evalG(s.params, std::pow(z, s.p()));
                worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
            }
            ordered_json d;
            d["worst_rel"] = worst;
            d["n_samples"] = 100;
            record("reduced-identity-sampler", worst <= 1e-9, d);
        }
    }

    ordered_json report;
    report["p"] = cfg.p;
    report["lambda"] = cfg.lambda;
    report["K"] = cfg.symbolBound;
    report["seed"] = cfg.seed;
    report["checks"] = checks;
    report["pass"] = allPass;

    OutputSet out(cfg);
    out.writeJson("verify_report.json", report);
    out.finish("verify");

    std::cout << "verify: " << (allPass ? "all checks passed" : "FAILED") << "\n";
    return allPass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for p-fold exponential sums"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto* optP = app.add_option("--p", cfg.p, "number of exponentials (>= 3)");
    auto* optLambda = app.add_option("--lambda", cfg.lambda, "positive scale factor");
    auto* optK = app.add_option("--K", cfg.symbolBound, "symbol bound for itineraries");
    double cValue = 0.0;
    auto* optC = app.add_option("--c", cValue, "right-edge override for the region scheme");
    auto* optM = app.add_option("--m", cfg.mRange, "rectangle range 'lo..hi' (default m_hat+1..m_hat+20)");
    auto* optS = app.add_option("--s", cfg.itinerary, "itinerary, e.g. '2' or '1,-2' or 'pre|per'");
    auto* optTmax = app.add_option("--tmax", cfg.tMax, "hair parameter upper end");
    auto* optWindow = app.add_option("--window", cfg.window, "render window 'reMin,reMax,imMin,imMax'");
    auto* optSize = app.add_option("--size", cfg.size, "grid size 'N' or 'WxH'");
    auto* optMaxIter = app.add_option("--max-iter", cfg.maxIter, "iteration cap per pixel/orbit");
    double radiusValue = 0.0;
    auto* optRadius = app.add_option("--radius", radiusValue, "escape radius (default e^c)");
    auto* optWorkers = app.add_option("--workers", cfg.workers, "row-parallel worker cap");
    auto* optOut = app.add_option("--out", cfg.outDir, "output directory (default $BOUQUET_LAB_OUT or '.')");
    auto* optConfig = app.add_option("--config", cfg.configPath, "JSON config merged under explicit flags");
    auto* optSeed = app.add_option("--seed", cfg.seed, "seed for sampling-based verifiers");
    auto* optZ = app.add_option("--z", cfg.zText, "complex point 're,im'");
    auto* optRays = app.add_option("--rays", cfg.rays, "ray indices: 'all', or comma list");

    CLI::App* subZeros = app.add_subcommand("zeros", "locate zeros along rays with winding cross-checks");
    CLI::App* subCritical = app.add_subcommand("critical", "critical points interlacing the ray zeros");
    CLI::App* subPeriodic = app.add_subcommand("periodic", "periodic point of a repeating itinerary");
    CLI::App* subItinerary = app.add_subcommand("itinerary", "forward itinerary of a point");
    CLI::App* subHair = app.add_subcommand("hair", "trace one hair curve and audit its properties");
    CLI::App* subRender = app.add_subcommand("render", "escape-time image over a pixel window");
    CLI::App* subVerify = app.add_subcommand("verify", "run the property suite, exit 0 iff all pass");
    for (CLI::App* sub : {subZeros, subCritical, subPeriodic, subItinerary, subHair, subRender,
                          subVerify})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        // Config file values fill in only where no explicit flag was given.
        if (optConfig->count() > 0) {
            std::ifstream in(cfg.configPath);
            if (!in) throw IoError("cannot open config " + cfg.configPath);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw InvariantError("config parse error: " + std::string(e.what()));
            }
            try {
                if (optP->count() == 0 && j.contains("p")) cfg.p = j.at("p").get<int>();
                if (optLambda->count() == 0 && j.contains("lambda"))
                    cfg.lambda = j.at("lambda").get<double>();
                if (optK->count() == 0 && j.contains("K"))
                    cfg.symbolBound = j.at("K").get<int>();
                if (optC->count() == 0 && j.contains("c")) cfg.c = j.at("c").get<double>();
                if (optM->count() == 0 && j.contains("m"))
                    cfg.mRange = j.at("m").is_string() ? j.at("m").get<std::string>()
                                                       : std::to_string(j.at("m").get<int>());
                if (optS->count() == 0 && j.contains("s")) cfg.itinerary = j.at("s").get<std::string>();
                if (optTmax->count() == 0 && j.contains("tmax"))
                    cfg.tMax = j.at("tmax").get<double>();
                if (optWindow->count() == 0 && j.contains("window"))
                    cfg.window = j.at("window").get<std::string>();
                if (optSize->count() == 0 && j.contains("size"))
                    cfg.size = j.at("size").is_string() ? j.at("size").get<std::string>()
                                                        : std::to_string(j.at("size").get<int>());
                if (optMaxIter->count() == 0 && j.contains("max_iter"))
                    cfg.maxIter = j.at("max_iter").get<int>();
                if (optRadius->count() == 0 && j.contains("radius"))
                    cfg.radius = j.at("radius").get<double>();
                if (optWorkers->count() == 0 && j.contains("workers"))
                    cfg.workers = j.at("workers").get<int>();
                if (optOut->count() == 0 && j.contains("out"))
                    cfg.outDir = j.at("out").get<std::string>();
                if (optSeed->count() == 0 && j.contains("seed"))
                    cfg.seed = j.at("seed").get<std::uint64_t>();
                if (optZ->count() == 0 && j.contains("z")) cfg.zText = j.at("z").get<std::string>();
                if (optRays->count() == 0 && j.contains("rays"))
                    cfg.rays = j.at("rays").is_string() ? j.at("rays").get<std::string>()
                                                        : std::to_string(j.at("rays").get<int>());
                if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
                if (j.contains("nu")) cfg.nu = j.at("nu").get<double>();
                if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
                if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
                if (j.contains("safety")) cfg.safety = j.at("safety").get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw InvariantError("config type error: " + std::string(e.what()));
            }
        }
        if (optC->count() > 0) cfg.c = cValue;
        if (optRadius->count() > 0) cfg.radius = radiusValue;
        if (cfg.outDir.empty()) {
            const char* env = std::getenv("BOUQUET_LAB_OUT");
            cfg.outDir = env && *env ? env : ".";
        }
        if (cfg.workers < 1) throw InvariantError("--workers must be >= 1");
        if (cfg.symbolBound < 1) throw InvariantError("--K must be >= 1");

        if (app.got_subcommand(subZeros)) cfg.command = "zeros";
        else if (app.got_subcommand(subCritical)) cfg.command = "critical";
        else if (app.got_subcommand(subPeriodic)) cfg.command = "periodic";
        else if (app.got_subcommand(subItinerary)) cfg.command = "itinerary";
        else if (app.got_subcommand(subHair)) cfg.command = "hair";
        else if (app.got_subcommand(subRender)) cfg.command = "render";
        else cfg.command = "verify";

        if (cfg.command == "zeros") return cmdZeros(cfg);
        if (cfg.command == "critical") return cmdCritical(cfg);
        if (cfg.command == "periodic") return cmdPeriodic(cfg);
        if (cfg.command == "itinerary") return cmdItinerary(cfg);
        if (cfg.command == "hair") return cmdHair(cfg);
        if (cfg.command == "render") return cmdRender(cfg);
        return cmdVerify(cfg);
    } catch (const InvariantError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
