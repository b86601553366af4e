#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

int runCli(const std::string& args) {
    const std::string cmd = std::string(BOUQUETLAB_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path freshDir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("bouquet_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

nlohmann::json readJson(const fs::path& p) {
    std::ifstream in(p);
    nlohmann::json j;
    in >> j;
    return j;
}

std::string readBytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    const fs::path dir = freshDir("usage");
    REQUIRE(runCli("zeros --p 2 --out " + dir.string()) == 2);
    REQUIRE(runCli("--p 3") == 2);
    REQUIRE(runCli("zeros --no-such-flag 1 --out " + dir.string()) == 2);
    REQUIRE(runCli("render --size 0x4 --out " + dir.string()) == 2);
    REQUIRE(runCli("periodic --s \"1|2\" --out " + dir.string()) == 2);
}

TEST_CASE("zeros command cross-checks winding counts") {
    const fs::path dir = freshDir("zeros");
    REQUIRE(runCli("zeros --p 3 --m 5..9 --out " + dir.string()) == 0);

    const nlohmann::json summary = readJson(dir / "zeros_summary.json");
    REQUIRE(summary.at("n_zeros").get<int>() == 5);
    REQUIRE(summary.at("winding_checks").get<int>() == 5);
    REQUIRE(summary.at("winding_mismatches").get<int>() == 0);
    REQUIRE(summary.at("max_residual").get<double>() < 1e-9);

    std::ifstream csv(dir / "zeros.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    REQUIRE(lines == 6);

    const nlohmann::json sidecar = readJson(dir / "zeros.sidecar.json");
    REQUIRE(sidecar.at("config").at("p").get<int>() == 3);
    REQUIRE(sidecar.at("outputs").size() == 2);
}

TEST_CASE("hair endpoint agrees with the periodic point") {
    const fs::path hd = freshDir("hair");
    const fs::path pd = freshDir("periodic");
    REQUIRE(runCli("hair --p 3 --s 2 --tmax 12 --out " + hd.string()) == 0);
    REQUIRE(runCli("periodic --p 3 --s 2 --out " + pd.string()) == 0);

    const nlohmann::json manifest = readJson(hd / "hair_manifest.json");
    const nlohmann::json cycle = readJson(pd / "periodic.json");
    const std::complex<double> he(manifest.at("endpoint")[0].get<double>(),
                                  manifest.at("endpoint")[1].get<double>());
    const std::complex<double> pz(cycle.at("z")[0].get<double>(),
                                  cycle.at("z")[1].get<double>());
    REQUIRE(std::abs(he - pz) < 1e-8);
    REQUIRE(cycle.at("multiplier_abs").get<double>() > 1.0);
    REQUIRE(manifest.at("properties").at("pass").get<bool>());

    // The first curve row is the t = 1 endpoint itself.
    std::ifstream csv(hd / "hair.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    REQUIRE(first.rfind("1,", 0) == 0);
}

TEST_CASE("conjugate itineraries trace mirror-image hairs") {
    const fs::path da = freshDir("conj_a");
    const fs::path db = freshDir("conj_b");
    REQUIRE(runCli("hair --p 3 --s 1,-1 --tmax 8 --out " + da.string()) == 0);
    REQUIRE(runCli("hair --p 3 --s -1,1 --tmax 8 --out " + db.string()) == 0);

    std::ifstream ca(da / "hair.csv"), cb(db / "hair.csv");
    std::string la, lb;
    std::getline(ca, la);
    std::getline(cb, lb);
    int rows = 0;
    while (std::getline(ca, la) && std::getline(cb, lb)) {
        double ta, ra, ia, tb, rb, ib;
        REQUIRE(std::sscanf(la.c_str(), "%lf,%lf,%lf", &ta, &ra, &ia) == 3);
        REQUIRE(std::sscanf(lb.c_str(), "%lf,%lf,%lf", &tb, &rb, &ib) == 3);
        REQUIRE(ta == tb);
        REQUIRE(std::abs(ra - rb) < 1e-9);
        REQUIRE(std::abs(ia + ib) < 1e-9);
        ++rows;
    }
    REQUIRE(rows > 100);
}

TEST_CASE("render is deterministic across workers and reruns") {
    const fs::path d1 = freshDir("render1");
    const fs::path d8 = freshDir("render8");
    const fs::path d1b = freshDir("render1b");
    REQUIRE(runCli("render --p 3 --size 48 --workers 1 --out " + d1.string()) == 0);
    REQUIRE(runCli("render --p 3 --size 48 --workers 8 --out " + d8.string()) == 0);
    REQUIRE(runCli("render --p 3 --size 48 --workers 1 --out " + d1b.string()) == 0);

    const std::string ppm1 = readBytes(d1 / "render.ppm");
    REQUIRE(ppm1.size() > 0);
    REQUIRE(ppm1 == readBytes(d8 / "render.ppm"));
    REQUIRE(ppm1 == readBytes(d1b / "render.ppm"));

    const nlohmann::json summary = readJson(d1 / "render_summary.json");
    REQUIRE(summary.at("width").get<int>() == 48);
    const nlohmann::json sidecar = readJson(d1 / "render.sidecar.json");
    REQUIRE(sidecar.at("outputs")[0].at("fnv1a64").get<std::string>() ==
            readJson(d8 / "render.sidecar.json").at("outputs")[0].at("fnv1a64").get<std::string>());
}

TEST_CASE("verify reports machine-readable checks") {
    const fs::path dir = freshDir("verify");
    REQUIRE(runCli("verify --p 3 --out " + dir.string()) == 0);
    const nlohmann::json report = readJson(dir / "verify_report.json");
    REQUIRE(report.at("pass").get<bool>());
    REQUIRE(report.at("checks").size() >= 8);
    for (const auto& check : report.at("checks")) REQUIRE(check.at("pass").get<bool>());

    // A scheme constant pushed below its formula bound is caught up front
    // and reported as a failing check.
    const fs::path tdir = freshDir("verify_tampered");
    std::ofstream cfg(tdir / "cfg.json");
    cfg << "{\"tau\": 1.0}\n";
    cfg.close();
    REQUIRE(runCli("verify --p 3 --config " + (tdir / "cfg.json").string() + " --out " +
                   tdir.string()) == 1);
    const nlohmann::json bad = readJson(tdir / "verify_report.json");
    REQUIRE_FALSE(bad.at("pass").get<bool>());
    REQUIRE(bad.at("checks")[0].at("name").get<std::string>() == "scheme-invariants");
    REQUIRE_FALSE(bad.at("checks")[0].at("pass").get<bool>());
}

TEST_CASE("config file merges under explicit flags") {
    const fs::path dir = freshDir("config");
    std::ofstream cfg(dir / "cfg.json");
    cfg << "{\"p\": 4, \"size\": \"16\", \"max_iter\": 20}\n";
    cfg.close();
    REQUIRE(runCli("render --config " + (dir / "cfg.json").string() + " --size 24 --out " +
                   dir.string()) == 0);
    const nlohmann::json echo = readJson(dir / "render.sidecar.json").at("config");
    REQUIRE(echo.at("p").get<int>() == 4);
    REQUIRE(echo.at("size").get<std::string>() == "24");
    REQUIRE(echo.at("max_iter").get<int>() == 20);
    const nlohmann::json summary = readJson(dir / "render_summary.json");
    REQUIRE(summary.at("width").get<int>() == 24);
}

TEST_CASE("environment variable supplies the output directory") {
    const fs::path dir = freshDir("envout");
    REQUIRE(setenv("BOUQUET_LAB_OUT", dir.string().c_str(), 1) == 0);
    const int code = runCli("itinerary --p 3 --z 0.1,0.2 --max-iter 6");
    REQUIRE(unsetenv("BOUQUET_LAB_OUT") == 0);
    REQUIRE(code == 0);
    REQUIRE(fs::exists(dir / "itinerary.json"));
    const nlohmann::json j = readJson(dir / "itinerary.json");
    REQUIRE(j.at("digits").size() > 0);
    REQUIRE(j.at("digits")[0].get<int>() == 0);
}
