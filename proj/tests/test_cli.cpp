#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "app.hpp"
#include "ufrkit/data.hpp"

using namespace ufrkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = UFRKIT_FIXTURE_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ufrkit");
    std::ostringstream out, err;
    const int rc = ufrkit::cli::run(args, out, err);
    return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A synthetic panel shared by the pipeline tests, generated once per process.
struct Panel {
    fs::path dir;
    Panel() : dir(fs::temp_directory_path() / ("ufrkit_test_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto d = dir.string();
        REQUIRE(invoke({"synth", "--out-dir", d, "--seed", "5", "--months", "120"}).code == 0);
        REQUIRE(invoke({"ufr", "--out-dir", d, "--yields", d + "/yields.csv", "--method", "sdf"}).code == 0);
    }
    ~Panel() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::vector<std::string> inputs() const {
        return {"--yields", path("yields.csv"), "--ufr",    path("ufr_sdf.csv"),
                "--macro",  path("macro.csv"),  "--groups", path("groups.csv")};
    }
};

const Panel& panel() {
    static const Panel p;
    return p;
}

std::vector<std::string> forecast_args(const std::string& out_dir, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{"forecast", "--out-dir", out_dir};
    const auto in = panel().inputs();
    a.insert(a.end(), in.begin(), in.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
}

json error_of(const Result& r) { return json::parse(r.err).at("error"); }

}  // namespace

TEST_CASE("ufr on the flat-curve fixture gives a constant column") {
    const auto out = panel().path("flat");
    for (const std::string method : {"sdf", "sfr", "syc", "zjw"}) {
        CAPTURE(method);
        const auto r = invoke({"ufr", "--out-dir", out, "--yields", (kFixtures / "flat_yields.csv").string(), "--method",
                            method, "--f-prior", "0.03"});
        REQUIRE(r.code == 0);
        const auto s = load_ufr_series(out + "/ufr_" + method + ".csv");
        REQUIRE(s.size() == 6);
        for (double f : s.f_inf) CHECK(f == s.f_inf[0]);
        CHECK(std::abs(s.f_inf[0] - 0.03) < 1e-8);
        CHECK(fs::exists(out + "/alpha_" + method + ".csv"));
    }
}

TEST_CASE("forecast with no out-of-sample rows is a validation error") {
    const auto n = load_yields(panel().path("yields.csv")).size();
    // The design has n - 2 rows; a window that long leaves nothing to forecast.
    const auto r = invoke(forecast_args(panel().path("none"), {"--window", std::to_string(n - 2)}));
    CHECK(r.code == ufrkit::cli::kExitUsage);
    CHECK(error_of(r).at("kind") == "validation");
    CHECK_FALSE(fs::exists(panel().path("none/report.json")));
}

TEST_CASE("usage errors exit 2 with an error object") {
    const auto bogus = invoke({"stats", "--out-dir", panel().path("x"), "--yields", panel().path("yields.csv"), "--bogus"});
    CHECK(bogus.code == ufrkit::cli::kExitUsage);
    CHECK(error_of(bogus).at("kind") == "usage");
    CHECK(invoke({}).code == ufrkit::cli::kExitUsage);
    CHECK(invoke({"nonsense"}).code == ufrkit::cli::kExitUsage);
    const auto missing = invoke({"forecast", "--out-dir", panel().path("x"), "--yields", panel().path("yields.csv")});
    CHECK(missing.code == ufrkit::cli::kExitUsage);
    CHECK(error_of(missing).at("message").get<std::string>().find("--ufr") != std::string::npos);
    CHECK(invoke({"ufr", "--out-dir", panel().path("x"), "--yields", panel().path("yields.csv"), "--method", "nelson"})
              .code == ufrkit::cli::kExitUsage);
    CHECK(invoke({"--help"}).code == ufrkit::cli::kExitOk);
}

TEST_CASE("runtime failures exit 1 and name the error kind") {
    const auto r = invoke({"ufr", "--out-dir", panel().path("x"), "--yields", panel().path("absent.csv")});
    CHECK(r.code == ufrkit::cli::kExitRuntime);
    CHECK(error_of(r).at("kind") == "data.io");
}

TEST_CASE("the evaluation report carries the fixed keys") {
    const auto out = panel().path("ridge");
    REQUIRE(invoke(forecast_args(out, {"--model", "ridge"})).code == 0);
    const auto rep = json::parse(slurp(out + "/report.json"));
    for (const char* key : {"rmse", "mae", "r_oos", "cw_stat", "cw_band", "n"}) CHECK(rep.contains(key));
    CHECK(rep.at("model") == "Ridge");
    const auto run = load_forecast_run(out + "/forecast_run.csv");
    CHECK(run.size() == rep.at("n").get<std::size_t>());

    const auto curve = panel().path("curve");
    REQUIRE(invoke({"curve-forecast", "--out-dir", curve, "--yields", panel().path("yields.csv"), "--ufr",
                 panel().path("ufr_sdf.csv"), "--run", out + "/forecast_run.csv"})
                .code == 0);
    const auto cr = json::parse(slurp(curve + "/curve_report.json"));
    REQUIRE(cr.at("per_maturity").size() == 9);
    CHECK(cr.at("per_maturity")[0].contains("r_oos"));
    CHECK(cr.at("per_maturity")[8].at("maturity") == 30.0);
}

TEST_CASE("config file values apply and flags override them") {
    const auto cfg = panel().path("lasso.ini");
    std::ofstream(cfg) << "model = lasso\nlambda = 0.5\nwindow = 90\n";
    const auto a = panel().path("cfg_a");
    REQUIRE(invoke(forecast_args(a, {"--config", cfg})).code == 0);
    const auto ra = json::parse(slurp(a + "/report.json"));
    CHECK(ra.at("model") == "Lasso");
    CHECK(ra.at("window") == 90);

    const auto b = panel().path("cfg_b");
    REQUIRE(invoke(forecast_args(b, {"--config", cfg, "--window", "100"})).code == 0);
    CHECK(json::parse(slurp(b + "/report.json")).at("window") == 100);

    const auto sect = panel().path("section.ini");
    std::ofstream(sect) << "[forecast]\nmodel = pcr\ncomponents = 2\n";
    REQUIRE(invoke(forecast_args(panel().path("cfg_c"), {"--config", sect})).code == 0);
    CHECK(json::parse(slurp(panel().path("cfg_c/report.json"))).at("model") == "PCR");

    const auto bad = panel().path("bad.ini");
    std::ofstream(bad) << "colour = blue\n";
    CHECK(invoke(forecast_args(panel().path("cfg_d"), {"--config", bad})).code == ufrkit::cli::kExitUsage);
    CHECK(invoke(forecast_args(panel().path("cfg_d"), {"--config", panel().path("nope.ini")})).code == ufrkit::cli::kExitUsage);
}

TEST_CASE("UFRKIT_SEED overrides the seed flag") {
    const auto d = panel().dir;
    REQUIRE(invoke({"synth", "--out-dir", (d / "s5").string(), "--seed", "5", "--months", "60"}).code == 0);
    ::setenv("UFRKIT_SEED", "5", 1);
    const auto r = invoke({"synth", "--out-dir", (d / "s9").string(), "--seed", "9", "--months", "60"});
    ::unsetenv("UFRKIT_SEED");
    REQUIRE(r.code == 0);
    CHECK(slurp(d / "s5/yields.csv") == slurp(d / "s9/yields.csv"));
    REQUIRE(invoke({"synth", "--out-dir", (d / "s9b").string(), "--seed", "9", "--months", "60"}).code == 0);
    CHECK(slurp(d / "s5/yields.csv") != slurp(d / "s9b/yields.csv"));
}

TEST_CASE("serial and parallel runs write identical files") {
    const auto a = panel().path("par");
    const auto s = panel().path("ser");
    const std::vector<std::string> m{"--model", "forest", "--trees", "20", "--seed", "8"};
    REQUIRE(invoke(forecast_args(a, m)).code == 0);
    auto serial = m;
    serial.push_back("--serial");
    REQUIRE(invoke(forecast_args(s, serial)).code == 0);
    CHECK(slurp(a + "/forecast_run.csv") == slurp(s + "/forecast_run.csv"));
    CHECK(slurp(a + "/report.json") == slurp(s + "/report.json"));
}

TEST_CASE("explain and stats outputs") {
    const auto ex = panel().path("explain");
    auto args = forecast_args(ex, {"--model", "ridge", "--instances", "4", "--background", "16"});
    args[0] = "explain";
    REQUIRE(invoke(args).code == 0);
    for (const char* f : {"attributions.csv", "instances.csv", "groups_abs.csv", "groups_signed.csv"})
        CHECK(fs::exists(ex + "/" + f));

    const auto st = panel().path("stats");
    REQUIRE(invoke({"stats", "--out-dir", st, "--yields", panel().path("yields.csv"), "--ufr", panel().path("ufr_sdf.csv")})
                .code == 0);
    CHECK(slurp(st + "/summary.csv").rfind("series,transform,n,", 0) == 0);
    CHECK(fs::exists(st + "/correlation.csv"));
}
