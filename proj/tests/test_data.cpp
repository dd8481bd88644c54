#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <string>
#include <unistd.h>

#include "ufrkit/data.hpp"
#include "ufrkit/error.hpp"

using namespace ufrkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("ufrkit_test_data_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = path / name;
        std::ofstream(p) << text;
        return p;
    }
};

std::string error_kind(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return "none";
}

std::string error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

SynthConfig short_config(std::uint64_t seed) {
    SynthConfig c;
    c.n_months = 72;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("two-row yields file") {
    TempDir dir;
    const auto p = dir.write("y.csv", "date,y1,y5,y10\n2020-01,0.01,0.02,0.025\n2020-02,0.011,0.021,0.026\n");
    const auto panel = load_yields(p);
    CHECK(panel.size() == 2);
    CHECK(panel.grid.size() == 3);
    CHECK(panel.grid[2] == 10.0);
    CHECK(panel.yields(1, 1) == 0.021);
    CHECK(panel.dates[0] == "2020-01");
}

TEST_CASE("loader errors are distinct and located") {
    TempDir dir;
    CHECK(error_kind([&] { (void)load_yields(dir.write("a.csv", "when,y1\n2020-01,0.01\n")); }) == "data.header");
    CHECK(error_kind([&] { (void)load_yields(dir.write("b.csv", "date,ten\n2020-01,0.01\n")); }) == "data.header");
    CHECK(error_kind([&] { (void)load_yields(dir.path / "missing.csv"); }) == "data.io");
    const auto bad = dir.write("c.csv", "date,y1,y2\n2020-01,0.01,0.02\n2020-02,0.01,abc\n");
    CHECK(error_kind([&] { (void)load_yields(bad); }) == "data.parse");
    const auto msg = error_message([&] { (void)load_yields(bad); });
    CHECK(msg.find("c.csv:3") != std::string::npos);
    CHECK(msg.find("y2") != std::string::npos);
    CHECK(error_kind([&] { (void)load_yields(dir.write("d.csv", "date,y1\n2020-01,0.01\n2020-01,0.02\n")); }) ==
          "data.duplicate_date");
    CHECK(error_kind([&] { (void)load_yields(dir.write("e.csv", "date,y1\n2020-01,0.01,0.3\n")); }) == "data.parse");
    CHECK(error_kind([&] { (void)load_yields(dir.write("f.csv", "")); }) == "data.header");
}

TEST_CASE("macro variables must all be mapped to a known group") {
    TempDir dir;
    const auto groups = load_groups(dir.write("g.csv", "variable,group\nip,Output\ncpi,Price Index\n"));
    CHECK(groups.at("cpi") == "Price Index");
    const auto macro_path = dir.write("m.csv", "date,ip,cpi,m2\n2020-01,1,2,3\n");
    const auto msg = error_message([&] { (void)load_macro(macro_path, groups); });
    CHECK(msg.find("m2") != std::string::npos);
    CHECK(error_kind([&] { (void)load_macro(macro_path, groups); }) == "data.mapping");
    CHECK(error_kind([&] { (void)load_groups(dir.write("h.csv", "variable,group\nip,Weather\n")); }) ==
          "data.mapping");
    CHECK(error_kind([&] { (void)load_groups(dir.write("i.csv", "name,group\nip,Output\n")); }) == "data.header");

    const auto ok = load_macro(dir.write("n.csv", "date,ip,cpi\n2020-01,1.5,2\n2020-02,1.25,\"2.5\"\n"), groups);
    CHECK(ok.size() == 2);
    CHECK(ok.groups == std::vector<std::string>{"Output", "Price Index"});
    CHECK(ok.values(1, 1) == 2.5);
}

TEST_CASE("align keeps the common dates in yield order") {
    TempDir dir;
    const auto y = load_yields(dir.write("y.csv", "date,y1,y2\n2020-01,0.01,0.02\n2020-02,0.011,0.021\n2020-03,0.012,0.022\n"));
    GroupMap g{{"ip", "Output"}};
    const auto m = load_macro(dir.write("m.csv", "date,ip\n2020-02,5\n2020-03,6\n2020-04,7\n"), g);
    const auto [ya, ma] = align(y, m);
    CHECK(ya.dates == std::vector<std::string>{"2020-02", "2020-03"});
    CHECK(ma.dates == ya.dates);
    CHECK(ya.yields(0, 0) == 0.011);
    CHECK(ma.values(1, 0) == 6.0);
    const auto none = load_macro(dir.write("z.csv", "date,ip\n2019-01,5\n"), g);
    CHECK(error_kind([&] { (void)align(y, none); }) == "data.alignment");
}

TEST_CASE("emitted CSV files reload exactly") {
    TempDir dir;
    const auto s = synth_generate(short_config(3));

    write_yields(dir.path / "yields.csv", s.yields);
    const auto y = load_yields(dir.path / "yields.csv");
    CHECK(y.dates == s.yields.dates);
    CHECK(std::ranges::equal(y.grid.maturities(), s.yields.grid.maturities()));
    CHECK(y.yields == s.yields.yields);

    write_groups(dir.path / "groups.csv", s.macro);
    write_macro(dir.path / "macro.csv", s.macro);
    const auto m = load_macro(dir.path / "macro.csv", load_groups(dir.path / "groups.csv"));
    CHECK(m.names == s.macro.names);
    CHECK(m.groups == s.macro.groups);
    CHECK(m.values == s.macro.values);

    UfrSeries z;
    z.method = UfrMethod::ZJW;
    z.dates = {"2020-01", "2020-02", "2020-03"};
    z.f_inf = {0.0412345678901234, std::nan(""), 1.0 / 3.0};
    z.alpha_path = {0.123, std::nan(""), 0.2};
    z.flagged = {false, false, true};
    z.failures = {"", "no root, after 2 expansions", ""};
    write_ufr_series(dir.path / "ufr.csv", z);
    const auto zr = load_ufr_series(dir.path / "ufr.csv");
    CHECK(zr.method == UfrMethod::ZJW);
    CHECK(zr.dates == z.dates);
    CHECK(zr.f_inf[0] == z.f_inf[0]);
    CHECK(std::isnan(zr.f_inf[1]));
    CHECK(zr.f_inf[2] == z.f_inf[2]);
    CHECK(zr.alpha_path[2] == 0.2);
    CHECK(zr.flagged == z.flagged);
    CHECK(zr.failures == z.failures);

    write_ufr_series(dir.path / "truth.csv", s.truth);
    const auto tr = load_ufr_series(dir.path / "truth.csv");
    CHECK(tr.f_inf == s.truth.f_inf);
    CHECK(tr.alpha_path.empty());

    ForecastRun run;
    run.dates = {"2020-04", "2020-05"};
    run.rows = {40, 41};
    run.predictions = {1e-5, -2.5e-7};
    run.actuals = {0.1 + 0.2, -1.0 / 7.0};
    run.benchmark = {0.0, 0.0};
    run.window = 40;
    write_forecast_run(dir.path / "run.csv", run);
    const auto rr = load_forecast_run(dir.path / "run.csv");
    CHECK(rr.dates == run.dates);
    CHECK(rr.rows == run.rows);
    CHECK(rr.predictions == run.predictions);
    CHECK(rr.actuals == run.actuals);
    CHECK(rr.window == 40);
}

TEST_CASE("number formatting") {
    CHECK(format_exact(0.1) == "0.1");
    CHECK(std::stod(format_exact(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_report(1.0 / 3.0) == "0.3333333333");
    CHECK(format_report(std::nan("")) == "nan");
}

TEST_CASE("forecast design rows") {
    const auto s = synth_generate(short_config(4));
    const auto levels = s.truth.reported();
    const auto d = build_design(s.yields, levels, &s.macro);
    const auto n = s.yields.size();
    CHECK(d.data.rows() == n - 2);
    CHECK(d.data.cols() == s.yields.grid.size() + s.macro.names.size());
    CHECK(d.data.names[0] == "dy1");
    CHECK(d.data.groups[0] == "yields");
    CHECK(d.data.groups.back() == s.macro.groups.back());
    CHECK(d.origin[0] == 1);
    CHECK(d.target_dates[0] == s.yields.dates[2]);
    CHECK(d.data.x(0, 0) == s.yields.yields(1, 0) - s.yields.yields(0, 0));
    CHECK(d.data.x(4, 9) == s.macro.values(5, 0));
    CHECK(d.data.y[4] == levels[6] - levels[5]);

    const auto yo = build_design(s.yields, levels, nullptr);
    CHECK(yo.data.cols() == s.yields.grid.size());
    CHECK_THROWS_AS((void)build_design(s.yields, std::vector<double>(3, 0.0), nullptr), DomainError);
}

TEST_CASE("synthetic data is deterministic in the seed") {
    const auto a = synth_generate(short_config(8));
    const auto b = synth_generate(short_config(8));
    const auto c = synth_generate(short_config(9));
    CHECK(a.yields.yields == b.yields.yields);
    CHECK(a.macro.values == b.macro.values);
    CHECK(a.truth.f_inf == b.truth.f_inf);
    CHECK(a.yields.yields != c.yields.yields);
    CHECK(a.yields.dates.front() == "2005-01");
    CHECK(a.yields.dates[12] == "2006-01");
    CHECK(a.macro.names.size() == 13 * 3);
}

TEST_CASE("zero volatility and drift give a constant UFR") {
    auto cfg = short_config(10);
    cfg.ufr_vol = 0.0;
    cfg.ufr_drift = 0.0;
    const auto s = synth_generate(cfg);
    for (double f : s.truth.f_inf) CHECK(f == s.truth.f_inf[0]);
    CHECK(std::abs(s.truth.reported()[0] - cfg.ufr_start) < 1e-15);
}

TEST_CASE("SDF extraction recovers the generating path") {
    SUBCASE("flat curves") {
        auto cfg = short_config(11);
        cfg.xi_scale = 0.0;
        const auto s = synth_generate(cfg);
        const auto sdf = extract_series(s.yields, UfrMethod::SDF, ExtractOptions{});
        for (std::size_t t = 0; t < s.truth.size(); ++t) CHECK(std::abs(sdf.f_inf[t] - s.truth.f_inf[t]) < 1e-6);
    }
    SUBCASE("shaped curves") {
        const auto s = synth_generate(short_config(12));
        const auto sdf = extract_series(s.yields, UfrMethod::SDF, ExtractOptions{});
        for (std::size_t t = 0; t < s.truth.size(); ++t) CHECK(std::abs(sdf.f_inf[t] - s.truth.f_inf[t]) < 1e-10);
        // The curves are genuinely shaped.
        CHECK(s.yields.yields(0, 8) - s.yields.yields(0, 0) > 1e-3);
    }
}

TEST_CASE("synthetic config validation") {
    auto cfg = short_config(1);
    cfg.n_months = 59;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = short_config(1);
    cfg.ufr_vol = -1e-4;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = short_config(1);
    cfg.signal_strength = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = short_config(1);
    cfg.maturities = {5, 2};
    CHECK_THROWS_AS((void)synth_generate(cfg), ValidationError);
}
