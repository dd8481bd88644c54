#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "ufrkit/data.hpp"
#include "ufrkit/error.hpp"
#include "ufrkit/yield_forecast.hpp"

using namespace ufrkit;
using ufrkit::testing::years;

namespace {

SmithWilsonCurve sloped_curve(double f) {
    const auto grid = years(1, 10);
    std::vector<double> prices(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) prices[j] = std::exp(-(0.02 + 0.002 * grid[j]) * grid[j]);
    return fit_curve(prices, CashflowMatrix::identity(grid.size()), grid, 0.1, f);
}

SynthConfig small_synth(double xi_scale) {
    SynthConfig c;
    c.n_months = 60;
    c.seed = 17;
    c.xi_scale = xi_scale;
    return c;
}

std::vector<std::size_t> all_origins(std::size_t n) {
    std::vector<std::size_t> o;
    for (std::size_t t = 0; t + 1 < n; ++t) o.push_back(t);
    return o;
}

}  // namespace

TEST_CASE("forecast level adds the predicted change") {
    CHECK(forecast_ufr_level(0.04, 0.0025) == 0.04 + 0.0025);
    CHECK_THROWS_AS((void)forecast_ufr_level(std::nan(""), 0.0), DomainError);
}

TEST_CASE("an unchanged UFR reproduces the fitted curve bit for bit") {
    const double f = snap_continuous(0.042);
    const auto curve = sloped_curve(f);
    const auto fc = project_curve(curve, annual_from_continuous(f), "2020-02");
    CHECK(fc.f_inf == f);
    CHECK(fc.date == "2020-02");
    for (std::size_t j = 0; j < curve.grid().size(); ++j) {
        const double u = curve.grid()[j];
        CHECK(fc.prices[j] == curve.discount(u));
        CHECK(fc.yields[j] == -std::log(curve.discount(u)) / u);
    }
}

TEST_CASE("a curve with zero xi projects flat at the predicted UFR") {
    const auto grid = years(1, 10);
    const SmithWilsonCurve flat(grid, CashflowMatrix::identity(grid.size()), 0.1, 0.04, Vector::Zero(10));
    const auto fc = project_curve(flat, 0.05);
    for (double y : fc.yields) CHECK(std::abs(y - std::log(1.05)) < 1e-15);
}

TEST_CASE("two-maturity projection matches the direct oracle") {
    const TermGrid grid(std::vector<double>{1.0, 2.0});
    const std::vector<double> prices{std::exp(-0.02), std::exp(-0.06)};
    const auto curve = fit_curve(prices, CashflowMatrix::identity(2), grid, 0.1, std::log(1.04));
    const auto fc = project_curve(curve, 0.05);
    CHECK(std::abs(fc.yields[0] - 0.024595991468711854922) < 1e-13);
    CHECK(std::abs(fc.yields[1] - 0.03462774421177520498) < 1e-13);
    CHECK(fc.alpha == 0.1);
    CHECK(fc.xi == curve.xi());
}

TEST_CASE("projection errors") {
    const auto curve = sloped_curve(0.04);
    CHECK_THROWS_AS((void)project_curve(curve, -1.0), DomainError);
    // A deeply negative UFR blows up the frozen xi terms until a price turns negative.
    bool threw = false;
    try {
        (void)project_curve(curve, -0.999);
    } catch (const ProjectionError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("maturity") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("perfect foresight on flat synthetic curves scores r_oos = 1") {
    const auto s = synth_generate(small_synth(0.0));
    const auto levels = s.truth.reported();
    const auto origins = all_origins(s.yields.size());
    std::vector<double> delta;
    for (auto t : origins) delta.push_back(levels[t + 1] - levels[t]);
    const std::vector<double> alphas(s.yields.size(), 0.1);
    const auto rep = evaluate_curve_forecasts(s.yields, s.truth, origins, delta, alphas);
    REQUIRE(rep.per_maturity.size() == s.yields.grid.size());
    for (const auto& e : rep.per_maturity) CHECK(e.r_oos == 1.0);
    CHECK(rep.dates.front() == s.yields.dates[1]);
}

TEST_CASE("a zero UFR change scores exactly like the random walk") {
    const auto s = synth_generate(small_synth(1.0));
    const auto origins = all_origins(s.yields.size());
    const std::vector<double> delta(origins.size(), 0.0);
    const std::vector<double> alphas(s.yields.size(), 0.1);
    const auto rep = evaluate_curve_forecasts(s.yields, s.truth, origins, delta, alphas);
    CHECK(rep.predicted == rep.benchmark);
    for (const auto& e : rep.per_maturity) CHECK(e.r_oos == 0.0);
    // The fitted benchmark reprices the observed curve.
    CHECK((rep.benchmark - s.yields.yields.topRows(rep.benchmark.rows())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parallel curve evaluation equals serial") {
    const auto s = synth_generate(small_synth(1.0));
    const auto origins = all_origins(s.yields.size());
    std::vector<double> delta;
    for (std::size_t k = 0; k < origins.size(); ++k) delta.push_back(1e-4 * std::sin(static_cast<double>(k)));
    const std::vector<double> alphas(s.yields.size(), 0.1);
    const auto a = evaluate_curve_forecasts(s.yields, s.truth, origins, delta, alphas, Exec::Serial);
    const auto b = evaluate_curve_forecasts(s.yields, s.truth, origins, delta, alphas, Exec::Parallel);
    CHECK(a.predicted == b.predicted);
}

TEST_CASE("curve evaluation input checks") {
    const auto s = synth_generate(small_synth(1.0));
    const std::vector<double> alphas(s.yields.size(), 0.1);
    const std::vector<std::size_t> last{s.yields.size() - 1};
    const std::vector<double> one{0.0};
    CHECK_THROWS_AS((void)evaluate_curve_forecasts(s.yields, s.truth, last, one, alphas), DomainError);
    const std::vector<std::size_t> first{0};
    CHECK_THROWS_AS((void)evaluate_curve_forecasts(s.yields, s.truth, first, std::vector<double>{}, alphas),
                    DomainError);
    auto broken = s.truth;
    broken.f_inf[0] = std::nan("");
    broken.failures[0] = "no root";
    CHECK_THROWS_AS((void)evaluate_curve_forecasts(s.yields, broken, first, one, alphas), ExtractionError);
}

TEST_CASE("projection alphas follow the extraction method") {
    UfrSeries sdf;
    sdf.dates = {"a", "b"};
    sdf.f_inf = {0.04, 0.04};
    ExtractOptions opt;
    opt.alpha = 0.2;
    CHECK(projection_alphas(sdf, opt) == std::vector<double>{0.2, 0.2});
    auto zjw = sdf;
    zjw.method = UfrMethod::ZJW;
    CHECK_THROWS_AS((void)projection_alphas(zjw, opt), DomainError);
    zjw.alpha_path = {0.11, 0.13};
    CHECK(projection_alphas(zjw, opt) == zjw.alpha_path);
}
