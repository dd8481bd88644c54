#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "ufrkit/error.hpp"
#include "ufrkit/harness.hpp"

using namespace ufrkit;
using ufrkit::testing::SplitMixNormal;

namespace {

const std::vector<double> toy_actual{0.5, -0.2, 0.1, 0.3, -0.4, 0.25, 0.05, -0.15, 0.35, -0.05, 0.2, -0.3};
const std::vector<double> toy_candidate{0.3, -0.1, 0.2, 0.1, -0.2, 0.1, -0.05, -0.1, 0.2, 0.05, 0.1, -0.1};
const std::vector<double> toy_benchmark{0.02, 0.01, -0.01, 0.0, 0.03, -0.02, 0.01, 0.0, -0.01, 0.02, 0.0, 0.01};

/// y_t = 0.8 x0_t - 0.5 x1_t + noise, with x2 labelled as a macro column.
Dataset linear_panel(std::size_t n, std::uint64_t seed) {
    SplitMixNormal g(seed);
    Matrix x(static_cast<Eigen::Index>(n), 3);
    Vector y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = g();
        y[i] = 0.8 * x(i, 0) - 0.5 * x(i, 1) + 0.3 * g();
    }
    return Dataset(x, y, {"dy1", "dy2", "Output_1"}, {"yields", "yields", "Output"});
}

RollingConfig ols_config(std::size_t window) {
    RollingConfig rc;
    rc.window_length = window;
    rc.model.kind = ModelKind::OLS;
    return rc;
}

}  // namespace

TEST_CASE("difference of a level series") {
    const std::vector<double> x{1.0, 1.5, 1.25, 2.0};
    const auto d = difference(x);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == 0.5);
    CHECK(d[1] == -0.25);
    CHECK(d[2] == 0.75);
    CHECK_THROWS_AS((void)difference(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("rmse and mae by hand") {
    const std::vector<double> p{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> a{1.0, 0.0, 4.0, 4.0};
    CHECK(rmse(p, a) == doctest::Approx(std::sqrt(5.0 / 4.0)).epsilon(1e-15));
    CHECK(mae(p, a) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS((void)rmse(std::vector<double>{1.0}, a), DomainError);
}

TEST_CASE("r_oos identities are exact") {
    SplitMixNormal g(3);
    std::vector<double> a(40), p(40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = g();
        p[i] = g();
    }
    CHECK(r_oos(p, p, a) == 0.0);
    CHECK(r_oos(a, p, a) == 1.0);
    CHECK_THROWS_AS((void)r_oos(p, a, a), DomainError);
}

TEST_CASE("metrics match the direct-formula oracle on 12 points") {
    CHECK(rmse(toy_candidate, toy_actual) == doctest::Approx(0.14648663192705788).epsilon(1e-13));
    CHECK(mae(toy_candidate, toy_actual) == doctest::Approx(0.1375).epsilon(1e-13));
    CHECK(r_oos(toy_candidate, toy_benchmark, toy_actual) == doctest::Approx(0.7228500699601765).epsilon(1e-13));
    const auto cw = cw_test(toy_candidate, toy_benchmark, toy_actual);
    CHECK(std::abs(cw.statistic - 3.348046791752594) < 1e-10);
    CHECK(cw.band == SignificanceBand::OnePercent);
    const auto printed = cw_test(toy_candidate, toy_benchmark, toy_actual, CwForm::Printed);
    CHECK(std::abs(printed.statistic - -2.518018516650268) < 1e-10);
    CHECK(printed.band == SignificanceBand::None);
}

TEST_CASE("adjusted differences vanish where the algebra says they must") {
    SUBCASE("identical forecasts, both forms") {
        for (auto form : {CwForm::ClarkWest, CwForm::Printed}) {
            const auto d = cw_adjusted_differences(toy_candidate, toy_candidate, toy_actual, form);
            for (double v : d) CHECK(v == 0.0);
            CHECK(cw_test(toy_candidate, toy_candidate, toy_actual, form).statistic == 0.0);
        }
    }
    SUBCASE("perfect candidate, printed form") {
        const auto d = cw_adjusted_differences(toy_actual, toy_benchmark, toy_actual, CwForm::Printed);
        for (double v : d) CHECK(v == 0.0);
    }
    SUBCASE("Clark-West form equals 2(a - b)(c - b)") {
        const auto d = cw_adjusted_differences(toy_candidate, toy_benchmark, toy_actual);
        for (std::size_t t = 0; t < d.size(); ++t) {
            const double ref = 2.0 * (toy_actual[t] - toy_benchmark[t]) * (toy_candidate[t] - toy_benchmark[t]);
            CHECK(d[t] == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("cw_test edge cases") {
    std::vector<double> a(12, 1.0), b(12, 0.0), c(12, 0.5);
    // Constant positive differences: zero variance, infinite statistic.
    const auto r = cw_test(c, b, a);
    CHECK(std::isinf(r.statistic));
    CHECK(r.statistic > 0.0);
    CHECK_THROWS_AS((void)cw_test(std::vector<double>(9, 0.0), std::vector<double>(9, 0.0), std::vector<double>(9, 1.0)),
                    DomainError);
    // Significance is withheld when the candidate loses on r_oos.
    const auto worse = cw_test(toy_benchmark, toy_candidate, toy_actual);
    CHECK(worse.r_oos < 0.0);
    CHECK(worse.band == SignificanceBand::None);
}

TEST_CASE("normal upper band thresholds") {
    CHECK(normal_upper_band(2.4) == SignificanceBand::OnePercent);
    CHECK(normal_upper_band(1.7) == SignificanceBand::FivePercent);
    CHECK(normal_upper_band(1.3) == SignificanceBand::TenPercent);
    CHECK(normal_upper_band(1.2) == SignificanceBand::None);
    CHECK(normal_upper_band(-5.0) == SignificanceBand::None);
}

TEST_CASE("cw form names") {
    CHECK(to_string(CwForm::ClarkWest) == "clark_west");
    CHECK(parse_cw_form("printed") == CwForm::Printed);
    CHECK_THROWS_AS((void)parse_cw_form("swapped"), ValidationError);
}

TEST_CASE("rolling window sizes") {
    RollingConfig rc;
    CHECK(rc.window(100) == 75);
    rc.window_length = 99;
    CHECK(rc.window(100) == 99);
    rc.window_length = 100;
    CHECK_THROWS_AS((void)rc.window(100), ValidationError);
    rc.window_length = 19;
    CHECK_THROWS_AS((void)rc.window(100), ValidationError);
    rc.window_length.reset();
    rc.window_frac = 1.0;
    CHECK_THROWS_AS((void)rc.window(100), ValidationError);
    rc.window_frac = 0.5;
    rc.horizon = 2;
    CHECK_THROWS_AS(rc.validate(), ValidationError);
}

TEST_CASE("rolling forecast produces n - w aligned forecasts") {
    const auto ds = linear_panel(60, 5);
    const auto run = rolling_forecast(ds, ols_config(40));
    REQUIRE(run.size() == 20);
    CHECK(run.window == 40);
    for (std::size_t k = 0; k < run.size(); ++k) {
        CHECK(run.rows[k] == 40 + k);
        CHECK(run.actuals[k] == ds.y[static_cast<Eigen::Index>(40 + k)]);
        CHECK(run.benchmark[k] == 0.0);
    }
    const auto last = rolling_forecast(ds, ols_config(59));
    CHECK(last.size() == 1);
}

TEST_CASE("each forecast equals a direct fit on its own window") {
    const auto ds = linear_panel(50, 6);
    const auto rc = ols_config(30);
    const auto run = rolling_forecast(ds, rc);
    for (std::size_t k : {std::size_t{0}, std::size_t{7}, std::size_t{19}}) {
        const auto model = fit_model(rc.model, ds.slice(k, 30 + k));
        const Matrix row = ds.x.row(static_cast<Eigen::Index>(30 + k));
        CHECK(run.predictions[k] == model->predict(row)[0]);
    }
}

TEST_CASE("no lookahead: later rows do not move earlier forecasts") {
    const auto ds = linear_panel(60, 7);
    const auto base = rolling_forecast(ds, ols_config(30));
    auto changed = ds;
    const Eigen::Index cut = 45;
    changed.y.tail(changed.y.size() - cut).array() += 10.0;
    changed.x.bottomRows(changed.x.rows() - cut - 1).array() *= -3.0;
    const auto moved = rolling_forecast(changed, ols_config(30));
    for (std::size_t k = 0; k < base.size(); ++k) {
        const auto t = static_cast<Eigen::Index>(base.rows[k]);
        if (t <= cut) CHECK(moved.predictions[k] == base.predictions[k]);
    }
    CHECK(moved.predictions.back() != base.predictions.back());
}

TEST_CASE("heavily penalized ridge forecasts the window mean") {
    const auto ds = linear_panel(50, 8);
    RollingConfig rc;
    rc.window_length = 25;
    rc.model.kind = ModelKind::Ridge;
    rc.model.lambda = 1e12;
    const auto run = rolling_forecast(ds, rc);
    for (std::size_t k = 0; k < run.size(); ++k) {
        const double mean = ds.y.segment(static_cast<Eigen::Index>(k), 25).mean();
        CHECK(std::abs(run.predictions[k] - mean) < 1e-9);
    }
}

TEST_CASE("shifting the target shifts OLS forecasts") {
    const auto ds = linear_panel(50, 9);
    auto shifted = ds;
    shifted.y.array() += 2.5;
    const auto a = rolling_forecast(ds, ols_config(30));
    const auto b = rolling_forecast(shifted, ols_config(30));
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(b.predictions[k] - a.predictions[k] - 2.5) < 1e-12);
}

TEST_CASE("yields_only drops macro columns") {
    const auto ds = linear_panel(50, 10);
    auto rc = ols_config(30);
    rc.feature_set = FeatureSet::YieldsOnly;
    const auto run = rolling_forecast(ds, rc);
    const std::vector<std::size_t> cols{0, 1};
    const auto model = fit_model(rc.model, ds.select(cols).slice(0, 30));
    const Matrix row = ds.x.row(30).head(2);
    CHECK(run.predictions[0] == model->predict(row)[0]);

    Dataset unlabeled(ds.x, ds.y);
    CHECK_THROWS_AS((void)rolling_forecast(unlabeled, rc), ValidationError);
}

TEST_CASE("parallel rolling forecasts equal serial ones") {
    const auto ds = linear_panel(70, 11);
    RollingConfig rc;
    rc.window_length = 40;
    rc.model.kind = ModelKind::Forest;
    rc.model.forest.trees = 20;
    rc.model.seed = 99;
    const auto s = rolling_forecast(ds, rc, {}, Exec::Serial);
    const auto p = rolling_forecast(ds, rc, {}, Exec::Parallel);
    CHECK(s.predictions == p.predictions);
}

TEST_CASE("window failures name the window") {
    const auto ds = linear_panel(40, 12);
    RollingConfig rc;
    rc.window_length = 30;
    rc.model.kind = ModelKind::MLP;
    rc.model.mlp.learning_rate = 1e9;
    rc.model.mlp.epochs = 50;
    try {
        (void)rolling_forecast(ds, rc, {}, Exec::Parallel);
        FAIL("expected ForecastError");
    } catch (const ForecastError& e) {
        CHECK(e.window() == 0);
        CHECK(e.cause_kind() == "convergence");
    }
}

TEST_CASE("evaluate bundles the metrics") {
    const auto r = evaluate(toy_candidate, toy_benchmark, toy_actual);
    CHECK(r.n == 12);
    CHECK(r.rmse == rmse(toy_candidate, toy_actual));
    CHECK(r.cw_stat == cw_test(toy_candidate, toy_benchmark, toy_actual).statistic);
    const std::vector<double> few{1.0, 2.0, 3.0};
    const std::vector<double> zero(3, 0.0);
    CHECK(std::isnan(evaluate(few, zero, few).cw_stat));
}
