#include "ufrkit/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "ufrkit/error.hpp"
#include "ufrkit/random.hpp"

namespace ufrkit {

std::vector<double> difference(std::span<const double> series) {
    if (series.size() < 2) throw DomainError("difference: at least two values required");
    std::vector<double> d(series.size() - 1);
    for (std::size_t t = 1; t < series.size(); ++t) d[t - 1] = series[t] - series[t - 1];
    return d;
}

std::string_view to_string(FeatureSet f) {
    return f == FeatureSet::YieldsOnly ? "yields_only" : "yields_plus_macro";
}

FeatureSet parse_feature_set(std::string_view name) {
    std::string n;
    for (char c : name) n.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == "yields_only" || n == "yields") return FeatureSet::YieldsOnly;
    if (n == "yields_plus_macro" || n == "macro" || n == "all") return FeatureSet::YieldsPlusMacro;
    throw ValidationError("unknown feature set '" + std::string(name) + "'");
}

void RollingConfig::validate() const {
    if (!(window_frac > 0.0 && window_frac < 1.0)) throw ValidationError("rolling: window_frac must lie in (0, 1)");
    if (horizon != 1) throw ValidationError("rolling: only one-step-ahead forecasts (horizon 1) are supported");
    model.validate();
}

std::size_t RollingConfig::window(std::size_t n) const {
    validate();
    const std::size_t w =
        window_length ? *window_length : static_cast<std::size_t>(std::floor(window_frac * static_cast<double>(n)));
    std::ostringstream os;
    if (w < 20) {
        os << "rolling: training window of " << w << " rows is shorter than 20";
        throw ValidationError(os.str());
    }
    if (w >= n) {
        os << "rolling: window " << w << " leaves no out-of-sample step in " << n << " rows";
        throw ValidationError(os.str());
    }
    return w;
}

ForecastRun rolling_forecast(const Dataset& ds, const RollingConfig& config, std::span<const std::string> dates,
                             Exec exec) {
    ds.validate();
    if (!dates.empty() && dates.size() != ds.rows()) throw DomainError("rolling_forecast: date count mismatch");
    const std::size_t n = ds.rows();
    const std::size_t w = config.window(n);

    Dataset features = ds;
    if (config.feature_set == FeatureSet::YieldsOnly) {
        if (ds.groups.empty())
            throw ValidationError("rolling_forecast: feature set yields_only needs column group labels");
        const auto cols = ds.columns_in_group(kYieldGroup);
        if (cols.empty()) throw ValidationError("rolling_forecast: no columns in the yields group");
        features = ds.select(cols);
    }

    const std::size_t steps = n - w;
    ForecastRun run;
    run.window = w;
    run.predictions.assign(steps, 0.0);
    run.benchmark.assign(steps, 0.0);
    run.actuals.resize(steps);
    run.rows.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        run.rows[k] = w + k;
        run.actuals[k] = ds.y[static_cast<Eigen::Index>(w + k)];
        if (!dates.empty()) run.dates.push_back(dates[w + k]);
    }

    const std::size_t p = features.cols();
    for_each_index(steps, exec, [&](std::size_t k) {
        const std::size_t t = w + k;
        ModelSpec spec = config.model;
        spec.seed = derive_seed(config.model.seed, "rolling.window", t);
        try {
            const auto model = fit_model(spec, features.slice(t - w, t));
            std::vector<double> row(p);
            for (std::size_t j = 0; j < p; ++j)
                row[j] = features.x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
            run.predictions[k] = model->predict(std::span<const double>(row));
        } catch (const Error& e) {
            std::ostringstream os;
            os << "rolling_forecast: window " << k << " (training rows " << t - w << ".." << t - 1 << ", "
               << to_string(config.model.kind) << "): " << e.what();
            throw ForecastError(k, e.kind(), os.str());
        }
    });
    return run;
}

namespace {

void check_aligned(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) throw DomainError(std::string(what) + ": series lengths differ");
    if (a.empty()) throw DomainError(std::string(what) + ": empty series");
}

double sse(std::span<const double> pred, std::span<const double> actual) {
    double s = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) s += (actual[t] - pred[t]) * (actual[t] - pred[t]);
    return s;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> actual) {
    check_aligned(pred, actual, "rmse");
    return std::sqrt(sse(pred, actual) / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> actual) {
    check_aligned(pred, actual, "mae");
    double s = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) s += std::abs(actual[t] - pred[t]);
    return s / static_cast<double>(pred.size());
}

double r_oos(std::span<const double> pred_c, std::span<const double> pred_b, std::span<const double> actual) {
    check_aligned(pred_c, actual, "r_oos");
    check_aligned(pred_b, actual, "r_oos");
    const double sb = sse(pred_b, actual);
    if (!(sb > 0.0)) throw DomainError("r_oos: benchmark SSE is zero, R^2_oos undefined");
    return 1.0 - sse(pred_c, actual) / sb;
}

std::string_view to_string(CwForm f) { return f == CwForm::ClarkWest ? "clark_west" : "printed"; }

CwForm parse_cw_form(std::string_view name) {
    if (name == "clark_west" || name == "clark-west" || name == "cw") return CwForm::ClarkWest;
    if (name == "printed") return CwForm::Printed;
    throw ValidationError("unknown CW form '" + std::string(name) + "' (expected clark_west or printed)");
}

std::vector<double> cw_adjusted_differences(std::span<const double> pred_c, std::span<const double> pred_b,
                                            std::span<const double> actual, CwForm form) {
    check_aligned(pred_c, actual, "cw_test");
    check_aligned(pred_b, actual, "cw_test");
    std::vector<double> d(actual.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        const double ec = actual[t] - pred_c[t];
        const double eb = actual[t] - pred_b[t];
        const double gap = pred_b[t] - pred_c[t];
        d[t] = form == CwForm::ClarkWest ? eb * eb - (ec * ec - gap * gap) : ec * ec - eb * eb + gap * gap;
    }
    return d;
}

SignificanceBand normal_upper_band(double statistic) {
    if (statistic > 2.3263478740408408) return SignificanceBand::OnePercent;
    if (statistic > 1.6448536269514722) return SignificanceBand::FivePercent;
    if (statistic > 1.2815515655446004) return SignificanceBand::TenPercent;
    return SignificanceBand::None;
}

CwResult cw_test(std::span<const double> pred_c, std::span<const double> pred_b, std::span<const double> actual,
                 CwForm form) {
    const auto d = cw_adjusted_differences(pred_c, pred_b, actual, form);
    if (d.size() < 10) throw DomainError("cw_test: at least 10 observations required");
    const double n = static_cast<double>(d.size());
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    CwResult out;
    if (sd > 0.0) {
        out.statistic = mean / (sd / std::sqrt(n));
    } else if (mean != 0.0) {
        out.statistic = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    const double sb = sse(pred_b, actual);
    out.r_oos = sb > 0.0 ? 1.0 - sse(pred_c, actual) / sb : std::numeric_limits<double>::quiet_NaN();
    if (out.r_oos > 0.0) out.band = normal_upper_band(out.statistic);
    return out;
}

EvalReport evaluate(std::span<const double> pred_c, std::span<const double> pred_b, std::span<const double> actual,
                    CwForm form) {
    EvalReport r;
    r.cw_form = form;
    r.n = actual.size();
    r.rmse = rmse(pred_c, actual);
    r.mae = mae(pred_c, actual);
    r.r_oos = r_oos(pred_c, pred_b, actual);
    if (actual.size() >= 10) {
        const auto cw = cw_test(pred_c, pred_b, actual, form);
        r.cw_stat = cw.statistic;
        r.cw_band = cw.band;
    } else {
        r.cw_stat = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

EvalReport evaluate(const ForecastRun& run, CwForm form) {
    return evaluate(run.predictions, run.benchmark, run.actuals, form);
}

}  // namespace ufrkit
