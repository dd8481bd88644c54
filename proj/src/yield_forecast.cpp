#include "ufrkit/yield_forecast.hpp"

#include <cmath>
#include <sstream>

#include "ufrkit/error.hpp"

namespace ufrkit {

double forecast_ufr_level(double ufr_t, double delta_hat) {
    if (!std::isfinite(ufr_t) || !std::isfinite(delta_hat))
        throw DomainError("forecast_ufr_level: inputs must be finite");
    return ufr_t + delta_hat;
}

CurveForecast project_curve(const SmithWilsonCurve& curve_t, double ufr_hat, std::string date) {
    if (!(ufr_hat > -1.0)) throw DomainError("project_curve: predicted UFR must exceed -1");
    const double f_hat = continuous_from_annual(ufr_hat);
    // Same evaluation path as the fitted curve, so an unchanged UFR reproduces it bit for bit.
    const SmithWilsonCurve projected(curve_t.grid(), curve_t.cashflows(), curve_t.alpha(), f_hat, curve_t.xi());
    CurveForecast out{std::move(date), f_hat, curve_t.alpha(), curve_t.grid(), curve_t.xi(), {}, {}};
    const auto& grid = curve_t.grid();
    out.prices.resize(grid.size());
    out.yields.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double m = projected.discount(grid[j]);
        if (!(m > 0.0) || !std::isfinite(m)) {
            std::ostringstream os;
            os << "project_curve: predicted price " << m << " at maturity " << grid[j] << "y is not positive (ufr_hat "
               << ufr_hat << ")";
            throw ProjectionError(os.str());
        }
        out.prices[j] = m;
        out.yields[j] = -std::log(m) / grid[j];
    }
    return out;
}

std::vector<double> projection_alphas(const UfrSeries& ufr, const ExtractOptions& options) {
    if (ufr.method == UfrMethod::ZJW) {
        if (ufr.alpha_path.size() != ufr.size()) throw DomainError("projection_alphas: ZJW series lacks an alpha path");
        return ufr.alpha_path;
    }
    return std::vector<double>(ufr.size(), options.alpha);
}

CurveForecastReport evaluate_curve_forecasts(const QuotePanel& panel, const UfrSeries& ufr,
                                             std::span<const std::size_t> origins, std::span<const double> delta_hat,
                                             std::span<const double> alphas, Exec exec) {
    if (ufr.size() != panel.size()) throw DomainError("evaluate_curve_forecasts: UFR series and panel lengths differ");
    if (alphas.size() != panel.size()) throw DomainError("evaluate_curve_forecasts: one alpha per date required");
    if (origins.size() != delta_hat.size())
        throw DomainError("evaluate_curve_forecasts: one forecast per origin required");
    if (origins.empty()) throw DomainError("evaluate_curve_forecasts: no forecasts");
    const auto& grid = panel.grid;
    const auto steps = static_cast<Eigen::Index>(origins.size());
    const auto m = static_cast<Eigen::Index>(grid.size());

    CurveForecastReport rep;
    rep.maturities.assign(grid.maturities().begin(), grid.maturities().end());
    rep.predicted.resize(steps, m);
    rep.actual.resize(steps, m);
    rep.benchmark.resize(steps, m);
    const auto identity = CashflowMatrix::identity(grid.size());
    for (auto t : origins) {
        if (t + 1 >= panel.size()) throw DomainError("evaluate_curve_forecasts: origin has no next date");
        rep.dates.push_back(panel.dates[t + 1]);
    }

    for_each_index(origins.size(), exec, [&](std::size_t k) {
        const std::size_t t = origins[k];
        const double f_t = ufr.f_inf[t];
        if (!std::isfinite(f_t))
            throw ExtractionError("evaluate_curve_forecasts: no UFR on " + panel.dates[t] + ": " + ufr.failures[t]);
        const auto prices = panel.prices_row(t);
        const auto curve = fit_curve(prices, identity, grid, alphas[t], f_t);
        const double ufr_hat = forecast_ufr_level(annual_from_continuous(f_t), delta_hat[k]);
        const auto fc = project_curve(curve, ufr_hat, panel.dates[t + 1]);
        const auto e = static_cast<Eigen::Index>(k);
        for (Eigen::Index j = 0; j < m; ++j) {
            rep.predicted(e, j) = fc.yields[static_cast<std::size_t>(j)];
            rep.actual(e, j) = panel.yields(static_cast<Eigen::Index>(t + 1), j);
            // The random walk carries the date-t curve forward; using the fitted curve
            // makes a zero UFR change score exactly like the benchmark.
            rep.benchmark(e, j) = -std::log(curve.discount(grid[static_cast<std::size_t>(j)])) /
                                  grid[static_cast<std::size_t>(j)];
        }
    });

    for (Eigen::Index j = 0; j < m; ++j) {
        const Vector p = rep.predicted.col(j);
        const Vector b = rep.benchmark.col(j);
        const Vector a = rep.actual.col(j);
        rep.per_maturity.push_back(evaluate(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                                            std::span<const double>(b.data(), static_cast<std::size_t>(b.size())),
                                            std::span<const double>(a.data(), static_cast<std::size_t>(a.size()))));
    }
    return rep;
}

}  // namespace ufrkit
