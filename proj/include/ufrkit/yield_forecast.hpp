#pragma once

#include <span>
#include <string>
#include <vector>

#include "ufrkit/curve.hpp"
#include "ufrkit/harness.hpp"
#include "ufrkit/ufr.hpp"

namespace ufrkit {

/// ufr_t + delta_hat, both annually compounded decimals.
[[nodiscard]] double forecast_ufr_level(double ufr_t, double delta_hat);

/// Next-date curve implied by a predicted UFR with the date-t xi and alpha held fixed.
struct CurveForecast {
    std::string date;
    double f_inf = 0.0;  // continuous, ln(1 + ufr_hat)
    double alpha = 0.0;
    TermGrid grid;
    Vector xi;
    std::vector<double> prices;
    std::vector<double> yields;  // -ln(price) / maturity
};

/// Reprices the grid dates with the predicted UFR:
///   m_hat = exp(-f_hat u) + W(f_hat) C^T xi_t,
/// where W uses the frozen alpha. Throws ProjectionError naming the maturity when a
/// predicted price is not positive, and DomainError when ufr_hat <= -1.
[[nodiscard]] CurveForecast project_curve(const SmithWilsonCurve& curve_t, double ufr_hat, std::string date = {});

struct CurveForecastReport {
    std::vector<double> maturities;
    std::vector<std::string> dates;  // forecast target dates
    Matrix predicted;                // dates x maturities
    Matrix actual;
    Matrix benchmark;                // random walk: y_t
    std::vector<EvalReport> per_maturity;
};

/// For each origin index t in `origins`, fits the date-t curve with the extracted f_inf
/// and the given alpha, moves the UFR by delta_hat, projects, and scores the projected
/// yields at t + 1 against the actual yields and the random walk. delta_hat is the
/// predicted change of the annually-compounded UFR.
[[nodiscard]] CurveForecastReport evaluate_curve_forecasts(const QuotePanel& panel, const UfrSeries& ufr,
                                                           std::span<const std::size_t> origins,
                                                           std::span<const double> delta_hat,
                                                           std::span<const double> alphas, Exec exec = Exec::Serial);

/// Alpha used to project from each date: the selected alpha for ZJW, the fixed
/// extraction alpha otherwise.
[[nodiscard]] std::vector<double> projection_alphas(const UfrSeries& ufr, const ExtractOptions& options);

}  // namespace ufrkit
