#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ufrkit/learners.hpp"
#include "ufrkit/parallel.hpp"
#include "ufrkit/stats.hpp"

namespace ufrkit {

/// x_t - x_{t-1}; throws DomainError for fewer than two values.
[[nodiscard]] std::vector<double> difference(std::span<const double> series);

enum class FeatureSet { YieldsOnly, YieldsPlusMacro };

[[nodiscard]] std::string_view to_string(FeatureSet f);
[[nodiscard]] FeatureSet parse_feature_set(std::string_view name);

struct RollingConfig {
    double window_frac = 0.75;
    /// Overrides window_frac when set.
    std::optional<std::size_t> window_length;
    int horizon = 1;
    std::string target = "ufr";
    FeatureSet feature_set = FeatureSet::YieldsPlusMacro;
    ModelSpec model{};

    /// Throws ValidationError for an out-of-range fraction or a horizon other than 1.
    void validate() const;
    /// Training window length for `n` rows. Throws ValidationError unless the window
    /// has at least 20 rows and leaves at least one out-of-sample step.
    [[nodiscard]] std::size_t window(std::size_t n) const;
};

/// One-step-ahead forecasts of the target change. Entry k forecasts dataset row
/// window + k from the rows [k, window + k).
struct ForecastRun {
    std::vector<std::string> dates;
    std::vector<std::size_t> rows;
    std::vector<double> predictions;
    std::vector<double> actuals;
    std::vector<double> benchmark;  // random walk in levels: zero change
    std::size_t window = 0;

    [[nodiscard]] std::size_t size() const noexcept { return predictions.size(); }
};

/// Refits `config.model` on every rolling window, including the standardizer and any
/// within-window PCA, and predicts the next row. Window fits are independent, so the
/// parallel path returns the serial result exactly. Window seeds are derived from the
/// model seed and the window index. `dates` labels the dataset rows (optional).
[[nodiscard]] ForecastRun rolling_forecast(const Dataset& ds, const RollingConfig& config,
                                           std::span<const std::string> dates = {}, Exec exec = Exec::Serial);

[[nodiscard]] double rmse(std::span<const double> pred, std::span<const double> actual);
[[nodiscard]] double mae(std::span<const double> pred, std::span<const double> actual);
/// 1 - SSE(candidate) / SSE(benchmark). Throws DomainError when the benchmark SSE is 0.
[[nodiscard]] double r_oos(std::span<const double> pred_c, std::span<const double> pred_b,
                           std::span<const double> actual);

/// Two versions of the MSPE-adjusted loss difference, with a the actual, c the
/// candidate and b the benchmark:
///   ClarkWest: d_t = (a - b)^2 - [(a - c)^2 - (b - c)^2], positive when c helps;
///   Printed:   d_t = (a - c)^2 - (a - b)^2 + (b - c)^2 = 2 (a - c)(b - c), which
///              vanishes for a perfect candidate.
/// Only ClarkWest has the upper-tail null distribution the significance bands assume.
enum class CwForm { ClarkWest, Printed };

[[nodiscard]] std::string_view to_string(CwForm f);
[[nodiscard]] CwForm parse_cw_form(std::string_view name);

[[nodiscard]] std::vector<double> cw_adjusted_differences(std::span<const double> pred_c,
                                                          std::span<const double> pred_b,
                                                          std::span<const double> actual,
                                                          CwForm form = CwForm::ClarkWest);

struct CwResult {
    double statistic = 0.0;
    /// One-sided normal band; None unless r_oos > 0.
    SignificanceBand band = SignificanceBand::None;
    double r_oos = 0.0;
};

/// mean(d) / (sd(d) / sqrt(T)) with plain standard errors. Needs at least 10 points.
/// Zero variance with nonzero mean reports +/-infinity; all-zero d reports 0.
[[nodiscard]] CwResult cw_test(std::span<const double> pred_c, std::span<const double> pred_b,
                               std::span<const double> actual, CwForm form = CwForm::ClarkWest);

/// One-sided upper-tail normal band: 1.2816 / 1.6449 / 2.3263.
[[nodiscard]] SignificanceBand normal_upper_band(double statistic);

struct EvalReport {
    double rmse = 0.0;
    double mae = 0.0;
    double r_oos = 0.0;
    double cw_stat = 0.0;
    SignificanceBand cw_band = SignificanceBand::None;
    CwForm cw_form = CwForm::ClarkWest;
    std::size_t n = 0;
};

/// cw_stat is NaN when there are fewer than 10 forecasts.
[[nodiscard]] EvalReport evaluate(std::span<const double> pred_c, std::span<const double> pred_b,
                                  std::span<const double> actual, CwForm form = CwForm::ClarkWest);
[[nodiscard]] EvalReport evaluate(const ForecastRun& run, CwForm form = CwForm::ClarkWest);

}  // namespace ufrkit
