#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ufrkit/types.hpp"

namespace ufrkit {

struct SeriesStats {
    double min;
    double max;
    double mean;
    double std;  // sample standard deviation, n - 1 denominator
};

/// Throws DomainError for fewer than two observations or non-finite values.
[[nodiscard]] SeriesStats describe(std::span<const double> series);

enum class SignificanceBand { OnePercent, FivePercent, TenPercent, None };

[[nodiscard]] std::string_view to_string(SignificanceBand band);

struct UnitRootSpec {
    bool constant = true;
    /// ADF: upper bound for the AIC lag search (default floor(12 (T/100)^{1/4})).
    /// PP: Bartlett bandwidth (default floor(4 (T/100)^{2/9})).
    std::optional<int> lags{};
    /// ADF only: when false, `lags` (or its default) is used as is.
    bool autolag = true;
};

struct UnitRootResult {
    double statistic;
    int lags;
    std::size_t nobs;  // observations in the final regression
    SignificanceBand band;
};

/// Asymptotic MacKinnon critical values at 1%, 5%, 10%.
struct CriticalValues {
    double one;
    double five;
    double ten;
};
[[nodiscard]] CriticalValues unit_root_critical_values(bool constant);
[[nodiscard]] SignificanceBand band_for(double statistic, bool constant);

/// Augmented Dickey-Fuller t-ratio. With autolag, every lag 0..max is fitted on a common
/// sample, the AIC minimizer is kept and the regression is re-run on all usable observations.
[[nodiscard]] UnitRootResult adf_test(std::span<const double> series, const UnitRootSpec& spec = {});

/// Phillips-Perron Z-tau with a Bartlett-kernel long-run variance.
[[nodiscard]] UnitRootResult pp_test(std::span<const double> series, const UnitRootSpec& spec = {});

struct CorrelationMatrix {
    Matrix r;        // NaN where a column has zero variance
    Matrix p_value;  // two-sided t-test, n - 2 degrees of freedom
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> significant;  // p < alpha
    std::vector<bool> zero_variance;
};

/// Pairwise Pearson correlations of the columns of `data` (rows = observations).
[[nodiscard]] CorrelationMatrix pearson_matrix(const Matrix& data, double alpha = 0.05);

}  // namespace ufrkit
