#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ufrkit/curve.hpp"
#include "ufrkit/harness.hpp"
#include "ufrkit/learners.hpp"
#include "ufrkit/types.hpp"
#include "ufrkit/ufr.hpp"

namespace ufrkit {

/// Dated macro variables with a group label per column.
struct FeaturePanel {
    std::vector<std::string> dates;
    std::vector<std::string> names;
    std::vector<std::string> groups;  // one per column
    Matrix values;                    // dates x columns

    [[nodiscard]] std::size_t size() const noexcept { return dates.size(); }
    /// Throws DataError("shape") on inconsistent sizes, DataError("parse") on non-finite values.
    void validate() const;
};

using GroupMap = std::map<std::string, std::string>;

// Loaders. Errors are DataError with kinds io / header / parse / duplicate_date /
// mapping / alignment, and messages naming the file, line and column.

/// CSV: date, then one column per maturity named y<years> (e.g. y10), decimal
/// continuously-compounded zero rates.
[[nodiscard]] QuotePanel load_yields(const std::filesystem::path& path);
/// CSV: date, then one column per macro variable. `groups` labels every variable;
/// a variable missing from it is a mapping error.
[[nodiscard]] FeaturePanel load_macro(const std::filesystem::path& path, const GroupMap& groups);
/// CSV: variable,group. Group names must be one of the 13 macro categories.
[[nodiscard]] GroupMap load_groups(const std::filesystem::path& path);

/// Inner join on dates, keeping the order of `yields`.
[[nodiscard]] std::pair<QuotePanel, FeaturePanel> align(const QuotePanel& yields, const FeaturePanel& macro);

// Writers. Numbers use the shortest representation that parses back to the same
// double, so every file round-trips through its loader exactly.
void write_yields(const std::filesystem::path& path, const QuotePanel& panel);
void write_macro(const std::filesystem::path& path, const FeaturePanel& panel);
void write_groups(const std::filesystem::path& path, const FeaturePanel& panel);
/// date,method,f_inf,ufr,alpha,flagged,failure; a failed date has an empty f_inf.
void write_ufr_series(const std::filesystem::path& path, const UfrSeries& series);
[[nodiscard]] UfrSeries load_ufr_series(const std::filesystem::path& path);
/// date,row,prediction,actual,benchmark
void write_forecast_run(const std::filesystem::path& path, const ForecastRun& run);
[[nodiscard]] ForecastRun load_forecast_run(const std::filesystem::path& path);

/// Shortest round-trip decimal form of `v`.
[[nodiscard]] std::string format_exact(double v);
/// printf "%.10g", used for report values.
[[nodiscard]] std::string format_report(double v);

// Forecasting design.

/// Regression rows for one-step forecasts of a level series. Row i uses the yield
/// changes (and macro values) known at origin date t = i + 1 and targets the change
/// of `target_levels` from t to t + 1.
struct ForecastDesign {
    Dataset data;
    std::vector<std::size_t> origin;     // panel index of the origin date per row
    std::vector<std::string> target_dates;  // date t + 1 per row
};

/// `macro` may be null for yield-only designs. Throws DomainError when the panel has
/// fewer than three dates or lengths disagree.
[[nodiscard]] ForecastDesign build_design(const QuotePanel& yields, std::span<const double> target_levels,
                                          const FeaturePanel* macro);

// Synthetic data.

struct SynthConfig {
    int n_months = 240;
    std::uint64_t seed = 0;
    int start_year = 2005;
    int start_month = 1;
    std::vector<double> maturities{1, 2, 3, 5, 7, 10, 15, 20, 30};
    /// Smith-Wilson alpha of the generating curves. Each curve satisfies the SDF
    /// first-order condition at its true f_inf for this alpha.
    double alpha = 0.1;
    // Random walk of the continuous f_inf, per month.
    double ufr_start = 0.045;  // annually compounded
    double ufr_drift = 0.0;
    double ufr_vol = 5e-4;
    // Three AR(1) factors shape the spread y(u) - f_inf = sum_k F_k b_k(u), which sets xi.
    // factor_sd is the innovation standard deviation.
    std::vector<double> factor_phi{0.97, 0.9, 0.8};
    std::vector<double> factor_sd{0.002, 0.0015, 0.001};
    double factor_mean_level = -0.012;  // mean of the level factor (upward-sloping curves)
    double xi_scale = 1.0;              // 0 gives xi = 0 and flat curves at f_inf
    // Macro panel: one AR(1) latent factor per group, observed through noisy variables.
    int vars_per_group = 3;
    double macro_phi = 0.6;
    double macro_noise = 0.5;
    /// Weight of each group's latent factor in the predictable part of the next f_inf
    /// change; default: the first three groups.
    std::vector<double> signal_loadings{1.0, 1.0, 1.0};
    /// Fraction of the f_inf innovation variance predictable from the macro factors.
    double signal_strength = 0.5;

    void validate() const;
};

struct SynthData {
    QuotePanel yields;
    FeaturePanel macro;
    UfrSeries truth;  // generating f_inf path (method SDF, no alpha path)
};

[[nodiscard]] SynthData synth_generate(const SynthConfig& config);

}  // namespace ufrkit
