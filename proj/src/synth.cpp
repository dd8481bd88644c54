#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "ufrkit/data.hpp"
#include "ufrkit/error.hpp"
#include "ufrkit/random.hpp"

namespace ufrkit {

namespace {

std::string month_label(int year, int month) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::string variable_name(const std::string& group, int k) {
    std::string s = group;
    std::replace(s.begin(), s.end(), ' ', '_');
    return s + "_" + std::to_string(k + 1);
}

/// Level-slope-curvature style shapes for the spread over f_inf. All vanish at
/// long maturities, so curves bend toward f_inf.
std::array<double, 3> spread_loadings(double u) {
    const double a = u / 3.0;
    const double b1 = (1.0 - std::exp(-a)) / a;
    return {b1, b1 - std::exp(-a), std::exp(-u / 10.0)};
}

/// Shifts xi along the all-ones direction so that the SDF first-order condition at
/// f holds. The residual is quadratic in the shift, so three evaluations fix it.
Vector sdf_consistent_xi(const TermGrid& grid, const CashflowMatrix& cf, double alpha, double f, const Vector& xi0) {
    const Vector ones = Vector::Ones(xi0.size());
    auto residual = [&](double c) {
        const SmithWilsonCurve curve(grid, cf, alpha, f, xi0 + c * ones);
        std::vector<double> prices(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) prices[j] = curve.discount(grid[j]);
        return FocProblem(prices, cf, grid, alpha).residual(f);
    };
    // Small probe steps keep every probed curve's prices positive; re-centering twice
    // removes the rounding left by the first fit.
    const double s = 1e-3 * std::max(xi0.cwiseAbs().maxCoeff(), 1e-6);
    double c = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        const double r0 = residual(c);
        if (r0 == 0.0) break;
        const double rp = residual(c + s);
        const double rm = residual(c - s);
        const double a = (rp + rm - 2.0 * r0) / (2.0 * s * s);
        const double b = (rp - rm) / (2.0 * s);
        if (b == 0.0) break;
        const double disc = b * b - 4.0 * a * r0;
        c += disc >= 0.0 ? -2.0 * r0 / (b + std::copysign(std::sqrt(disc), b)) : -r0 / b;  // root nearest c
    }
    return xi0 + c * ones;
}

}  // namespace

void SynthConfig::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("synth: " + m); };
    if (n_months < 60) fail("n_months must be at least 60");
    if (start_month < 1 || start_month > 12) fail("start_month must be in 1..12");
    if (maturities.size() < 2) fail("at least two maturities required");
    for (std::size_t j = 0; j < maturities.size(); ++j) {
        if (!(maturities[j] > 0.0) || !std::isfinite(maturities[j])) fail("maturities must be positive");
        if (j > 0 && !(maturities[j] > maturities[j - 1])) fail("maturities must be strictly increasing");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be positive");
    if (!(ufr_start > -1.0) || !std::isfinite(ufr_start)) fail("ufr_start must exceed -1");
    if (!std::isfinite(ufr_drift)) fail("ufr_drift must be finite");
    if (!(ufr_vol >= 0.0) || !std::isfinite(ufr_vol)) fail("ufr_vol must be non-negative");
    if (factor_phi.size() != 3 || factor_sd.size() != 3) fail("three factor_phi and factor_sd values required");
    for (int k = 0; k < 3; ++k) {
        if (!(std::abs(factor_phi[static_cast<std::size_t>(k)]) < 1.0)) fail("factor_phi must lie in (-1, 1)");
        if (!(factor_sd[static_cast<std::size_t>(k)] >= 0.0)) fail("factor_sd must be non-negative");
    }
    if (!std::isfinite(factor_mean_level)) fail("factor_mean_level must be finite");
    if (!(xi_scale >= 0.0) || !std::isfinite(xi_scale)) fail("xi_scale must be non-negative");
    if (vars_per_group < 1) fail("vars_per_group must be at least 1");
    if (!(std::abs(macro_phi) < 1.0)) fail("macro_phi must lie in (-1, 1)");
    if (!(macro_noise >= 0.0) || !std::isfinite(macro_noise)) fail("macro_noise must be non-negative");
    if (signal_loadings.size() > macro_group_names().size()) fail("more signal loadings than macro groups");
    for (double l : signal_loadings)
        if (!std::isfinite(l)) fail("signal_loadings must be finite");
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) fail("signal_strength must lie in [0, 1]");
}

SynthData synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.n_months);
    const auto& groups = macro_group_names();
    const std::size_t ng = groups.size();
    const auto vpg = static_cast<std::size_t>(cfg.vars_per_group);

    std::vector<std::string> dates;
    for (std::size_t t = 0; t < n; ++t) {
        const int m0 = cfg.start_month - 1 + static_cast<int>(t);
        dates.push_back(month_label(cfg.start_year + m0 / 12, m0 % 12 + 1));
    }

    // Latent macro factors, unit stationary variance.
    SplitMix64 latent_rng(derive_seed(cfg.seed, "synth.macro.latent"));
    Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ng));
    const double innov = std::sqrt(1.0 - cfg.macro_phi * cfg.macro_phi);
    for (std::size_t g = 0; g < ng; ++g) z(0, static_cast<Eigen::Index>(g)) = latent_rng.normal();
    for (std::size_t t = 1; t < n; ++t)
        for (std::size_t g = 0; g < ng; ++g) {
            const auto r = static_cast<Eigen::Index>(t);
            const auto c = static_cast<Eigen::Index>(g);
            z(r, c) = cfg.macro_phi * z(r - 1, c) + innov * latent_rng.normal();
        }

    // Predictable part of the next f_inf change.
    double norm = 0.0;
    for (double l : cfg.signal_loadings) norm += l * l;
    norm = std::sqrt(norm);
    std::vector<double> signal(n, 0.0);
    if (norm > 0.0)
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t g = 0; g < cfg.signal_loadings.size(); ++g)
                signal[t] += cfg.signal_loadings[g] * z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(g)) / norm;

    SplitMix64 ufr_rng(derive_seed(cfg.seed, "synth.ufr"));
    std::vector<double> f(n);
    f[0] = snap_continuous(continuous_from_annual(cfg.ufr_start));
    const double ws = std::sqrt(cfg.signal_strength);
    const double wn = std::sqrt(1.0 - cfg.signal_strength);
    for (std::size_t t = 1; t < n; ++t) {
        const double step = cfg.ufr_drift + cfg.ufr_vol * (ws * signal[t - 1] + wn * ufr_rng.normal());
        f[t] = step == 0.0 ? f[t - 1] : snap_continuous(f[t - 1] + step);
    }

    // Curve factors: AR(1) around (mean_level, 0, 0), started at the mean.
    SplitMix64 factor_rng(derive_seed(cfg.seed, "synth.factor"));
    const std::array<double, 3> mean{cfg.factor_mean_level, 0.0, 0.0};
    std::array<double, 3> dev{0.0, 0.0, 0.0};
    const TermGrid grid(cfg.maturities);
    const auto m = static_cast<Eigen::Index>(grid.size());
    const auto cf = CashflowMatrix::identity(grid.size());
    Matrix y(static_cast<Eigen::Index>(n), m);
    std::vector<std::array<double, 3>> loads;
    for (std::size_t j = 0; j < grid.size(); ++j) loads.push_back(spread_loadings(grid[j]));

    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0)
            for (std::size_t k = 0; k < 3; ++k) dev[k] = cfg.factor_phi[k] * dev[k] + cfg.factor_sd[k] * factor_rng.normal();
        const auto r = static_cast<Eigen::Index>(t);
        if (cfg.xi_scale == 0.0) {
            y.row(r).setConstant(f[t]);
            continue;
        }
        std::vector<double> prices(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double spread = 0.0;
            for (std::size_t k = 0; k < 3; ++k) spread += (mean[k] + dev[k]) * loads[j][k];
            prices[j] = std::exp(-(f[t] + cfg.xi_scale * spread) * grid[j]);
        }
        const auto shaped = fit_curve(prices, cf, grid, cfg.alpha, f[t]);
        const SmithWilsonCurve curve(grid, cf, cfg.alpha, f[t], sdf_consistent_xi(grid, cf, cfg.alpha, f[t], shaped.xi()));
        for (std::size_t j = 0; j < grid.size(); ++j)
            y(r, static_cast<Eigen::Index>(j)) = -std::log(curve.discount(grid[j])) / grid[j];
    }

    // Observed macro variables: noisy views of the latent factors, alternating sign.
    SplitMix64 noise_rng(derive_seed(cfg.seed, "synth.macro.noise"));
    FeaturePanel macro;
    macro.dates = dates;
    macro.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ng * vpg));
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t k = 0; k < vpg; ++k) {
            macro.names.push_back(variable_name(groups[g], static_cast<int>(k)));
            macro.groups.push_back(groups[g]);
        }
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t g = 0; g < ng; ++g)
            for (std::size_t k = 0; k < vpg; ++k) {
                const double sign = k % 2 == 0 ? 1.0 : -1.0;
                macro.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(g * vpg + k)) =
                    sign * z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(g)) + cfg.macro_noise * noise_rng.normal();
            }

    UfrSeries truth;
    truth.method = UfrMethod::SDF;
    truth.dates = dates;
    truth.f_inf = f;
    truth.failures.assign(n, std::string());
    return {QuotePanel(dates, grid, std::move(y)), std::move(macro), std::move(truth)};
}

}  // namespace ufrkit
