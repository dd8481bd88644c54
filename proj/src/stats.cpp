#include "ufrkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "ufrkit/error.hpp"

namespace ufrkit {

SeriesStats describe(std::span<const double> series) {
    if (series.size() < 2) throw DomainError("describe: at least two observations required");
    for (double v : series)
        if (!std::isfinite(v)) throw DomainError("describe: non-finite value");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    const double n = static_cast<double>(series.size());
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    // Rounding can place the mean a hair outside [min, max] for constant input.
    return {*lo, *hi, std::clamp(mean, *lo, *hi), std::sqrt(ss / (n - 1.0))};
}

std::string_view to_string(SignificanceBand band) {
    switch (band) {
        case SignificanceBand::OnePercent: return "1%";
        case SignificanceBand::FivePercent: return "5%";
        case SignificanceBand::TenPercent: return "10%";
        case SignificanceBand::None: return "none";
    }
    return "none";
}

CriticalValues unit_root_critical_values(bool constant) {
    if (constant) return {-3.43, -2.86, -2.57};
    return {-2.5658, -1.9393, -1.6156};
}

SignificanceBand band_for(double statistic, bool constant) {
    const auto cv = unit_root_critical_values(constant);
    if (statistic < cv.one) return SignificanceBand::OnePercent;
    if (statistic < cv.five) return SignificanceBand::FivePercent;
    if (statistic < cv.ten) return SignificanceBand::TenPercent;
    return SignificanceBand::None;
}

namespace {

struct OlsFit {
    bool full_rank = false;
    Vector beta;
    Vector resid;
    double ssr = 0.0;
    double se0 = 0.0;  // standard error of the first coefficient
    double llf = 0.0;
};

OlsFit ols(const Matrix& x, const Vector& y) {
    OlsFit fit;
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) return fit;
    fit.full_rank = true;
    fit.beta = qr.solve(y);
    fit.resid = y - x * fit.beta;
    fit.ssr = fit.resid.squaredNorm();
    const double n = static_cast<double>(x.rows());
    const double dof = n - static_cast<double>(x.cols());
    const Matrix xtx_inv = (x.transpose() * x).inverse();
    fit.se0 = std::sqrt(fit.ssr / dof * xtx_inv(0, 0));
    fit.llf = -0.5 * n * (std::log(2.0 * M_PI) + std::log(fit.ssr / n) + 1.0);
    return fit;
}

void check_series(std::span<const double> x, const char* what) {
    if (x.size() <= 20) throw DomainError(std::string(what) + ": more than 20 observations required");
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
}

// A regression whose residuals vanish to rounding has no stochastic component and the
// t-ratio is undefined.
bool noise_free(const OlsFit& fit, const Vector& y) {
    const double scale = std::max(y.squaredNorm(), std::numeric_limits<double>::min());
    return fit.ssr <= 1e-24 * scale;
}

// Design for lag p on the observations t = first..T-1 of the differenced series:
// columns [x_{t-1}, const?, dx_{t-1}, ..., dx_{t-p}], response dx_t.
void adf_design(std::span<const double> x, int p, std::size_t first, bool constant, Matrix& design, Vector& response) {
    const std::size_t t_end = x.size() - 1;  // dx has indices 0..T-2, dx_i = x_{i+1} - x_i
    const auto rows = static_cast<Eigen::Index>(t_end - first);
    const Eigen::Index cols = 1 + (constant ? 1 : 0) + p;
    design.resize(rows, cols);
    response.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t i = first + static_cast<std::size_t>(r);  // index into dx
        response[r] = x[i + 1] - x[i];
        Eigen::Index c = 0;
        design(r, c++) = x[i];
        if (constant) design(r, c++) = 1.0;
        for (int l = 1; l <= p; ++l) {
            const std::size_t j = i - static_cast<std::size_t>(l);
            design(r, c++) = x[j + 1] - x[j];
        }
    }
}

}  // namespace

UnitRootResult adf_test(std::span<const double> series, const UnitRootSpec& spec) {
    check_series(series, "adf_test");
    const auto t = static_cast<double>(series.size());
    int max_lag = spec.lags.value_or(static_cast<int>(std::floor(12.0 * std::pow(t / 100.0, 0.25))));
    if (max_lag < 0) throw ValidationError("adf_test: lags must be nonnegative");
    const int cap = static_cast<int>(series.size()) / 2 - (spec.constant ? 1 : 0) - 1;
    max_lag = std::min(max_lag, cap);
    if (max_lag < 0) throw DomainError("adf_test: series too short for any lag");

    int lag = max_lag;
    Matrix design;
    Vector response;
    if (spec.autolag) {
        double best = std::numeric_limits<double>::infinity();
        int best_lag = -1;
        const auto first = static_cast<std::size_t>(max_lag);
        for (int p = 0; p <= max_lag; ++p) {
            adf_design(series, p, first, spec.constant, design, response);
            const auto fit = ols(design, response);
            if (!fit.full_rank) continue;
            const double aic = noise_free(fit, response) ? -std::numeric_limits<double>::infinity()
                                                         : -2.0 * fit.llf + 2.0 * static_cast<double>(design.cols());
            if (aic < best || best_lag < 0) {
                best = aic;
                best_lag = p;
            }
        }
        if (best_lag < 0) throw DomainError("adf_test: degenerate regressors at every lag");
        lag = best_lag;
    }
    adf_design(series, lag, static_cast<std::size_t>(lag), spec.constant, design, response);
    const auto fit = ols(design, response);
    if (!fit.full_rank) throw DomainError("adf_test: degenerate regressors");
    const double stat = noise_free(fit, response) ? 0.0 : fit.beta[0] / fit.se0;
    return {stat, lag, static_cast<std::size_t>(design.rows()), band_for(stat, spec.constant)};
}

UnitRootResult pp_test(std::span<const double> series, const UnitRootSpec& spec) {
    check_series(series, "pp_test");
    const auto t = static_cast<double>(series.size());
    const int bandwidth = spec.lags.value_or(static_cast<int>(std::floor(4.0 * std::pow(t / 100.0, 2.0 / 9.0))));
    if (bandwidth < 0) throw ValidationError("pp_test: bandwidth must be nonnegative");

    const auto n = static_cast<Eigen::Index>(series.size() - 1);
    const Eigen::Index k = spec.constant ? 2 : 1;
    Matrix design(n, k);
    Vector response(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = series[static_cast<std::size_t>(i)];
        if (spec.constant) design(i, 1) = 1.0;
        response[i] = series[static_cast<std::size_t>(i) + 1];
    }
    const auto fit = ols(design, response);
    if (!fit.full_rank) throw DomainError("pp_test: degenerate regressors");
    if (n < k + bandwidth) throw DomainError("pp_test: too few observations for the bandwidth");
    Vector dy(n);
    for (Eigen::Index i = 0; i < n; ++i) dy[i] = response[i] - design(i, 0);
    if (noise_free(fit, dy)) return {0.0, bandwidth, static_cast<std::size_t>(n), SignificanceBand::None};

    const auto& u = fit.resid;
    const double nn = static_cast<double>(n);
    double lam2 = u.squaredNorm();
    for (int j = 1; j <= bandwidth; ++j) {
        const double gamma = u.tail(n - j).dot(u.head(n - j));
        lam2 += 2.0 * (1.0 - static_cast<double>(j) / (bandwidth + 1.0)) * gamma;
    }
    lam2 /= nn;
    if (!(lam2 > 0.0)) throw DomainError("pp_test: non-positive long-run variance");
    const double lam = std::sqrt(lam2);
    const double s2 = fit.ssr / (nn - static_cast<double>(k));
    const double s = std::sqrt(s2);
    const double gamma0 = s2 * (nn - static_cast<double>(k)) / nn;
    const double sigma = fit.se0;
    const double rho = fit.beta[0];
    const double stat = std::sqrt(gamma0 / lam2) * (rho - 1.0) / sigma - 0.5 * ((lam2 - gamma0) / lam) * (nn * sigma / s);
    return {stat, bandwidth, static_cast<std::size_t>(n), band_for(stat, spec.constant)};
}

CorrelationMatrix pearson_matrix(const Matrix& data, double alpha) {
    if (data.rows() < 3) throw DomainError("pearson_matrix: at least three observations required");
    if (!data.allFinite()) throw DomainError("pearson_matrix: non-finite value");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("pearson_matrix: alpha must lie in (0, 1)");
    const Eigen::Index p = data.cols();
    const double n = static_cast<double>(data.rows());
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Vector norms = centered.colwise().norm();

    CorrelationMatrix out;
    out.r = Matrix::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    out.p_value = out.r;
    out.significant = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, p, false);
    out.zero_variance.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j)
        out.zero_variance[static_cast<std::size_t>(j)] =
            !(norms[j] > 1e-14 * std::max(1.0, data.col(j).cwiseAbs().maxCoeff()) * std::sqrt(n));

    const boost::math::students_t dist(n - 2.0);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            if (out.zero_variance[static_cast<std::size_t>(i)] || out.zero_variance[static_cast<std::size_t>(j)])
                continue;
            double r = i == j ? 1.0 : centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]);
            r = std::clamp(r, -1.0, 1.0);
            double pv = 0.0;
            if (std::abs(r) < 1.0) {
                const double tstat = r * std::sqrt((n - 2.0) / (1.0 - r * r));
                pv = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(tstat)));
            }
            out.r(i, j) = out.r(j, i) = r;
            out.p_value(i, j) = out.p_value(j, i) = pv;
            out.significant(i, j) = out.significant(j, i) = pv < alpha;
        }
    }
    return out;
}

}  // namespace ufrkit
