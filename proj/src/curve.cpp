#include "ufrkit/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ufrkit/error.hpp"
#include "ufrkit/linalg.hpp"

namespace ufrkit {

GuardedLu::GuardedLu(const Matrix& a, const std::string& what) {
    if (a.rows() != a.cols() || a.rows() == 0) throw FitError(what + ": matrix must be square and nonempty");
    if (!a.allFinite()) throw FitError(what + ": matrix has non-finite entries");
    lu_.compute(a);
    rcond_ = lu_.rcond();
    if (!(rcond_ >= 1.0 / kMaxConditionNumber)) {
        std::ostringstream os;
        os << what << ": condition number estimate " << (rcond_ > 0 ? 1.0 / rcond_ : INFINITY)
           << " exceeds threshold " << kMaxConditionNumber;
        throw FitError(os.str());
    }
}

TermGrid::TermGrid(std::vector<double> maturities) : maturities_(std::move(maturities)) {
    if (maturities_.empty()) throw DomainError("TermGrid: at least one maturity required");
    for (std::size_t j = 0; j < maturities_.size(); ++j) {
        if (!std::isfinite(maturities_[j]) || maturities_[j] <= 0.0)
            throw DomainError("TermGrid: maturities must be positive and finite");
        if (j > 0 && maturities_[j] <= maturities_[j - 1])
            throw DomainError("TermGrid: maturities must be strictly increasing");
    }
}

CashflowMatrix::CashflowMatrix(Matrix c) : c_(std::move(c)) {
    if (c_.rows() == 0 || c_.cols() < c_.rows())
        throw DomainError("CashflowMatrix: need N >= 1 instruments and J >= N dates");
    if (!c_.allFinite()) throw DomainError("CashflowMatrix: non-finite cashflow");
    identity_ = c_.rows() == c_.cols() && c_.isIdentity(0.0);
}

CashflowMatrix CashflowMatrix::identity(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return CashflowMatrix(Matrix::Identity(k, k));
}

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite input");
}

}  // namespace

double wilson_h(double t, double u, double alpha) {
    require_finite(t, "wilson_h");
    require_finite(u, "wilson_h");
    require_finite(alpha, "wilson_h");
    if (alpha <= 0.0) throw DomainError("wilson_h: alpha must be positive");
    if (t < 0.0 || u < 0.0) throw DomainError("wilson_h: maturities must be nonnegative");
    const double lo = std::min(t, u);
    const double hi = std::max(t, u);
    // exp(-a*hi) * (exp(a*lo) - exp(-a*lo)) = exp(-a*(hi-lo)) - exp(-a*(hi+lo)); avoids overflow.
    return alpha * lo - 0.5 * (std::exp(-alpha * (hi - lo)) - std::exp(-alpha * (hi + lo)));
}

double wilson_w(double t, double u, double alpha, double f_inf) {
    require_finite(f_inf, "wilson_w");
    return std::exp(-f_inf * (t + u)) * wilson_h(t, u, alpha);
}

double wilson_wbar(double t, double u, double alpha_bar) {
    require_finite(t, "wilson_wbar");
    require_finite(u, "wilson_wbar");
    require_finite(alpha_bar, "wilson_wbar");
    if (alpha_bar <= 0.0) throw DomainError("wilson_wbar: alpha_bar must be positive");
    if (u <= 0.0) throw DomainError("wilson_wbar: u must be positive");
    if (t < 0.0) throw DomainError("wilson_wbar: t must be nonnegative");
    const double denom = 0.5 * alpha_bar * alpha_bar * u * u;
    double value = 1.0 - std::exp(-alpha_bar * t) * (std::cosh(alpha_bar * u) - 1.0) / denom;
    if (t <= u) {
        const double r = alpha_bar * (u - t);
        value += (std::cosh(r) - 1.0 - 0.5 * r * r) / denom;
    }
    return value;
}

Matrix wilson_h_matrix(const TermGrid& grid, double alpha) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix h(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) h(i, j) = h(j, i) = wilson_h(grid[i], grid[j], alpha);
    return h;
}

SmithWilsonCurve::SmithWilsonCurve(TermGrid grid, CashflowMatrix cashflows, double alpha, double f_inf, Vector xi)
    : grid_(std::move(grid)), cashflows_(std::move(cashflows)), alpha_(alpha), f_inf_(f_inf), xi_(std::move(xi)) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw DomainError("SmithWilsonCurve: alpha must be positive");
    if (!std::isfinite(f_inf_)) throw DomainError("SmithWilsonCurve: f_inf must be finite");
    if (cashflows_.dates() != grid_.size()) throw DomainError("SmithWilsonCurve: cashflow columns != grid size");
    if (static_cast<std::size_t>(xi_.size()) != cashflows_.instruments())
        throw DomainError("SmithWilsonCurve: xi length != instrument count");
    if (!xi_.allFinite()) throw DomainError("SmithWilsonCurve: xi must be finite");
    weights_ = cashflows_.matrix().transpose() * xi_;
}

double SmithWilsonCurve::discount(double tau) const {
    require_finite(tau, "discount");
    if (tau < 0.0) throw DomainError("discount: tau must be nonnegative");
    double p = std::exp(-f_inf_ * tau);
    for (std::size_t j = 0; j < grid_.size(); ++j)
        p += weights_[static_cast<Eigen::Index>(j)] * wilson_w(tau, grid_[j], alpha_, f_inf_);
    return p;
}

double SmithWilsonCurve::yield_at(double tau) const {
    require_finite(tau, "yield_at");
    if (tau <= 0.0) throw DomainError("yield_at: tau must be positive");
    return -std::log(discount(tau)) / tau;
}

double SmithWilsonCurve::forward_at(double tau, double step) const {
    if (!(step > 0.0)) throw DomainError("forward_at: step must be positive");
    if (tau - step < 0.0) throw DomainError("forward_at: tau must be at least one step");
    return -(std::log(discount(tau + step)) - std::log(discount(tau - step))) / (2.0 * step);
}

Vector SmithWilsonCurve::price_instruments(const CashflowMatrix& cashflows) const {
    if (cashflows.dates() != grid_.size()) throw DomainError("price_instruments: cashflow columns != grid size");
    Vector p(static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t j = 0; j < grid_.size(); ++j) p[static_cast<Eigen::Index>(j)] = discount(grid_[j]);
    return cashflows.matrix() * p;
}

SmithWilsonCurve fit_curve(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                           double alpha, double f_inf) {
    if (prices.size() != cashflows.instruments()) throw DomainError("fit_curve: price count != instrument count");
    if (cashflows.dates() != grid.size()) throw DomainError("fit_curve: cashflow columns != grid size");
    if (!(alpha > 0.0)) throw DomainError("fit_curve: alpha must be positive");
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix w(n, n);
    Vector q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        q[i] = std::exp(-f_inf * grid[i]);
        for (Eigen::Index j = 0; j <= i; ++j) w(i, j) = w(j, i) = wilson_w(grid[i], grid[j], alpha, f_inf);
    }
    const Matrix& c = cashflows.matrix();
    Vector m(static_cast<Eigen::Index>(prices.size()));
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!std::isfinite(prices[i])) throw DomainError("fit_curve: non-finite price");
        m[static_cast<Eigen::Index>(i)] = prices[i];
    }
    const GuardedLu lu(c * w * c.transpose(), "fit_curve (C W C^T)");
    Vector xi = lu.solve(m - c * q);
    return SmithWilsonCurve(grid, cashflows, alpha, f_inf, std::move(xi));
}

QuotePanel::QuotePanel(std::vector<std::string> d, TermGrid g, Matrix y)
    : dates(std::move(d)), grid(std::move(g)), yields(std::move(y)) {
    if (static_cast<std::size_t>(yields.rows()) != dates.size() ||
        static_cast<std::size_t>(yields.cols()) != grid.size())
        throw DomainError("QuotePanel: yields matrix shape does not match dates x maturities");
    if (!yields.allFinite()) throw DomainError("QuotePanel: missing or non-finite yield cell");
    for (std::size_t t = 1; t < dates.size(); ++t)
        if (!(dates[t - 1] < dates[t])) throw DomainError("QuotePanel: dates must be strictly increasing");
}

std::vector<double> QuotePanel::yields_row(std::size_t t) const {
    std::vector<double> y(grid.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        y[j] = yields(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    return y;
}

std::vector<double> QuotePanel::prices_row(std::size_t t) const { return prices_from_yields(yields_row(t), grid); }

std::vector<double> prices_from_yields(std::span<const double> yields, const TermGrid& grid) {
    if (yields.size() != grid.size()) throw DomainError("prices_from_yields: length mismatch");
    std::vector<double> p(yields.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(-yields[j] * grid[j]);
    return p;
}

std::vector<double> yields_from_prices(std::span<const double> prices, const TermGrid& grid) {
    if (prices.size() != grid.size()) throw DomainError("yields_from_prices: length mismatch");
    std::vector<double> y(prices.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (!(prices[j] > 0.0)) throw DomainError("yields_from_prices: prices must be positive");
        y[j] = -std::log(prices[j]) / grid[j];
    }
    return y;
}

double continuous_from_annual(double annual_rate) {
    if (!(annual_rate > -1.0)) throw DomainError("continuous_from_annual: rate must exceed -1");
    return std::log1p(annual_rate);
}

double annual_from_continuous(double f) {
    require_finite(f, "annual_from_continuous");
    const double r = std::expm1(f);
    if (std::log1p(r) == f) return r;
    double up = r;
    double down = r;
    for (int k = 0; k < 4; ++k) {
        up = std::nextafter(up, INFINITY);
        down = std::nextafter(down, -INFINITY);
        if (std::log1p(up) == f) return up;
        if (down > -1.0 && std::log1p(down) == f) return down;
    }
    return r;
}

double snap_continuous(double f) { return std::log1p(annual_from_continuous(f)); }

}  // namespace ufrkit
