#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ufrkit/types.hpp"

namespace ufrkit {

/// Strictly increasing, positive payment dates in years.
class TermGrid {
  public:
    explicit TermGrid(std::vector<double> maturities);

    [[nodiscard]] std::size_t size() const noexcept { return maturities_.size(); }
    [[nodiscard]] double operator[](std::size_t j) const { return maturities_[j]; }
    [[nodiscard]] double back() const { return maturities_.back(); }
    [[nodiscard]] std::span<const double> maturities() const noexcept { return maturities_; }

    friend bool operator==(const TermGrid&, const TermGrid&) = default;

  private:
    std::vector<double> maturities_;
};

/// N x J cashflow matrix, N instruments over J payment dates, J >= N.
class CashflowMatrix {
  public:
    explicit CashflowMatrix(Matrix c);
    static CashflowMatrix identity(std::size_t n);

    [[nodiscard]] const Matrix& matrix() const noexcept { return c_; }
    [[nodiscard]] std::size_t instruments() const noexcept { return static_cast<std::size_t>(c_.rows()); }
    [[nodiscard]] std::size_t dates() const noexcept { return static_cast<std::size_t>(c_.cols()); }
    [[nodiscard]] bool is_identity() const noexcept { return identity_; }

  private:
    Matrix c_;
    bool identity_ = false;
};

// Wilson kernels. All throw DomainError on non-finite or out-of-domain input.

/// H(t,u) = alpha*min(t,u) - 0.5*exp(-alpha*max(t,u))*(exp(alpha*min) - exp(-alpha*min)).
[[nodiscard]] double wilson_h(double t, double u, double alpha);

/// W(t,u) = exp(-f_inf*(t+u)) * H(t,u).
[[nodiscard]] double wilson_w(double t, double u, double alpha, double f_inf);

/// Smoothed kernel used by the smoothest-forward-rate weights; tends to 1 as t grows
/// and vanishes at t = 0.
[[nodiscard]] double wilson_wbar(double t, double u, double alpha_bar);

/// J x J matrix of H(u_i, u_j).
[[nodiscard]] Matrix wilson_h_matrix(const TermGrid& grid, double alpha);

/// A fitted Smith-Wilson discount curve
///   P(tau) = exp(-f_inf*tau) + sum_i xi_i sum_j c_ij W(tau, u_j).
/// Immutable; safe to share between threads.
class SmithWilsonCurve {
  public:
    SmithWilsonCurve(TermGrid grid, CashflowMatrix cashflows, double alpha, double f_inf, Vector xi);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double f_inf() const noexcept { return f_inf_; }
    [[nodiscard]] const Vector& xi() const noexcept { return xi_; }
    [[nodiscard]] const TermGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const CashflowMatrix& cashflows() const noexcept { return cashflows_; }

    [[nodiscard]] double discount(double tau) const;
    /// Continuously-compounded zero rate; tau must be > 0.
    [[nodiscard]] double yield_at(double tau) const;
    /// Instantaneous forward -d ln P / d tau by central differences.
    [[nodiscard]] double forward_at(double tau, double step = 1e-4) const;
    /// Model prices sum_j c_ij P(u_j) for an arbitrary cashflow matrix on the same grid.
    [[nodiscard]] Vector price_instruments(const CashflowMatrix& cashflows) const;

  private:
    TermGrid grid_;
    CashflowMatrix cashflows_;
    double alpha_;
    double f_inf_;
    Vector xi_;
    Vector weights_;  // C^T xi, one weight per grid date
};

/// Solves (C W C^T) xi = m - C exp(-f_inf u) so that the curve reprices `prices`
/// exactly. Throws FitError when the system's condition number exceeds 1e12.
[[nodiscard]] SmithWilsonCurve fit_curve(std::span<const double> prices, const CashflowMatrix& cashflows,
                                         const TermGrid& grid, double alpha, double f_inf);

/// Dated cross-sections of continuously-compounded zero rates (decimal), one row per date.
struct QuotePanel {
    std::vector<std::string> dates;
    TermGrid grid;
    Matrix yields;  // dates x maturities

    QuotePanel(std::vector<std::string> dates, TermGrid grid, Matrix yields);

    [[nodiscard]] std::size_t size() const noexcept { return dates.size(); }
    [[nodiscard]] std::vector<double> yields_row(std::size_t t) const;
    [[nodiscard]] std::vector<double> prices_row(std::size_t t) const;
};

// Rate conventions.

[[nodiscard]] std::vector<double> prices_from_yields(std::span<const double> yields, const TermGrid& grid);
[[nodiscard]] std::vector<double> yields_from_prices(std::span<const double> prices, const TermGrid& grid);

/// ln(1 + r).
[[nodiscard]] double continuous_from_annual(double annual_rate);

/// exp(f) - 1, adjusted by at most a few ulps so that continuous_from_annual()
/// maps the result back to exactly `f`.
[[nodiscard]] double annual_from_continuous(double f);

/// Nearest value g to f (within an ulp or two) with continuous_from_annual(annual_from_continuous(g)) == g.
/// Not every double is reachable through log1p when e^f - 1 lies in a higher binade than f;
/// stored f_inf values are snapped so the reported/continuous pair is exact.
[[nodiscard]] double snap_continuous(double f);

}  // namespace ufrkit
