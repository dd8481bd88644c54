#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ufrkit/curve.hpp"
#include "ufrkit/parallel.hpp"
#include "ufrkit/types.hpp"

namespace ufrkit {

enum class UfrMethod { SDF, SFR, SYC, ZJW };

[[nodiscard]] std::string_view to_string(UfrMethod m);
/// Case-insensitive; throws ValidationError for unknown names.
[[nodiscard]] UfrMethod parse_method(std::string_view name);

/// Bracket for the 1-D search on f_inf. Expansions widen the bracket by its own
/// width on both sides.
struct RootBracket {
    double lo = 1e-4;
    double hi = 0.20;
    int expansions = 2;
    int scan_points = 48;
};

struct ZjwConfig {
    double f_prior = 0.045;
    double lambda = 1.0;
    double alpha_min = 0.05;
    double convergence_point = 60.0;
    double forward_gap_tol = 1e-4;
    double alpha_lo = 0.05;
    double alpha_hi = 1.0;
    double alpha_step = 0.001;
    RootBracket bracket{};

    /// Throws ValidationError when a field is out of range.
    void validate() const;
    [[nodiscard]] std::vector<double> alpha_grid() const;
};

/// Zero-coupon first-order condition
///   F(f) = sum_ij (u_i pi_i e^{f u_i}) [H^-1]_ij (pi_j e^{f u_j} - 1) + lambda (f - f_prior)
/// with pi = C^-1 m. H^-1 does not depend on f, so a problem is cheap to evaluate repeatedly.
class FocProblem {
  public:
    FocProblem(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid, double alpha);
    /// Shares a precomputed H^-1 for `alpha` (see ZjwKernelCache).
    FocProblem(std::vector<double> pi, const TermGrid& grid, double alpha, std::shared_ptr<const Matrix> h_inverse);

    [[nodiscard]] double residual(double f, double lambda = 0.0, double f_prior = 0.0) const;
    /// Fitted Smith-Wilson curve at f, expressed on the grid dates with identity cashflows.
    [[nodiscard]] SmithWilsonCurve curve(double f) const;

    [[nodiscard]] const std::vector<double>& pi() const noexcept { return pi_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] const TermGrid& grid() const noexcept { return grid_; }

  private:
    std::vector<double> pi_;
    TermGrid grid_;
    double alpha_;
    std::shared_ptr<const Matrix> h_inverse_;
};

/// Every root of the FOC inside the bracket (after expansions), ascending.
/// Throws ExtractionError when no sign change is found.
[[nodiscard]] std::vector<double> foc_roots(const FocProblem& foc, double lambda, double f_prior,
                                            const RootBracket& bracket = {});

/// Root closest to `reference`.
[[nodiscard]] double select_root(std::span<const double> roots, double reference);

// SDF

[[nodiscard]] double extract_sdf(std::span<const double> prices, const CashflowMatrix& cashflows,
                                 const TermGrid& grid, double alpha, std::optional<double> reference = {},
                                 const RootBracket& bracket = {});

// SFR / SYC

/// (1/u_k) * integral_0^{u_k} Wbar(s, u_j) ds, adaptive Simpson to 1e-10.
[[nodiscard]] double sfr_gram_entry(double u_k, double u_j, double alpha_bar);
/// W(u_k, u_j) / (alpha u_j). The weights use f_inf = 0.
[[nodiscard]] double syc_gram_entry(double u_k, double u_j, double alpha, double f_inf = 0.0);

struct SmoothWeights {
    UfrMethod method;
    Matrix g;
    Matrix g_inverse;
    double v0;
    Vector v;  // v_1..v_n, aligned with the grid
};

/// Affine weights with f_inf = v0*y0 + sum_k v_k y_k. `alpha_bar` <= 0 means alpha_bar = alpha.
[[nodiscard]] SmoothWeights sfr_syc_weights(const TermGrid& grid, double alpha, UfrMethod method,
                                            double alpha_bar = 0.0);

/// Short rate that makes the curve smoothest near zero, from the weights' G^-1.
[[nodiscard]] double optimized_short_rate(const SmoothWeights& w, std::span<const double> yields,
                                          const TermGrid& grid);

/// f_inf = v0*y0 + sum v_k y_k with y0 from optimized_short_rate().
[[nodiscard]] double smooth_ufr(const SmoothWeights& w, std::span<const double> yields, const TermGrid& grid);

[[nodiscard]] double extract_sfr(std::span<const double> prices, const CashflowMatrix& cashflows,
                                 const TermGrid& grid, double alpha);
[[nodiscard]] double extract_syc(std::span<const double> prices, const CashflowMatrix& cashflows,
                                 const TermGrid& grid, double alpha);

// ZJW

/// H^-1 for every alpha on a ZJW grid, computed once per maturity grid. Alphas whose
/// H fails the condition guard are stored as null and never selected.
class ZjwKernelCache {
  public:
    ZjwKernelCache(const TermGrid& grid, const ZjwConfig& config);

    [[nodiscard]] const TermGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    [[nodiscard]] const std::shared_ptr<const Matrix>& h_inverse(std::size_t k) const { return inverses_[k]; }

  private:
    TermGrid grid_;
    std::vector<double> alphas_;
    std::vector<std::shared_ptr<const Matrix>> inverses_;
};

[[nodiscard]] double zjw_foc_solve(std::span<const double> prices, const CashflowMatrix& cashflows,
                                   const TermGrid& grid, double alpha, double lambda, double f_prior,
                                   std::optional<double> reference = {}, const RootBracket& bracket = {});

struct AlphaSelection {
    double alpha;
    double f_inf;        // root of the penalized FOC at `alpha`
    bool feasible;       // false when the feasible set was empty and alpha_hi was used
    std::size_t index;   // position on the alpha grid
};

/// Smallest grid alpha in the feasible set: alpha >= alpha_min, the sign condition
/// F(0) - lambda*f_prior < 0, and |forward(CP) - f_inf^alpha| <= forward_gap_tol.
[[nodiscard]] AlphaSelection zjw_alpha_star(std::span<const double> prices, const CashflowMatrix& cashflows,
                                            const TermGrid& grid, const ZjwConfig& config,
                                            const ZjwKernelCache* cache = nullptr);

struct ZjwResult {
    double f_inf;
    double alpha;
    bool feasible;
    std::vector<double> roots;  // all roots at the selected alpha
};

[[nodiscard]] ZjwResult zjw_extract(std::span<const double> prices, const CashflowMatrix& cashflows,
                                    const TermGrid& grid, const ZjwConfig& config,
                                    std::optional<double> reference = {}, const ZjwKernelCache* cache = nullptr);

// Series

struct ExtractOptions {
    double alpha = 0.1;  // fixed alpha for SDF / SFR / SYC
    ZjwConfig zjw{};
};

/// One value per date. `f_inf` is continuous; missing cells are NaN with the
/// failure message recorded.
struct UfrSeries {
    UfrMethod method = UfrMethod::SDF;
    std::vector<std::string> dates;
    std::vector<double> f_inf;
    std::vector<double> alpha_path;     // ZJW only
    std::vector<bool> flagged;          // ZJW only: empty feasible set on that date
    std::vector<std::string> failures;  // empty string when the date succeeded

    [[nodiscard]] std::size_t size() const noexcept { return dates.size(); }
    /// Annually-compounded UFR, e^{f_inf} - 1.
    [[nodiscard]] std::vector<double> reported() const;
    [[nodiscard]] bool complete() const;
};

/// Per-date extraction. Dates are solved independently (in parallel when requested);
/// a serial pass then resolves multiple FOC roots toward the previous date's value.
/// `cache` may be supplied for ZJW to reuse the alpha-grid kernels across calls; it must
/// have been built for the panel's grid and the options' ZJW config.
[[nodiscard]] UfrSeries extract_series(const QuotePanel& panel, UfrMethod method, const ExtractOptions& options,
                                       Exec exec = Exec::Serial, const ZjwKernelCache* cache = nullptr);

struct LambdaSearch {
    double lo = 1e-2;
    double hi = 1e4;
    int points = 61;
    double log_tolerance = 1e-7;  // golden-section stop, width in log10(lambda)
};

struct LambdaCalibration {
    double lambda_star;
    double objective;
    std::vector<double> grid_lambdas;
    std::vector<double> grid_objective;
    bool degenerate;
};

/// Objective sum_t (ZJW_t(lambda) - SFR_t)^2 + sum_t (ZJW_t(lambda) - SYC_t)^2 on reported
/// (annually-compounded) UFRs.
class LambdaObjective {
  public:
    LambdaObjective(const QuotePanel& panel, ExtractOptions options, Exec exec = Exec::Serial);

    [[nodiscard]] double operator()(double lambda) const;
    [[nodiscard]] const std::vector<double>& sfr() const noexcept { return sfr_; }
    [[nodiscard]] const std::vector<double>& syc() const noexcept { return syc_; }

  private:
    const QuotePanel* panel_;
    ExtractOptions options_;
    Exec exec_;
    std::shared_ptr<const ZjwKernelCache> cache_;
    std::vector<double> sfr_;
    std::vector<double> syc_;
};

/// Log-spaced grid search followed by golden-section refinement around the grid minimum.
[[nodiscard]] LambdaCalibration calibrate_lambda(const QuotePanel& panel, const ExtractOptions& options,
                                                 const LambdaSearch& search = {}, Exec exec = Exec::Serial);

}  // namespace ufrkit
