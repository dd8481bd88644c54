#include "ufrkit/ufr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "ufrkit/error.hpp"
#include "ufrkit/linalg.hpp"

namespace ufrkit {

std::string_view to_string(UfrMethod m) {
    switch (m) {
        case UfrMethod::SDF: return "sdf";
        case UfrMethod::SFR: return "sfr";
        case UfrMethod::SYC: return "syc";
        case UfrMethod::ZJW: return "zjw";
    }
    return "?";
}

UfrMethod parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "sdf") return UfrMethod::SDF;
    if (lower == "sfr") return UfrMethod::SFR;
    if (lower == "syc") return UfrMethod::SYC;
    if (lower == "zjw") return UfrMethod::ZJW;
    throw ValidationError("unknown UFR method '" + std::string(name) + "' (expected sdf, sfr, syc or zjw)");
}

void ZjwConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("ZjwConfig: ") + what + " must be positive");
    };
    if (!(f_prior >= 0.0) || !std::isfinite(f_prior)) throw ValidationError("ZjwConfig: f_prior must be nonnegative");
    positive(alpha_min, "alpha_min");
    positive(convergence_point, "convergence_point");
    positive(forward_gap_tol, "forward_gap_tol");
    positive(alpha_lo, "alpha_lo");
    positive(alpha_step, "alpha_step");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("ZjwConfig: lambda must be nonnegative");
    if (!(alpha_lo < alpha_hi)) throw ValidationError("ZjwConfig: alpha_lo must be below alpha_hi");
    if (!(bracket.lo < bracket.hi)) throw ValidationError("ZjwConfig: root bracket lo must be below hi");
    if (bracket.scan_points < 2) throw ValidationError("ZjwConfig: root scan needs at least 2 points");
}

std::vector<double> ZjwConfig::alpha_grid() const {
    const auto steps = static_cast<std::size_t>(std::floor((alpha_hi - alpha_lo) / alpha_step + 1e-9));
    std::vector<double> grid(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) grid[k] = alpha_lo + static_cast<double>(k) * alpha_step;
    return grid;
}

// ---------------------------------------------------------------------------
// First-order condition

namespace {

std::vector<double> implied_zero_prices(std::span<const double> prices, const CashflowMatrix& cashflows,
                                        const TermGrid& grid) {
    if (prices.size() != cashflows.instruments()) throw DomainError("price count != instrument count");
    if (cashflows.dates() != grid.size()) throw DomainError("cashflow columns != grid size");
    if (cashflows.instruments() != cashflows.dates())
        throw ExtractionError("endogenous UFR extraction requires a square, invertible cashflow matrix");
    if (cashflows.is_identity()) return {prices.begin(), prices.end()};
    Vector m(static_cast<Eigen::Index>(prices.size()));
    for (std::size_t i = 0; i < prices.size(); ++i) m[static_cast<Eigen::Index>(i)] = prices[i];
    const GuardedLu lu(cashflows.matrix(), "cashflow matrix C");
    const Vector pi = lu.solve(m);
    return {pi.data(), pi.data() + pi.size()};
}

std::shared_ptr<const Matrix> h_inverse_for(const TermGrid& grid, double alpha) {
    const GuardedLu lu(wilson_h_matrix(grid, alpha), "Wilson H matrix");
    return std::make_shared<const Matrix>(lu.inverse());
}

}  // namespace

FocProblem::FocProblem(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                       double alpha)
    : FocProblem(implied_zero_prices(prices, cashflows, grid), grid, alpha,
                 (alpha > 0.0 ? h_inverse_for(grid, alpha) : nullptr)) {}

FocProblem::FocProblem(std::vector<double> pi, const TermGrid& grid, double alpha,
                       std::shared_ptr<const Matrix> h_inverse)
    : pi_(std::move(pi)), grid_(grid), alpha_(alpha), h_inverse_(std::move(h_inverse)) {
    if (!(alpha_ > 0.0)) throw DomainError("FocProblem: alpha must be positive");
    if (!h_inverse_) throw DomainError("FocProblem: missing H inverse");
    if (pi_.size() != grid_.size()) throw DomainError("FocProblem: price count != grid size");
    for (double p : pi_)
        if (!(p > 0.0) || !std::isfinite(p)) throw ExtractionError("FocProblem: implied zero prices must be positive");
}

double FocProblem::residual(double f, double lambda, double f_prior) const {
    const auto n = static_cast<Eigen::Index>(pi_.size());
    Vector a(n);
    Vector b(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double growth = pi_[static_cast<std::size_t>(j)] * std::exp(f * grid_[static_cast<std::size_t>(j)]);
        a[j] = grid_[static_cast<std::size_t>(j)] * growth;
        b[j] = growth - 1.0;
    }
    return a.dot(*h_inverse_ * b) + lambda * (f - f_prior);
}

SmithWilsonCurve FocProblem::curve(double f) const {
    // With C invertible, C^T xi = D^-1 H^-1 (pi e^{f u} - 1).
    const auto n = static_cast<Eigen::Index>(pi_.size());
    Vector b(n);
    for (Eigen::Index j = 0; j < n; ++j) b[j] = pi_[static_cast<std::size_t>(j)] * std::exp(f * grid_[j]) - 1.0;
    Vector w = *h_inverse_ * b;
    for (Eigen::Index j = 0; j < n; ++j) w[j] *= std::exp(f * grid_[j]);
    return SmithWilsonCurve(grid_, CashflowMatrix::identity(pi_.size()), alpha_, f, std::move(w));
}

// ---------------------------------------------------------------------------
// Root search

namespace {

/// Bisection-secant hybrid on a sign-changing bracket.
double refine_root(const std::function<double(double)>& fn, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double best = std::abs(fa) < std::abs(fb) ? a : b;
    double fbest = std::min(std::abs(fa), std::abs(fb));
    for (int iter = 0; iter < 200; ++iter) {
        double x = b - fb * (b - a) / (fb - fa);
        const double mid = 0.5 * (a + b);
        // Fall back to bisection when the secant step leaves the bracket or lands too close to an end.
        const double margin = 0.05 * (b - a);
        if (!std::isfinite(x) || x <= a + margin || x >= b - margin) x = mid;
        const double fx = fn(x);
        if (std::abs(fx) < fbest) {
            fbest = std::abs(fx);
            best = x;
        }
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    }
    return best;
}

std::vector<double> scan_roots(const std::function<double(double)>& fn, double lo, double hi, int points) {
    std::vector<double> roots;
    const double h = (hi - lo) / points;
    double x0 = lo;
    double f0 = fn(x0);
    if (f0 == 0.0) roots.push_back(x0);
    for (int k = 1; k <= points; ++k) {
        const double x1 = (k == points) ? hi : lo + k * h;
        const double f1 = fn(x1);
        if (f1 == 0.0) {
            roots.push_back(x1);
        } else if (f0 != 0.0 && std::isfinite(f0) && std::isfinite(f1) && ((f0 < 0.0) != (f1 < 0.0))) {
            roots.push_back(refine_root(fn, x0, x1, f0, f1));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

}  // namespace

std::vector<double> foc_roots(const FocProblem& foc, double lambda, double f_prior, const RootBracket& bracket) {
    if (!(bracket.lo < bracket.hi)) throw DomainError("foc_roots: empty bracket");
    const std::function<double(double)> fn = [&](double f) { return foc.residual(f, lambda, f_prior); };
    double lo = bracket.lo;
    double hi = bracket.hi;
    for (int attempt = 0; attempt <= bracket.expansions; ++attempt) {
        auto roots = scan_roots(fn, lo, hi, bracket.scan_points * (1 << attempt));
        if (!roots.empty()) return roots;
        const double width = hi - lo;
        lo -= width;
        hi += width;
    }
    std::ostringstream os;
    os << "no sign change of the first-order condition in [" << lo << ", " << hi << "] at alpha " << foc.alpha();
    throw ExtractionError(os.str());
}

double select_root(std::span<const double> roots, double reference) {
    if (roots.empty()) throw ExtractionError("select_root: no roots");
    double best = roots.front();
    for (double r : roots)
        if (std::abs(r - reference) < std::abs(best - reference)) best = r;
    return best;
}

double extract_sdf(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                   double alpha, std::optional<double> reference, const RootBracket& bracket) {
    const FocProblem foc(prices, cashflows, grid, alpha);
    const auto roots = foc_roots(foc, 0.0, 0.0, bracket);
    return select_root(roots, reference.value_or(ZjwConfig{}.f_prior));
}

// ---------------------------------------------------------------------------
// SFR / SYC

namespace {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double sfr_gram_entry(double u_k, double u_j, double alpha_bar) {
    if (!(u_k > 0.0) || !(u_j > 0.0)) throw DomainError("sfr_gram_entry: maturities must be positive");
    const auto kernel = [&](double s) { return wilson_wbar(s, u_j, alpha_bar); };
    constexpr double tol = 1e-10;
    const double split = std::min(u_j, u_k);
    const double integral = adaptive_simpson(kernel, 0.0, split, 0.5 * tol) +
                            adaptive_simpson(kernel, split, u_k, 0.5 * tol);
    return integral / u_k;
}

double syc_gram_entry(double u_k, double u_j, double alpha, double f_inf) {
    if (!(u_j > 0.0)) throw DomainError("syc_gram_entry: u_j must be positive");
    return wilson_w(u_k, u_j, alpha, f_inf) / (alpha * u_j);
}

SmoothWeights sfr_syc_weights(const TermGrid& grid, double alpha, UfrMethod method, double alpha_bar) {
    if (method != UfrMethod::SFR && method != UfrMethod::SYC)
        throw DomainError("sfr_syc_weights: method must be SFR or SYC");
    if (!(alpha > 0.0)) throw DomainError("sfr_syc_weights: alpha must be positive");
    const double abar = alpha_bar > 0.0 ? alpha_bar : alpha;
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix g(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < n; ++j)
            g(k, j) = method == UfrMethod::SFR ? sfr_gram_entry(grid[k], grid[j], abar)
                                               : syc_gram_entry(grid[k], grid[j], alpha);
    Matrix ginv;
    try {
        ginv = GuardedLu(g, std::string("G matrix (") + std::string(to_string(method)) + ")").inverse();
    } catch (const FitError& e) {
        throw ExtractionError(e.what());
    }
    SmoothWeights w{method, std::move(g), std::move(ginv), 0.0, Vector(n)};
    for (Eigen::Index k = 0; k < n; ++k) w.v[k] = w.g_inverse.col(k).sum();
    w.v0 = 1.0 - w.v.sum();
    return w;
}

double optimized_short_rate(const SmoothWeights& w, std::span<const double> yields, const TermGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (static_cast<Eigen::Index>(yields.size()) != n || w.g_inverse.rows() != n)
        throw DomainError("optimized_short_rate: size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double row_num = 0.0;
        double row_den = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            row_num += w.g_inverse(j, k) * 0.5 * (yields[static_cast<std::size_t>(j)] + yields[static_cast<std::size_t>(k)]);
            row_den += w.g_inverse(j, k);
        }
        num += row_num / grid[static_cast<std::size_t>(j)];
        den += row_den / grid[static_cast<std::size_t>(j)];
    }
    if (den == 0.0 || !std::isfinite(den)) throw ExtractionError("optimized_short_rate: degenerate weights");
    return num / den;
}

double smooth_ufr(const SmoothWeights& w, std::span<const double> yields, const TermGrid& grid) {
    const double y0 = optimized_short_rate(w, yields, grid);
    double f = w.v0 * y0;
    for (std::size_t k = 0; k < yields.size(); ++k) f += w.v[static_cast<Eigen::Index>(k)] * yields[k];
    return f;
}

namespace {

double extract_smooth(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                      double alpha, UfrMethod method) {
    const auto pi = implied_zero_prices(prices, cashflows, grid);
    for (double p : pi)
        if (!(p > 0.0)) throw ExtractionError("implied zero prices must be positive");
    const auto yields = yields_from_prices(pi, grid);
    return smooth_ufr(sfr_syc_weights(grid, alpha, method), yields, grid);
}

}  // namespace

double extract_sfr(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                   double alpha) {
    return extract_smooth(prices, cashflows, grid, alpha, UfrMethod::SFR);
}

double extract_syc(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                   double alpha) {
    return extract_smooth(prices, cashflows, grid, alpha, UfrMethod::SYC);
}

// ---------------------------------------------------------------------------
// ZJW

ZjwKernelCache::ZjwKernelCache(const TermGrid& grid, const ZjwConfig& config)
    : grid_(grid), alphas_(config.alpha_grid()) {
    inverses_.reserve(alphas_.size());
    for (double a : alphas_) {
        try {
            inverses_.push_back(h_inverse_for(grid_, a));
        } catch (const FitError&) {
            inverses_.push_back(nullptr);
        }
    }
}

double zjw_foc_solve(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                     double alpha, double lambda, double f_prior, std::optional<double> reference,
                     const RootBracket& bracket) {
    if (!(lambda >= 0.0)) throw DomainError("zjw_foc_solve: lambda must be nonnegative");
    const FocProblem foc(prices, cashflows, grid, alpha);
    const auto roots = foc_roots(foc, lambda, f_prior, bracket);
    return select_root(roots, reference.value_or(f_prior));
}

namespace {

struct AlphaScan {
    AlphaSelection selection;
    std::vector<double> roots;
};

AlphaScan scan_alpha(const std::vector<double>& pi, const ZjwConfig& cfg, const ZjwKernelCache& cache) {
    const auto& alphas = cache.alphas();
    if (alphas.empty()) throw ExtractionError("zjw: empty alpha grid");
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double a = alphas[k];
        if (a < cfg.alpha_min || !cache.h_inverse(k)) continue;
        const FocProblem foc(pi, cache.grid(), a, cache.h_inverse(k));
        if (!(foc.residual(0.0, cfg.lambda, cfg.f_prior) < 0.0)) continue;
        std::vector<double> roots;
        try {
            roots = foc_roots(foc, cfg.lambda, cfg.f_prior, cfg.bracket);
        } catch (const ExtractionError&) {
            continue;
        }
        const double f = select_root(roots, cfg.f_prior);
        const double gap = std::abs(foc.curve(f).forward_at(cfg.convergence_point) - f);
        if (gap <= cfg.forward_gap_tol) return {{a, f, true, k}, std::move(roots)};
    }
    // Empty feasible set: fall back to the upper end of the grid and flag the date.
    std::size_t k = alphas.size();
    while (k > 0 && !cache.h_inverse(k - 1)) --k;
    if (k == 0) throw ExtractionError("zjw: no alpha on the grid has a well-conditioned H matrix");
    --k;
    const FocProblem foc(pi, cache.grid(), alphas[k], cache.h_inverse(k));
    auto roots = foc_roots(foc, cfg.lambda, cfg.f_prior, cfg.bracket);
    const double f = select_root(roots, cfg.f_prior);
    return {{alphas[k], f, false, k}, std::move(roots)};
}

const ZjwKernelCache& ensure_cache(const TermGrid& grid, const ZjwConfig& cfg, const ZjwKernelCache* cache,
                                   std::unique_ptr<ZjwKernelCache>& owned) {
    if (cache) {
        if (!(cache->grid() == grid)) throw DomainError("zjw: kernel cache built for a different grid");
        return *cache;
    }
    owned = std::make_unique<ZjwKernelCache>(grid, cfg);
    return *owned;
}

}  // namespace

AlphaSelection zjw_alpha_star(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                              const ZjwConfig& config, const ZjwKernelCache* cache) {
    config.validate();
    std::unique_ptr<ZjwKernelCache> owned;
    const auto& kc = ensure_cache(grid, config, cache, owned);
    return scan_alpha(implied_zero_prices(prices, cashflows, grid), config, kc).selection;
}

ZjwResult zjw_extract(std::span<const double> prices, const CashflowMatrix& cashflows, const TermGrid& grid,
                      const ZjwConfig& config, std::optional<double> reference, const ZjwKernelCache* cache) {
    config.validate();
    std::unique_ptr<ZjwKernelCache> owned;
    const auto& kc = ensure_cache(grid, config, cache, owned);
    auto scan = scan_alpha(implied_zero_prices(prices, cashflows, grid), config, kc);
    const double f = select_root(scan.roots, reference.value_or(config.f_prior));
    return {f, scan.selection.alpha, scan.selection.feasible, std::move(scan.roots)};
}

// ---------------------------------------------------------------------------
// Series

std::vector<double> UfrSeries::reported() const {
    std::vector<double> out(f_inf.size());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = std::isfinite(f_inf[t]) ? annual_from_continuous(f_inf[t]) : f_inf[t];
    return out;
}

bool UfrSeries::complete() const {
    return std::all_of(f_inf.begin(), f_inf.end(), [](double v) { return std::isfinite(v); });
}

UfrSeries extract_series(const QuotePanel& panel, UfrMethod method, const ExtractOptions& options, Exec exec,
                         const ZjwKernelCache* cache) {
    const std::size_t n = panel.size();
    const auto identity = CashflowMatrix::identity(panel.grid.size());
    UfrSeries s;
    s.method = method;
    s.dates = panel.dates;
    s.f_inf.assign(n, std::numeric_limits<double>::quiet_NaN());
    s.failures.assign(n, "");
    std::vector<std::vector<double>> roots(n);

    if (method == UfrMethod::SFR || method == UfrMethod::SYC) {
        // Weights depend only on the grid; compute once.
        const auto weights = sfr_syc_weights(panel.grid, options.alpha, method);
        for_each_index(n, exec, [&](std::size_t t) {
            try {
                s.f_inf[t] = snap_continuous(smooth_ufr(weights, panel.yields_row(t), panel.grid));
            } catch (const Error& e) {
                s.failures[t] = e.what();
            }
        });
        return s;
    }

    if (method == UfrMethod::SDF) {
        const auto hinv = h_inverse_for(panel.grid, options.alpha);
        for_each_index(n, exec, [&](std::size_t t) {
            try {
                const FocProblem foc(panel.prices_row(t), panel.grid, options.alpha, hinv);
                roots[t] = foc_roots(foc, 0.0, 0.0, options.zjw.bracket);
            } catch (const Error& e) {
                s.failures[t] = e.what();
            }
        });
    } else {
        options.zjw.validate();
        std::unique_ptr<ZjwKernelCache> owned;
        const auto& kc = ensure_cache(panel.grid, options.zjw, cache, owned);
        s.alpha_path.assign(n, std::numeric_limits<double>::quiet_NaN());
        std::vector<char> flagged(n, 0);
        for_each_index(n, exec, [&](std::size_t t) {
            try {
                auto scan = scan_alpha(panel.prices_row(t), options.zjw, kc);
                s.alpha_path[t] = scan.selection.alpha;
                flagged[t] = scan.selection.feasible ? 0 : 1;
                roots[t] = std::move(scan.roots);
            } catch (const Error& e) {
                s.failures[t] = e.what();
            }
        });
        s.flagged.assign(flagged.begin(), flagged.end());
    }

    // Multiple roots: stay closest to the previous date's value (first date: the prior).
    double reference = options.zjw.f_prior;
    for (std::size_t t = 0; t < n; ++t) {
        if (roots[t].empty()) continue;
        reference = select_root(roots[t], reference);
        s.f_inf[t] = snap_continuous(reference);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lambda calibration

LambdaObjective::LambdaObjective(const QuotePanel& panel, ExtractOptions options, Exec exec)
    : panel_(&panel), options_(std::move(options)), exec_(exec) {
    if (panel.size() < 2) throw CalibrationError("calibrate_lambda: at least two dates required");
    options_.zjw.validate();
    cache_ = std::make_shared<const ZjwKernelCache>(panel.grid, options_.zjw);
    auto check = [&](const UfrSeries& series) {
        for (std::size_t t = 0; t < series.size(); ++t)
            if (!series.failures[t].empty())
                throw CalibrationError("calibrate_lambda: " + std::string(to_string(series.method)) +
                                       " extraction failed on " + series.dates[t] + ": " + series.failures[t]);
        return series.reported();
    };
    sfr_ = check(extract_series(panel, UfrMethod::SFR, options_, exec_));
    syc_ = check(extract_series(panel, UfrMethod::SYC, options_, exec_));
}

double LambdaObjective::operator()(double lambda) const {
    ExtractOptions opts = options_;
    opts.zjw.lambda = lambda;
    const auto zjw = extract_series(*panel_, UfrMethod::ZJW, opts, exec_, cache_.get());
    double total = 0.0;
    const auto values = zjw.reported();
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (!zjw.failures[t].empty()) {
            std::ostringstream os;
            os << "calibrate_lambda: ZJW extraction failed on " << zjw.dates[t] << " at lambda " << lambda << ": "
               << zjw.failures[t];
            throw CalibrationError(os.str());
        }
        const double a = values[t] - sfr_[t];
        const double b = values[t] - syc_[t];
        total += a * a + b * b;
    }
    return total;
}

LambdaCalibration calibrate_lambda(const QuotePanel& panel, const ExtractOptions& options, const LambdaSearch& search,
                                   Exec exec) {
    if (!(search.lo > 0.0) || !(search.lo < search.hi) || search.points < 2)
        throw ValidationError("calibrate_lambda: invalid lambda search grid");
    const LambdaObjective objective(panel, options, exec);

    LambdaCalibration out;
    const double log_lo = std::log10(search.lo);
    const double log_hi = std::log10(search.hi);
    const double step = (log_hi - log_lo) / (search.points - 1);
    out.grid_lambdas.resize(static_cast<std::size_t>(search.points));
    out.grid_objective.resize(out.grid_lambdas.size());
    for (std::size_t k = 0; k < out.grid_lambdas.size(); ++k) {
        out.grid_lambdas[k] = std::pow(10.0, log_lo + static_cast<double>(k) * step);
        out.grid_objective[k] = objective(out.grid_lambdas[k]);
    }
    const auto best_it = std::min_element(out.grid_objective.begin(), out.grid_objective.end());
    const auto best = static_cast<std::size_t>(best_it - out.grid_objective.begin());
    const double gmax = *std::max_element(out.grid_objective.begin(), out.grid_objective.end());
    const double gmin = *best_it;
    out.lambda_star = out.grid_lambdas[best];
    out.objective = gmin;
    out.degenerate = gmax <= 1e-20 || (gmax - gmin) <= 1e-10 * gmax;
    if (out.degenerate) return out;

    // Golden-section in log10(lambda) on the two grid cells around the minimum.
    const double a0 = log_lo + static_cast<double>(best == 0 ? 0 : best - 1) * step;
    const double b0 = log_lo + static_cast<double>(std::min(best + 1, out.grid_lambdas.size() - 1)) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = a0;
    double b = b0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(std::pow(10.0, c));
    double fd = objective(std::pow(10.0, d));
    while (b - a > search.log_tolerance) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(std::pow(10.0, c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(std::pow(10.0, d));
        }
    }
    const double x = fc <= fd ? c : d;
    const double fx = std::min(fc, fd);
    if (fx < out.objective) {
        out.lambda_star = std::pow(10.0, x);
        out.objective = fx;
    }
    return out;
}

}  // namespace ufrkit
