#pragma once

#include <span>
#include <string>
#include <vector>

#include "ufrkit/learners.hpp"

namespace ufrkit {

/// y = intercept + x . coef
class LinearModel : public FittedModel {
  public:
    LinearModel(double intercept, Vector coef) : intercept_(intercept), coef_(std::move(coef)) {}

    [[nodiscard]] double predict(std::span<const double> row) const override;
    [[nodiscard]] std::size_t features() const override { return static_cast<std::size_t>(coef_.size()); }
    using FittedModel::predict;

    [[nodiscard]] double intercept() const noexcept { return intercept_; }
    [[nodiscard]] const Vector& coef() const noexcept { return coef_; }
    /// Coordinate-descent sweeps used (0 for closed-form fits).
    [[nodiscard]] int sweeps() const noexcept { return sweeps_; }
    void set_sweeps(int s) noexcept { sweeps_ = s; }

  private:
    double intercept_;
    Vector coef_;
    int sweeps_ = 0;
};

/// Least squares; throws FitError when the design (with intercept, if any) is rank deficient.
[[nodiscard]] LinearModel fit_ols(const Dataset& ds, bool intercept = true);

enum class PenaltyKind { Ridge, Lasso, ElasticNet };

struct Penalty {
    PenaltyKind kind = PenaltyKind::Ridge;
    double lambda = 1.0;
    double mu = 0.5;  // ElasticNet mixing, 1 = lasso
    int max_sweeps = 10000;
    double tolerance = 1e-9;  // max absolute coefficient change per sweep
};

/// Minimizes 0.5*RSS + penalty; the intercept is never penalized. Ridge is closed form,
/// Lasso and ElasticNet use cyclic coordinate descent and throw ConvergenceError at the cap.
[[nodiscard]] LinearModel fit_penalized(const Dataset& ds, const Penalty& penalty, bool intercept = true);

/// Soft-thresholding operator S(z, g) = sign(z) max(|z| - g, 0).
[[nodiscard]] double soft_threshold(double z, double g);

struct PcaResult {
    Vector mean;
    Vector scale;            // ones when not standardized
    Matrix loadings;         // p x k, unit columns, largest-magnitude entry positive
    Matrix scores;           // n x k
    Vector singular_values;  // all of them, descending
    Vector explained_ratio;  // k leading ratios of variance explained
    int rank = 0;

    [[nodiscard]] Matrix transform(const Matrix& x) const;
};

/// Principal components of the centered (and optionally column-standardized) matrix.
/// Throws DomainError unless 1 <= k <= rank.
[[nodiscard]] PcaResult pca(const Matrix& x, int k, bool standardize = true);

/// OLS on the first k principal-component scores, mapped back to feature coordinates.
[[nodiscard]] LinearModel fit_pcr(const Dataset& ds, int k);

/// PLS1 by NIPALS with X and y deflation, k latent components, as a linear model.
[[nodiscard]] LinearModel fit_pls(const Dataset& ds, int k);

/// First principal component of each feature group, used to compress a macro panel
/// to one standardized score per group.
class GroupComponents {
  public:
    /// `groups` labels the columns of `x`; only columns whose label is in `selected` are used,
    /// one score per entry of `selected`, in that order.
    GroupComponents(const Matrix& x, std::span<const std::string> groups, std::vector<std::string> selected);

    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    /// n x g standardized scores of the fitting rows.
    [[nodiscard]] const Matrix& scores() const noexcept { return scores_; }
    [[nodiscard]] const Vector& explained_ratio() const noexcept { return explained_; }
    [[nodiscard]] Matrix transform(const Matrix& x) const;
    void transform_row(std::span<const double> row, std::span<double> out) const;

  private:
    struct Group {
        std::vector<std::size_t> columns;
        Vector mean;
        Vector scale;
        Vector loading;
        double score_sd = 1.0;
    };
    std::vector<std::string> names_;
    std::vector<Group> groups_;
    Matrix scores_;
    Vector explained_;
};

[[nodiscard]] GroupComponents pca_first_per_group(const Matrix& x, std::span<const std::string> groups,
                                                  std::vector<std::string> selected);

}  // namespace ufrkit
