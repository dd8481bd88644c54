#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ufrkit/learners.hpp"
#include "ufrkit/parallel.hpp"

namespace ufrkit {

struct TreeNode {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction
};

class RegressionTree : public FittedModel {
  public:
    RegressionTree(std::vector<TreeNode> nodes, std::size_t features)
        : nodes_(std::move(nodes)), features_(features) {}

    [[nodiscard]] double predict(std::span<const double> row) const override;
    [[nodiscard]] std::size_t features() const override { return features_; }
    using FittedModel::predict;

    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] int depth() const;
    [[nodiscard]] int leaves() const;

  private:
    std::vector<TreeNode> nodes_;
    std::size_t features_;
};

/// Greedy variance-reduction CART; leaves predict the region mean. A node splits only when
/// the best SSE reduction is positive.
[[nodiscard]] RegressionTree fit_tree(const Dataset& ds, const TreeParams& params);

class ForestModel : public FittedModel {
  public:
    explicit ForestModel(std::vector<RegressionTree> trees, std::size_t features)
        : trees_(std::move(trees)), features_(features) {}

    [[nodiscard]] double predict(std::span<const double> row) const override;
    [[nodiscard]] std::size_t features() const override { return features_; }
    using FittedModel::predict;
    [[nodiscard]] const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

  private:
    std::vector<RegressionTree> trees_;
    std::size_t features_;
};

/// Bagged trees with per-split feature subsampling. Member seeds are derived from `seed`
/// and the tree index, so parallel and serial fits agree exactly.
[[nodiscard]] ForestModel fit_forest(const Dataset& ds, const TreeParams& tree, const ForestParams& forest,
                                     std::uint64_t seed, Exec exec = Exec::Serial);

/// F(x) = base + eta * sum_m h_m(x).
class BoostedModel : public FittedModel {
  public:
    BoostedModel(double base, double eta, std::vector<RegressionTree> stages, std::size_t features)
        : base_(base), eta_(eta), stages_(std::move(stages)), features_(features) {}

    [[nodiscard]] double predict(std::span<const double> row) const override;
    [[nodiscard]] std::size_t features() const override { return features_; }
    using FittedModel::predict;
    /// Prediction after the first `m` stages.
    [[nodiscard]] double predict_stage(std::span<const double> row, std::size_t m) const;
    [[nodiscard]] double base() const noexcept { return base_; }
    [[nodiscard]] const std::vector<RegressionTree>& stages() const noexcept { return stages_; }

  private:
    double base_;
    double eta_;
    std::vector<RegressionTree> stages_;
    std::size_t features_;
};

/// Gradient boosting on squared loss: F_0 = mean(y), each stage a CART fit to the residuals.
[[nodiscard]] BoostedModel fit_gbrt(const Dataset& ds, const TreeParams& tree, const BoostParams& boost);

/// Second-order boosting on squared loss (gradient = F - y, hessian = 1): leaf weight
/// G/(H + lambda) on residual sums, split gain 0.5*(GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma.
[[nodiscard]] BoostedModel fit_xgb(const Dataset& ds, const TreeParams& tree, const BoostParams& boost);

}  // namespace ufrkit
