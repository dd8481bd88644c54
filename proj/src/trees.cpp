#include "ufrkit/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "ufrkit/error.hpp"
#include "ufrkit/random.hpp"

namespace ufrkit {

double RegressionTree::predict(std::span<const double> row) const {
    if (row.size() != features_) throw DomainError("RegressionTree: feature count mismatch");
    int k = 0;
    while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
        const auto& n = nodes_[static_cast<std::size_t>(k)];
        k = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(k)].value;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int best = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& n = nodes_[k];
        if (n.feature < 0) continue;
        d[static_cast<std::size_t>(n.left)] = d[k] + 1;
        d[static_cast<std::size_t>(n.right)] = d[k] + 1;
        best = std::max(best, d[k] + 1);
    }
    return best;
}

int RegressionTree::leaves() const {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct SplitRule {
    double reg_lambda = 0.0;
    double gamma = 0.0;
};

/// Builds one tree over a multiset of samples (row index per sample) with given targets.
class TreeBuilder {
  public:
    TreeBuilder(const Matrix& x, std::vector<std::size_t> rows, std::vector<double> targets, const TreeParams& params,
                SplitRule rule, SplitMix64* feature_rng, std::size_t features_per_split)
        : x_(x),
          rows_(std::move(rows)),
          targets_(std::move(targets)),
          params_(params),
          rule_(rule),
          rng_(feature_rng),
          mtry_(features_per_split),
          in_node_(rows_.size(), 0) {
        const auto p = static_cast<std::size_t>(x_.cols());
        sorted_.resize(p);
        for (std::size_t f = 0; f < p; ++f) {
            auto& s = sorted_[f];
            s.resize(rows_.size());
            std::iota(s.begin(), s.end(), std::size_t{0});
            const auto col = static_cast<Eigen::Index>(f);
            std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
                return x_(static_cast<Eigen::Index>(rows_[a]), col) < x_(static_cast<Eigen::Index>(rows_[b]), col);
            });
        }
    }

    RegressionTree build() {
        std::vector<std::size_t> all(rows_.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        nodes_.clear();
        grow(all, 0);
        return RegressionTree(std::move(nodes_), static_cast<std::size_t>(x_.cols()));
    }

  private:
    double leaf_value(double sum, double count) const { return sum / (count + rule_.reg_lambda); }

    int grow(const std::vector<std::size_t>& samples, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        double sum = 0.0;
        double sq = 0.0;
        for (auto s : samples) {
            sum += targets_[s];
            sq += targets_[s] * targets_[s];
        }
        const double count = static_cast<double>(samples.size());
        nodes_[static_cast<std::size_t>(id)].value = leaf_value(sum, count);
        if (depth >= params_.max_depth || samples.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) return id;
        const double mean = sum / count;
        double sse = 0.0;
        for (auto s : samples) sse += (targets_[s] - mean) * (targets_[s] - mean);
        if (!(sse > 1e-24 * std::max(sq, std::numeric_limits<double>::min()))) return id;  // pure node

        for (auto s : samples) in_node_[s] = 1;
        const auto candidates = candidate_features();
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        const double parent = sum * sum / (count + rule_.reg_lambda);
        const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
        for (auto f : candidates) {
            const auto col = static_cast<Eigen::Index>(f);
            double left_sum = 0.0;
            std::size_t left_n = 0;
            double prev_x = 0.0;
            for (auto s : sorted_[f]) {
                if (!in_node_[s]) continue;
                const double xv = x_(static_cast<Eigen::Index>(rows_[s]), col);
                if (left_n >= min_leaf && samples.size() - left_n >= min_leaf && xv > prev_x) {
                    const double right_sum = sum - left_sum;
                    const double ln = static_cast<double>(left_n);
                    const double rn = count - ln;
                    const double raw = left_sum * left_sum / (ln + rule_.reg_lambda) +
                                       right_sum * right_sum / (rn + rule_.reg_lambda) - parent;
                    const double gain = 0.5 * raw - rule_.gamma;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (prev_x + xv);
                    }
                }
                left_sum += targets_[s];
                ++left_n;
                prev_x = xv;
            }
        }
        for (auto s : samples) in_node_[s] = 0;
        // Rounding can produce tiny positive gains on an unsplittable node.
        if (best_feature < 0 || !(best_gain > 1e-12 * 0.5 * sse)) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        const auto col = static_cast<Eigen::Index>(best_feature);
        for (auto s : samples)
            (x_(static_cast<Eigen::Index>(rows_[s]), col) <= best_threshold ? left : right).push_back(s);
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::vector<std::size_t> candidate_features() {
        const auto p = static_cast<std::size_t>(x_.cols());
        std::vector<std::size_t> f(p);
        std::iota(f.begin(), f.end(), std::size_t{0});
        if (!rng_ || mtry_ >= p) return f;
        // Partial Fisher-Yates, then restore column order so ties break the same way.
        for (std::size_t i = 0; i < mtry_; ++i) {
            const auto j = i + static_cast<std::size_t>(rng_->below(p - i));
            std::swap(f[i], f[j]);
        }
        f.resize(mtry_);
        std::sort(f.begin(), f.end());
        return f;
    }

    const Matrix& x_;
    std::vector<std::size_t> rows_;
    std::vector<double> targets_;
    TreeParams params_;
    SplitRule rule_;
    SplitMix64* rng_;
    std::size_t mtry_;
    std::vector<std::vector<std::size_t>> sorted_;
    std::vector<char> in_node_;
    std::vector<TreeNode> nodes_;
};

void check_tree_inputs(const Dataset& ds, const TreeParams& params) {
    ds.validate();
    if (ds.rows() == 0) throw DomainError("tree: empty dataset");
    if (params.min_leaf < 1) throw ValidationError("tree: min_leaf must be at least 1");
    if (params.max_depth < 0) throw ValidationError("tree: max_depth must be nonnegative");
}

std::vector<std::size_t> identity_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

BoostedModel boost(const Dataset& ds, const TreeParams& tree, const BoostParams& params, SplitRule rule) {
    check_tree_inputs(ds, tree);
    if (!(params.eta > 0.0 && params.eta <= 1.0)) throw ValidationError("boosting: eta must lie in (0, 1]");
    if (params.stages < 0) throw ValidationError("boosting: stages must be nonnegative");
    const std::size_t n = ds.rows();
    const double base = ds.y.mean();
    std::vector<double> f(n, base);
    std::vector<double> resid(n);
    std::vector<RegressionTree> stages;
    stages.reserve(static_cast<std::size_t>(params.stages));
    std::vector<double> row(ds.cols());
    for (int m = 0; m < params.stages; ++m) {
        for (std::size_t i = 0; i < n; ++i) resid[i] = ds.y[static_cast<Eigen::Index>(i)] - f[i];
        TreeBuilder builder(ds.x, identity_rows(n), resid, tree, rule, nullptr, ds.cols());
        stages.push_back(builder.build());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < row.size(); ++j)
                row[j] = ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            f[i] += params.eta * stages.back().predict(row);
        }
    }
    return BoostedModel(base, params.eta, std::move(stages), ds.cols());
}

}  // namespace

RegressionTree fit_tree(const Dataset& ds, const TreeParams& params) {
    check_tree_inputs(ds, params);
    std::vector<double> t(ds.y.data(), ds.y.data() + ds.y.size());
    TreeBuilder builder(ds.x, identity_rows(ds.rows()), std::move(t), params, {}, nullptr, ds.cols());
    return builder.build();
}

double ForestModel::predict(std::span<const double> row) const {
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(row);
    return s / static_cast<double>(trees_.size());
}

ForestModel fit_forest(const Dataset& ds, const TreeParams& tree, const ForestParams& forest, std::uint64_t seed,
                       Exec exec) {
    check_tree_inputs(ds, tree);
    if (forest.trees < 1) throw ValidationError("forest: at least one tree required");
    if (!(forest.feature_frac > 0.0 && forest.feature_frac <= 1.0))
        throw ValidationError("forest: feature_frac must lie in (0, 1]");
    const std::size_t n = ds.rows();
    const auto mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(forest.feature_frac * static_cast<double>(ds.cols()))));
    std::vector<std::optional<RegressionTree>> built(static_cast<std::size_t>(forest.trees));
    for_each_index(built.size(), exec, [&](std::size_t m) {
        SplitMix64 rng(derive_seed(seed, "forest.tree", m));
        std::vector<std::size_t> rows(n);
        if (forest.bootstrap) {
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        } else {
            rows = identity_rows(n);
        }
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = ds.y[static_cast<Eigen::Index>(rows[i])];
        TreeBuilder builder(ds.x, std::move(rows), std::move(t), tree, {}, &rng, mtry);
        built[m] = builder.build();
    });
    std::vector<RegressionTree> trees;
    trees.reserve(built.size());
    for (auto& t : built) trees.push_back(std::move(*t));
    return ForestModel(std::move(trees), ds.cols());
}

double BoostedModel::predict(std::span<const double> row) const { return predict_stage(row, stages_.size()); }

double BoostedModel::predict_stage(std::span<const double> row, std::size_t m) const {
    if (row.size() != features_) throw DomainError("BoostedModel: feature count mismatch");
    double f = base_;
    for (std::size_t k = 0; k < std::min(m, stages_.size()); ++k) f += eta_ * stages_[k].predict(row);
    return f;
}

BoostedModel fit_gbrt(const Dataset& ds, const TreeParams& tree, const BoostParams& params) {
    return boost(ds, tree, params, SplitRule{0.0, 0.0});
}

BoostedModel fit_xgb(const Dataset& ds, const TreeParams& tree, const BoostParams& params) {
    if (!(params.reg_lambda >= 0.0)) throw ValidationError("xgb: reg_lambda must be nonnegative");
    if (!(params.gamma >= 0.0)) throw ValidationError("xgb: gamma must be nonnegative");
    return boost(ds, tree, params, SplitRule{params.reg_lambda, params.gamma});
}

}  // namespace ufrkit
