#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ufrkit/learners.hpp"

namespace ufrkit {

/// Feed-forward network made of input branches whose outputs are concatenated and fed
/// to a combiner stack ending in one linear output. A branch with no layers passes its
/// input columns through unchanged.
class MlpNetwork {
  public:
    struct Layer {
        Matrix w;  // out x in
        Vector b;
        bool relu;
    };
    struct Branch {
        std::vector<std::size_t> columns;
        std::vector<Layer> layers;
    };

    MlpNetwork(std::vector<Branch> branches, std::vector<Layer> combiner, std::size_t inputs);

    /// Wires the architecture from the group labels of the input columns and draws
    /// He-uniform weights (Glorot-uniform for the linear output) from `seed`.
    static MlpNetwork build(const MlpParams& params, std::span<const std::string> groups, std::uint64_t seed);

    [[nodiscard]] std::size_t inputs() const noexcept { return inputs_; }
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] Vector parameters() const;
    void set_parameters(const Vector& theta);

    [[nodiscard]] Vector forward(const Matrix& x) const;
    [[nodiscard]] double forward_row(std::span<const double> row) const;
    /// 0.5 * mean squared error + 0.5 * l2 * (sum of squared weights; biases excluded).
    [[nodiscard]] double loss(const Matrix& x, const Vector& y, double l2) const;
    /// Gradient of loss() with respect to parameters(), by backpropagation.
    [[nodiscard]] Vector gradient(const Matrix& x, const Vector& y, double l2) const;

    [[nodiscard]] const std::vector<Branch>& branches() const noexcept { return branches_; }
    [[nodiscard]] const std::vector<Layer>& combiner() const noexcept { return combiner_; }

  private:
    std::vector<Branch> branches_;
    std::vector<Layer> combiner_;
    std::size_t inputs_;
};

class MlpModel : public FittedModel {
  public:
    MlpModel(MlpNetwork net, double y_mean, double y_scale, std::vector<double> loss_history)
        : net_(std::move(net)), y_mean_(y_mean), y_scale_(y_scale), history_(std::move(loss_history)) {}

    [[nodiscard]] double predict(std::span<const double> row) const override;
    [[nodiscard]] std::size_t features() const override { return net_.inputs(); }
    using FittedModel::predict;

    [[nodiscard]] const MlpNetwork& network() const noexcept { return net_; }
    /// Training loss (standardized target units) before the first epoch and after each epoch.
    [[nodiscard]] const std::vector<double>& loss_history() const noexcept { return history_; }

  private:
    MlpNetwork net_;
    double y_mean_;
    double y_scale_;
    std::vector<double> history_;
};

/// Gradient descent on the standardized target with seeded initialization and shuffling.
/// Throws ConvergenceError if the loss becomes non-finite.
[[nodiscard]] MlpModel fit_mlp(const Dataset& ds, const MlpParams& params, std::uint64_t seed);

}  // namespace ufrkit
