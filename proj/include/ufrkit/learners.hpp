#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ufrkit/types.hpp"

namespace ufrkit {

/// Group label carried by the yield-change features.
inline constexpr std::string_view kYieldGroup = "yields";

/// The 13 macroeconomic categories.
[[nodiscard]] const std::vector<std::string>& macro_group_names();
[[nodiscard]] bool is_known_group(std::string_view name);

/// Rows are dates, columns are features. `groups[j]` labels column j.
struct Dataset {
    Matrix x;
    Vector y;
    std::vector<std::string> names;
    std::vector<std::string> groups;

    Dataset() = default;
    Dataset(Matrix x, Vector y, std::vector<std::string> names = {}, std::vector<std::string> groups = {});

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(x.cols()); }
    /// Rows [begin, end).
    [[nodiscard]] Dataset slice(std::size_t begin, std::size_t end) const;
    /// Column subset, in the given order.
    [[nodiscard]] Dataset select(std::span<const std::size_t> columns) const;
    [[nodiscard]] std::vector<std::size_t> columns_in_group(std::string_view group) const;
    [[nodiscard]] std::vector<std::size_t> columns_not_in_group(std::string_view group) const;
    /// Distinct group labels in first-appearance order.
    [[nodiscard]] std::vector<std::string> group_order() const;
    /// Throws DomainError on shape mismatch or non-finite entries.
    void validate() const;
};

/// Column means and sample standard deviations of a training window. Zero-variance
/// columns get scale 1 so they map to 0.
class Standardizer {
  public:
    Standardizer() = default;
    explicit Standardizer(const Matrix& x);

    [[nodiscard]] Matrix transform(const Matrix& x) const;
    void transform_row(std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
    [[nodiscard]] const Vector& scale() const noexcept { return scale_; }

  private:
    Vector mean_;
    Vector scale_;
};

enum class ModelKind { OLS, Ridge, Lasso, ElasticNet, PCR, PLS, Tree, Forest, GBRT, XGB, MLP };

[[nodiscard]] std::string_view to_string(ModelKind k);
/// Case-insensitive; accepts "enet"/"elasticnet"/"elastic_net". Throws ValidationError.
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

enum class MlpArchitecture { YieldOnly, YieldMacro, Hybrid, Double, GroupEnsemble };

[[nodiscard]] std::string_view to_string(MlpArchitecture a);
[[nodiscard]] MlpArchitecture parse_architecture(std::string_view name);

struct TreeParams {
    int max_depth = 3;
    int min_leaf = 1;
};

struct ForestParams {
    int trees = 100;
    double feature_frac = 1.0 / 3.0;  // features tried at each split
    bool bootstrap = true;
};

struct BoostParams {
    int stages = 100;
    double eta = 0.1;
    double reg_lambda = 1.0;  // XGB only
    double gamma = 0.0;       // XGB only
};

struct MlpParams {
    MlpArchitecture architecture = MlpArchitecture::YieldMacro;
    std::vector<int> hidden{32, 16, 8};  // plain, Hybrid and Double branches
    std::vector<int> group_hidden{4};    // GroupEnsemble subnets
    int combiner_nodes = 3;              // GroupEnsemble final hidden layer
    double l2 = 1e-3;
    int epochs = 300;
    double learning_rate = 1e-2;
    int batch_size = 0;  // 0 = full batch
};

struct ModelSpec {
    ModelKind kind = ModelKind::OLS;
    bool standardize = true;  // fit a Standardizer on the training rows
    bool intercept = true;
    // Penalized regression: Ridge lambda*|b|^2, Lasso lambda*|b|_1,
    // ElasticNet lambda*mu*|b|_1 + lambda*(1-mu)/2*|b|^2, on top of 0.5*RSS.
    double lambda = 1.0;
    double mu = 0.5;
    int max_sweeps = 10000;
    double cd_tolerance = 1e-9;
    int components = 3;           // PCR / PLS
    bool group_pc_macro = false;  // OLS: replace every macro group by its first principal component
    TreeParams tree{};
    ForestParams forest{};
    BoostParams boost{};
    MlpParams mlp{};
    std::uint64_t seed = 0;

    /// Throws ValidationError when a hyperparameter is out of range.
    void validate() const;
};

/// A trained model. Immutable and safe to share between threads.
class FittedModel {
  public:
    virtual ~FittedModel() = default;
    [[nodiscard]] virtual double predict(std::span<const double> row) const = 0;
    [[nodiscard]] virtual std::size_t features() const = 0;
    [[nodiscard]] Vector predict(const Matrix& x) const;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

/// Fits `spec` on `ds`, including standardization and any within-window PCA, so the
/// returned model takes raw feature rows.
[[nodiscard]] ModelPtr fit_model(const ModelSpec& spec, const Dataset& ds);

}  // namespace ufrkit
