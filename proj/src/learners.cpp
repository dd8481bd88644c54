#include "ufrkit/learners.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "ufrkit/error.hpp"
#include "ufrkit/linear_models.hpp"
#include "ufrkit/mlp.hpp"
#include "ufrkit/trees.hpp"

namespace ufrkit {

const std::vector<std::string>& macro_group_names() {
    static const std::vector<std::string> names{
        "Macro-prosperity", "Output",         "Consumption",     "Price Index",  "Interest Rates",
        "Money and Credit", "Investment",     "Real Estate",     "Tax",          "Trade",
        "Foreign Exchange Rate", "Stock Market", "Monetary Policy"};
    return names;
}

bool is_known_group(std::string_view name) {
    if (name == kYieldGroup) return true;
    const auto& m = macro_group_names();
    return std::find(m.begin(), m.end(), name) != m.end();
}

Dataset::Dataset(Matrix x_, Vector y_, std::vector<std::string> names_, std::vector<std::string> groups_)
    : x(std::move(x_)), y(std::move(y_)), names(std::move(names_)), groups(std::move(groups_)) {
    validate();
}

void Dataset::validate() const {
    if (x.rows() != y.size()) throw DomainError("Dataset: x has " + std::to_string(x.rows()) + " rows but y has " +
                                                std::to_string(y.size()) + " entries");
    if (!names.empty() && names.size() != cols()) throw DomainError("Dataset: name count does not match columns");
    if (!groups.empty() && groups.size() != cols()) throw DomainError("Dataset: group count does not match columns");
    if (!x.allFinite()) throw DomainError("Dataset: non-finite feature value");
    if (!y.allFinite()) throw DomainError("Dataset: non-finite target value");
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) throw DomainError("Dataset::slice: range out of bounds");
    const auto b = static_cast<Eigen::Index>(begin);
    const auto len = static_cast<Eigen::Index>(end - begin);
    Dataset out;
    out.x = x.middleRows(b, len);
    out.y = y.segment(b, len);
    out.names = names;
    out.groups = groups;
    return out;
}

Dataset Dataset::select(std::span<const std::size_t> columns) const {
    Dataset out;
    out.x.resize(x.rows(), static_cast<Eigen::Index>(columns.size()));
    out.y = y;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] >= cols()) throw DomainError("Dataset::select: column out of range");
        out.x.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(columns[c]));
        if (!names.empty()) out.names.push_back(names[columns[c]]);
        if (!groups.empty()) out.groups.push_back(groups[columns[c]]);
    }
    return out;
}

std::vector<std::size_t> Dataset::columns_in_group(std::string_view group) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < groups.size(); ++j)
        if (groups[j] == group) out.push_back(j);
    return out;
}

std::vector<std::size_t> Dataset::columns_not_in_group(std::string_view group) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < cols(); ++j)
        if (groups.empty() || groups[j] != group) out.push_back(j);
    return out;
}

std::vector<std::string> Dataset::group_order() const {
    std::vector<std::string> out;
    for (const auto& g : groups)
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    return out;
}

Standardizer::Standardizer(const Matrix& x) {
    const double n = static_cast<double>(x.rows());
    mean_ = x.rows() > 0 ? Vector(x.colwise().mean()) : Vector::Zero(x.cols());
    scale_.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double ss = (x.col(j).array() - mean_[j]).square().sum();
        const double sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        scale_[j] = sd > 0.0 ? sd : 1.0;
    }
}

Matrix Standardizer::transform(const Matrix& x) const {
    if (x.cols() != mean_.size()) throw DomainError("Standardizer: column count mismatch");
    return (x.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
    const auto p = static_cast<std::size_t>(mean_.size());
    if (in.size() != p || out.size() != p) throw DomainError("Standardizer: row length mismatch");
    for (std::size_t j = 0; j < p; ++j) {
        const auto e = static_cast<Eigen::Index>(j);
        out[j] = (in[j] - mean_[e]) / scale_[e];
    }
}

namespace {

std::string normalize_name(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != '_' && c != '-' && c != ' ') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::OLS: return "OLS";
        case ModelKind::Ridge: return "Ridge";
        case ModelKind::Lasso: return "Lasso";
        case ModelKind::ElasticNet: return "ElasticNet";
        case ModelKind::PCR: return "PCR";
        case ModelKind::PLS: return "PLS";
        case ModelKind::Tree: return "Tree";
        case ModelKind::Forest: return "Forest";
        case ModelKind::GBRT: return "GBRT";
        case ModelKind::XGB: return "XGB";
        case ModelKind::MLP: return "MLP";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    const auto n = normalize_name(name);
    if (n == "ols") return ModelKind::OLS;
    if (n == "ridge") return ModelKind::Ridge;
    if (n == "lasso") return ModelKind::Lasso;
    if (n == "enet" || n == "elasticnet") return ModelKind::ElasticNet;
    if (n == "pcr") return ModelKind::PCR;
    if (n == "pls") return ModelKind::PLS;
    if (n == "tree" || n == "cart") return ModelKind::Tree;
    if (n == "forest" || n == "rf" || n == "randomforest") return ModelKind::Forest;
    if (n == "gbrt") return ModelKind::GBRT;
    if (n == "xgb" || n == "xgboost") return ModelKind::XGB;
    if (n == "mlp" || n == "nn") return ModelKind::MLP;
    throw ValidationError("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(MlpArchitecture a) {
    switch (a) {
        case MlpArchitecture::YieldOnly: return "YieldOnly";
        case MlpArchitecture::YieldMacro: return "YieldMacro";
        case MlpArchitecture::Hybrid: return "Hybrid";
        case MlpArchitecture::Double: return "Double";
        case MlpArchitecture::GroupEnsemble: return "GroupEnsemble";
    }
    return "?";
}

MlpArchitecture parse_architecture(std::string_view name) {
    const auto n = normalize_name(name);
    if (n == "yieldonly") return MlpArchitecture::YieldOnly;
    if (n == "yieldmacro") return MlpArchitecture::YieldMacro;
    if (n == "hybrid") return MlpArchitecture::Hybrid;
    if (n == "double") return MlpArchitecture::Double;
    if (n == "groupensemble" || n == "group") return MlpArchitecture::GroupEnsemble;
    throw ValidationError("unknown MLP architecture '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("model: " + m); };
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be a finite nonnegative number");
    if (!(mu >= 0.0 && mu <= 1.0)) fail("mu must lie in [0, 1]");
    if (max_sweeps < 1) fail("max_sweeps must be positive");
    if (!(cd_tolerance > 0.0)) fail("cd_tolerance must be positive");
    if (components < 1) fail("components must be at least 1");
    if (tree.max_depth < 0) fail("max_depth must be nonnegative");
    if (tree.min_leaf < 1) fail("min_leaf must be at least 1");
    if (forest.trees < 1) fail("forest trees must be at least 1");
    if (!(forest.feature_frac > 0.0 && forest.feature_frac <= 1.0)) fail("feature_frac must lie in (0, 1]");
    if (boost.stages < 0) fail("boosting stages must be nonnegative");
    if (!(boost.eta > 0.0 && boost.eta <= 1.0)) fail("eta must lie in (0, 1]");
    if (!(boost.reg_lambda >= 0.0)) fail("reg_lambda must be nonnegative");
    if (!(boost.gamma >= 0.0)) fail("gamma must be nonnegative");
    if (mlp.epochs < 0) fail("epochs must be nonnegative");
    if (!(mlp.learning_rate > 0.0)) fail("learning_rate must be positive");
    if (!(mlp.l2 >= 0.0)) fail("l2 must be nonnegative");
    if (mlp.batch_size < 0) fail("batch_size must be nonnegative");
    if (mlp.combiner_nodes < 1) fail("combiner_nodes must be positive");
    if (std::any_of(mlp.hidden.begin(), mlp.hidden.end(), [](int h) { return h < 1; }))
        fail("hidden layer sizes must be positive");
    if (std::any_of(mlp.group_hidden.begin(), mlp.group_hidden.end(), [](int h) { return h < 1; }))
        fail("group hidden layer sizes must be positive");
}

Vector FittedModel::predict(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != features()) throw DomainError("predict: feature count mismatch");
    Vector out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        out[i] = predict(std::span<const double>(row));
    }
    return out;
}

namespace {

/// Raw row -> optional standardization -> optional group compression -> inner model.
class PipelineModel : public FittedModel {
  public:
    PipelineModel(std::size_t features, std::optional<Standardizer> scaler, std::optional<GroupComponents> groups,
                  std::vector<std::size_t> passthrough, ModelPtr inner)
        : features_(features),
          scaler_(std::move(scaler)),
          groups_(std::move(groups)),
          passthrough_(std::move(passthrough)),
          inner_(std::move(inner)) {}

    double predict(std::span<const double> row) const override {
        if (row.size() != features_) throw DomainError("predict: feature count mismatch");
        std::vector<double> z(row.begin(), row.end());
        if (scaler_) scaler_->transform_row(row, z);
        if (!groups_) return inner_->predict(std::span<const double>(z));
        std::vector<double> reduced(passthrough_.size() + groups_->names().size());
        for (std::size_t c = 0; c < passthrough_.size(); ++c) reduced[c] = z[passthrough_[c]];
        groups_->transform_row(z, std::span<double>(reduced).subspan(passthrough_.size()));
        return inner_->predict(std::span<const double>(reduced));
    }
    std::size_t features() const override { return features_; }
    using FittedModel::predict;

  private:
    std::size_t features_;
    std::optional<Standardizer> scaler_;
    std::optional<GroupComponents> groups_;
    std::vector<std::size_t> passthrough_;
    ModelPtr inner_;
};

ModelPtr fit_inner(const ModelSpec& spec, const Dataset& ds) {
    switch (spec.kind) {
        case ModelKind::OLS: return std::make_shared<LinearModel>(fit_ols(ds, spec.intercept));
        case ModelKind::Ridge:
        case ModelKind::Lasso:
        case ModelKind::ElasticNet: {
            Penalty p;
            p.kind = spec.kind == ModelKind::Ridge   ? PenaltyKind::Ridge
                     : spec.kind == ModelKind::Lasso ? PenaltyKind::Lasso
                                                     : PenaltyKind::ElasticNet;
            p.lambda = spec.lambda;
            p.mu = spec.mu;
            p.max_sweeps = spec.max_sweeps;
            p.tolerance = spec.cd_tolerance;
            return std::make_shared<LinearModel>(fit_penalized(ds, p, spec.intercept));
        }
        case ModelKind::PCR: return std::make_shared<LinearModel>(fit_pcr(ds, spec.components));
        case ModelKind::PLS: return std::make_shared<LinearModel>(fit_pls(ds, spec.components));
        case ModelKind::Tree: return std::make_shared<RegressionTree>(fit_tree(ds, spec.tree));
        case ModelKind::Forest:
            return std::make_shared<ForestModel>(fit_forest(ds, spec.tree, spec.forest, spec.seed, Exec::Serial));
        case ModelKind::GBRT: return std::make_shared<BoostedModel>(fit_gbrt(ds, spec.tree, spec.boost));
        case ModelKind::XGB: return std::make_shared<BoostedModel>(fit_xgb(ds, spec.tree, spec.boost));
        case ModelKind::MLP: return std::make_shared<MlpModel>(fit_mlp(ds, spec.mlp, spec.seed));
    }
    throw ValidationError("unknown model kind");
}

}  // namespace

ModelPtr fit_model(const ModelSpec& spec, const Dataset& ds) {
    spec.validate();
    ds.validate();
    if (ds.rows() == 0) throw DomainError("fit_model: empty dataset");

    std::optional<Standardizer> scaler;
    Dataset work = ds;
    if (spec.standardize) {
        scaler.emplace(ds.x);
        work.x = scaler->transform(ds.x);
    }

    std::optional<GroupComponents> groups;
    std::vector<std::size_t> passthrough;
    if (spec.group_pc_macro) {
        if (ds.groups.empty()) throw ValidationError("fit_model: group_pc_macro requires feature group labels");
        std::vector<std::string> macro;
        for (const auto& g : ds.group_order())
            if (g != kYieldGroup) macro.push_back(g);
        if (!macro.empty()) {
            passthrough = ds.columns_in_group(kYieldGroup);
            groups.emplace(work.x, std::span<const std::string>(ds.groups), macro);
            Dataset reduced;
            reduced.x.resize(work.x.rows(), static_cast<Eigen::Index>(passthrough.size() + macro.size()));
            for (std::size_t c = 0; c < passthrough.size(); ++c) {
                reduced.x.col(static_cast<Eigen::Index>(c)) = work.x.col(static_cast<Eigen::Index>(passthrough[c]));
                reduced.names.push_back(ds.names.empty() ? "x" + std::to_string(passthrough[c]) : ds.names[passthrough[c]]);
                reduced.groups.emplace_back(kYieldGroup);
            }
            reduced.x.rightCols(static_cast<Eigen::Index>(macro.size())) = groups->scores();
            for (const auto& g : macro) {
                reduced.names.push_back(g + " PC1");
                reduced.groups.push_back(g);
            }
            reduced.y = work.y;
            work = std::move(reduced);
        }
    }

    auto inner = fit_inner(spec, work);
    if (!scaler && !groups) return inner;
    return std::make_shared<PipelineModel>(ds.cols(), std::move(scaler), std::move(groups), std::move(passthrough),
                                           std::move(inner));
}

}  // namespace ufrkit
