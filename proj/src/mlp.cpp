#include "ufrkit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ufrkit/error.hpp"
#include "ufrkit/random.hpp"

namespace ufrkit {

MlpNetwork::MlpNetwork(std::vector<Branch> branches, std::vector<Layer> combiner, std::size_t inputs)
    : branches_(std::move(branches)), combiner_(std::move(combiner)), inputs_(inputs) {
    if (branches_.empty()) throw DomainError("MlpNetwork: at least one branch required");
    if (combiner_.empty() || combiner_.back().w.rows() != 1 || combiner_.back().relu)
        throw DomainError("MlpNetwork: combiner must end in a single linear output");
    for (const auto& br : branches_)
        for (auto c : br.columns)
            if (c >= inputs_) throw DomainError("MlpNetwork: branch column out of range");
}

namespace {

MlpNetwork::Layer make_layer(std::size_t in, std::size_t out, bool relu, SplitMix64& rng) {
    const double limit = relu ? std::sqrt(6.0 / static_cast<double>(in))
                              : std::sqrt(6.0 / static_cast<double>(in + out));
    MlpNetwork::Layer l{Matrix(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
                        Vector::Zero(static_cast<Eigen::Index>(out)), relu};
    // Column-major fill order is part of the seeded contract.
    for (Eigen::Index j = 0; j < l.w.cols(); ++j)
        for (Eigen::Index i = 0; i < l.w.rows(); ++i) l.w(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    return l;
}

MlpNetwork::Branch make_branch(std::vector<std::size_t> columns, const std::vector<int>& hidden, SplitMix64& rng,
                               std::size_t& width) {
    MlpNetwork::Branch b{std::move(columns), {}};
    std::size_t in = b.columns.size();
    for (int h : hidden) {
        b.layers.push_back(make_layer(in, static_cast<std::size_t>(h), true, rng));
        in = static_cast<std::size_t>(h);
    }
    width = in;
    return b;
}

std::vector<std::size_t> columns_where(std::span<const std::string> groups, auto pred) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < groups.size(); ++j)
        if (pred(groups[j])) out.push_back(j);
    return out;
}

}  // namespace

MlpNetwork MlpNetwork::build(const MlpParams& params, std::span<const std::string> groups, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, "mlp.init"));
    for (int h : params.hidden)
        if (h < 1) throw ValidationError("mlp: hidden layer sizes must be positive");
    for (int h : params.group_hidden)
        if (h < 1) throw ValidationError("mlp: group hidden layer sizes must be positive");
    const std::size_t inputs = groups.size();
    auto yields = columns_where(groups, [](const std::string& g) { return g == kYieldGroup; });
    auto macro = columns_where(groups, [](const std::string& g) { return g != kYieldGroup; });
    std::vector<std::size_t> all(inputs);
    std::iota(all.begin(), all.end(), std::size_t{0});

    std::vector<Branch> branches;
    std::size_t width = 0;
    std::size_t w = 0;
    std::vector<Layer> combiner;
    const auto arch = params.architecture;
    const auto need = [&](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("mlp ") + std::string(to_string(arch)) + ": " + what);
    };
    switch (arch) {
        case MlpArchitecture::YieldOnly:
            need(!yields.empty(), "no columns in the yields group");
            branches.push_back(make_branch(yields, params.hidden, rng, w));
            width = w;
            break;
        case MlpArchitecture::YieldMacro:
            need(inputs > 0, "no input columns");
            branches.push_back(make_branch(all, params.hidden, rng, w));
            width = w;
            break;
        case MlpArchitecture::Hybrid:
            need(!yields.empty() && !macro.empty(), "needs both yield and macro columns");
            branches.push_back(make_branch(yields, {}, rng, w));
            width = w;
            branches.push_back(make_branch(macro, params.hidden, rng, w));
            width += w;
            break;
        case MlpArchitecture::Double:
            need(!yields.empty() && !macro.empty(), "needs both yield and macro columns");
            branches.push_back(make_branch(yields, params.hidden, rng, w));
            width = w;
            branches.push_back(make_branch(macro, params.hidden, rng, w));
            width += w;
            break;
        case MlpArchitecture::GroupEnsemble: {
            need(!groups.empty(), "needs group labels");
            need(params.combiner_nodes >= 1, "combiner_nodes must be positive");
            std::vector<std::string> order;
            for (const auto& g : groups)
                if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
            for (const auto& name : order) {
                branches.push_back(make_branch(columns_where(groups, [&](const std::string& g) { return g == name; }),
                                               params.group_hidden, rng, w));
                width += w;
            }
            combiner.push_back(make_layer(width, static_cast<std::size_t>(params.combiner_nodes), true, rng));
            width = static_cast<std::size_t>(params.combiner_nodes);
            break;
        }
    }
    combiner.push_back(make_layer(width, 1, false, rng));
    return MlpNetwork(std::move(branches), std::move(combiner), inputs);
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& br : branches_)
        for (const auto& l : br.layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    for (const auto& l : combiner_) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
}

Vector MlpNetwork::parameters() const {
    Vector theta(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    auto put = [&](const Layer& l) {
        theta.segment(k, l.w.size()) = Eigen::Map<const Vector>(l.w.data(), l.w.size());
        k += l.w.size();
        theta.segment(k, l.b.size()) = l.b;
        k += l.b.size();
    };
    for (const auto& br : branches_)
        for (const auto& l : br.layers) put(l);
    for (const auto& l : combiner_) put(l);
    return theta;
}

void MlpNetwork::set_parameters(const Vector& theta) {
    if (static_cast<std::size_t>(theta.size()) != parameter_count()) throw DomainError("MlpNetwork: parameter size");
    Eigen::Index k = 0;
    auto get = [&](Layer& l) {
        Eigen::Map<Vector>(l.w.data(), l.w.size()) = theta.segment(k, l.w.size());
        k += l.w.size();
        l.b = theta.segment(k, l.b.size());
        k += l.b.size();
    };
    for (auto& br : branches_)
        for (auto& l : br.layers) get(l);
    for (auto& l : combiner_) get(l);
}

namespace {

struct LayerCache {
    Matrix input;  // m x in
    Matrix z;      // m x out, pre-activation
};

Matrix apply(const MlpNetwork::Layer& l, const Matrix& a, LayerCache* cache) {
    Matrix z = a * l.w.transpose();
    z.rowwise() += l.b.transpose();
    if (cache) {
        cache->input = a;
        cache->z = z;
    }
    if (l.relu) return z.cwiseMax(0.0);
    return z;
}

struct ForwardCache {
    std::vector<std::vector<LayerCache>> branches;
    std::vector<LayerCache> combiner;
    std::vector<Eigen::Index> widths;
};

Matrix run(const std::vector<MlpNetwork::Branch>& branches, const std::vector<MlpNetwork::Layer>& combiner,
           const Matrix& x, ForwardCache* cache) {
    const auto m = x.rows();
    std::vector<Matrix> outs;
    outs.reserve(branches.size());
    Eigen::Index width = 0;
    if (cache) {
        cache->branches.assign(branches.size(), {});
        cache->widths.clear();
    }
    for (std::size_t b = 0; b < branches.size(); ++b) {
        const auto& br = branches[b];
        Matrix a(m, static_cast<Eigen::Index>(br.columns.size()));
        for (std::size_t c = 0; c < br.columns.size(); ++c)
            a.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(br.columns[c]));
        if (cache) cache->branches[b].resize(br.layers.size());
        for (std::size_t k = 0; k < br.layers.size(); ++k) a = apply(br.layers[k], a, cache ? &cache->branches[b][k] : nullptr);
        width += a.cols();
        if (cache) cache->widths.push_back(a.cols());
        outs.push_back(std::move(a));
    }
    Matrix h(m, width);
    Eigen::Index off = 0;
    for (auto& o : outs) {
        h.middleCols(off, o.cols()) = o;
        off += o.cols();
    }
    if (cache) cache->combiner.resize(combiner.size());
    for (std::size_t k = 0; k < combiner.size(); ++k) h = apply(combiner[k], h, cache ? &cache->combiner[k] : nullptr);
    return h;
}

double weight_penalty(const std::vector<MlpNetwork::Branch>& branches, const std::vector<MlpNetwork::Layer>& combiner) {
    double s = 0.0;
    for (const auto& br : branches)
        for (const auto& l : br.layers) s += l.w.squaredNorm();
    for (const auto& l : combiner) s += l.w.squaredNorm();
    return s;
}

}  // namespace

Vector MlpNetwork::forward(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != inputs_) throw DomainError("MlpNetwork: input width mismatch");
    return run(branches_, combiner_, x, nullptr).col(0);
}

double MlpNetwork::forward_row(std::span<const double> row) const {
    if (row.size() != inputs_) throw DomainError("MlpNetwork: input width mismatch");
    const Matrix x = Eigen::Map<const Eigen::RowVectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
    return run(branches_, combiner_, x, nullptr)(0, 0);
}

double MlpNetwork::loss(const Matrix& x, const Vector& y, double l2) const {
    const Vector out = forward(x);
    return 0.5 * (out - y).squaredNorm() / static_cast<double>(x.rows()) +
           0.5 * l2 * weight_penalty(branches_, combiner_);
}

Vector MlpNetwork::gradient(const Matrix& x, const Vector& y, double l2) const {
    if (static_cast<std::size_t>(x.cols()) != inputs_) throw DomainError("MlpNetwork: input width mismatch");
    ForwardCache cache;
    const Matrix out = run(branches_, combiner_, x, &cache);
    const double m = static_cast<double>(x.rows());

    struct LayerGrad {
        Matrix w;
        Vector b;
    };
    std::vector<std::vector<LayerGrad>> gb(branches_.size());
    std::vector<LayerGrad> gc(combiner_.size());

    auto back = [&](const Layer& l, const LayerCache& c, Matrix da, LayerGrad& g) {
        if (l.relu) da = da.cwiseProduct((c.z.array() > 0.0).cast<double>().matrix());
        g.w = da.transpose() * c.input + l2 * l.w;
        g.b = da.colwise().sum().transpose();
        return Matrix(da * l.w);
    };

    Matrix da = (out.col(0) - y) / m;
    for (std::size_t k = combiner_.size(); k-- > 0;) da = back(combiner_[k], cache.combiner[k], std::move(da), gc[k]);
    Eigen::Index off = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        Matrix d = da.middleCols(off, cache.widths[b]);
        off += cache.widths[b];
        const auto& layers = branches_[b].layers;
        gb[b].resize(layers.size());
        for (std::size_t k = layers.size(); k-- > 0;) d = back(layers[k], cache.branches[b][k], std::move(d), gb[b][k]);
    }

    Vector g(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    auto put = [&](const LayerGrad& lg) {
        g.segment(k, lg.w.size()) = Eigen::Map<const Vector>(lg.w.data(), lg.w.size());
        k += lg.w.size();
        g.segment(k, lg.b.size()) = lg.b;
        k += lg.b.size();
    };
    for (const auto& br : gb)
        for (const auto& lg : br) put(lg);
    for (const auto& lg : gc) put(lg);
    return g;
}

double MlpModel::predict(std::span<const double> row) const {
    return y_mean_ + y_scale_ * net_.forward_row(row);
}

MlpModel fit_mlp(const Dataset& ds, const MlpParams& params, std::uint64_t seed) {
    ds.validate();
    if (ds.rows() < 2) throw DomainError("fit_mlp: at least two rows required");
    if (params.epochs < 0) throw ValidationError("fit_mlp: epochs must be nonnegative");
    if (!(params.learning_rate > 0.0)) throw ValidationError("fit_mlp: learning_rate must be positive");
    if (!(params.l2 >= 0.0)) throw ValidationError("fit_mlp: l2 must be nonnegative");
    if (params.batch_size < 0) throw ValidationError("fit_mlp: batch_size must be nonnegative");
    std::vector<std::string> groups = ds.groups;
    if (groups.empty()) {
        if (params.architecture != MlpArchitecture::YieldMacro)
            throw ValidationError("fit_mlp: architecture " + std::string(to_string(params.architecture)) +
                                  " requires feature group labels");
        groups.assign(ds.cols(), "features");
    }
    auto net = MlpNetwork::build(params, groups, seed);

    const double y_mean = ds.y.mean();
    const double sd = std::sqrt((ds.y.array() - y_mean).square().sum() / static_cast<double>(ds.rows() - 1));
    const double y_scale = sd > 0.0 ? sd : 1.0;
    const Vector z = (ds.y.array() - y_mean) / y_scale;

    const auto n = ds.rows();
    const std::size_t batch = params.batch_size == 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(params.batch_size));
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(params.epochs) + 1);
    history.push_back(net.loss(ds.x, z, params.l2));
    Vector theta = net.parameters();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix xb;
    Vector yb;
    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
        if (batch == n) {
            theta -= params.learning_rate * net.gradient(ds.x, z, params.l2);
            net.set_parameters(theta);
        } else {
            SplitMix64 rng(derive_seed(seed, "mlp.shuffle", static_cast<std::uint64_t>(epoch)));
            seeded_shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t len = std::min(batch, n - start);
                xb.resize(static_cast<Eigen::Index>(len), ds.x.cols());
                yb.resize(static_cast<Eigen::Index>(len));
                for (std::size_t i = 0; i < len; ++i) {
                    xb.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(order[start + i]));
                    yb[static_cast<Eigen::Index>(i)] = z[static_cast<Eigen::Index>(order[start + i])];
                }
                theta -= params.learning_rate * net.gradient(xb, yb, params.l2);
                net.set_parameters(theta);
            }
        }
        const double loss = net.loss(ds.x, z, params.l2);
        if (!std::isfinite(loss)) {
            std::ostringstream os;
            os << "fit_mlp: loss became non-finite at epoch " << epoch << " (learning_rate " << params.learning_rate
               << ", previous loss " << history.back() << ", " << net.parameter_count() << " parameters)";
            throw ConvergenceError(os.str());
        }
        history.push_back(loss);
    }
    return MlpModel(std::move(net), y_mean, y_scale, std::move(history));
}

}  // namespace ufrkit
