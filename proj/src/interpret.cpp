#include "ufrkit/interpret.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "ufrkit/error.hpp"
#include "ufrkit/random.hpp"

namespace ufrkit {

namespace {

Attribution exact_shapley(const FittedModel& model, const Matrix& bg, std::span<const double> x) {
    const std::size_t d = x.size();
    const auto nb = static_cast<std::size_t>(bg.rows());
    const std::size_t masks = std::size_t{1} << d;
    std::vector<double> v(masks, 0.0);
    std::vector<double> z(d);
    for (std::size_t s = 0; s + 1 < masks; ++s) {
        double sum = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            for (std::size_t j = 0; j < d; ++j)
                z[j] = (s >> j) & 1U ? x[j] : bg(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
            sum += model.predict(std::span<const double>(z));
        }
        v[s] = sum / static_cast<double>(nb);
    }
    Attribution a;
    a.exact = true;
    a.prediction = model.predict(x);
    a.baseline = v[0];
    v[masks - 1] = a.prediction;

    // weight(s) = s! (d - s - 1)! / d!
    std::vector<double> weight(d);
    for (std::size_t s = 0; s < d; ++s)
        weight[s] = std::exp(std::lgamma(static_cast<double>(s + 1)) + std::lgamma(static_cast<double>(d - s)) -
                             std::lgamma(static_cast<double>(d + 1)));
    a.values.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        double phi = 0.0;
        for (std::size_t s = 0; s < masks; ++s) {
            if (s & bit) continue;
            phi += weight[static_cast<std::size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
        }
        a.values[i] = phi;
    }
    return a;
}

Attribution permutation_shapley(const FittedModel& model, const Matrix& bg, std::span<const double> x,
                                const ShapleyOptions& options) {
    const std::size_t d = x.size();
    const auto nb = static_cast<std::uint64_t>(bg.rows());
    SplitMix64 rng(options.seed);
    std::vector<std::size_t> order(d);
    std::vector<double> z(d);
    Attribution a;
    a.values.assign(d, 0.0);
    a.prediction = model.predict(x);
    std::vector<double> base_draws;
    base_draws.reserve(static_cast<std::size_t>(options.permutations));
    for (int p = 0; p < options.permutations; ++p) {
        const auto r = static_cast<Eigen::Index>(rng.below(nb));
        std::iota(order.begin(), order.end(), std::size_t{0});
        seeded_shuffle(order.begin(), order.end(), rng);
        for (std::size_t j = 0; j < d; ++j) z[j] = bg(r, static_cast<Eigen::Index>(j));
        double prev = model.predict(std::span<const double>(z));
        base_draws.push_back(prev);
        for (auto j : order) {
            z[j] = x[j];
            const double cur = model.predict(std::span<const double>(z));
            a.values[j] += cur - prev;
            prev = cur;
        }
    }
    const double n = static_cast<double>(options.permutations);
    for (auto& v : a.values) v /= n;

    double base = 0.0;
    std::vector<double> row(d);
    for (Eigen::Index b = 0; b < bg.rows(); ++b) {
        for (std::size_t j = 0; j < d; ++j) row[j] = bg(b, static_cast<Eigen::Index>(j));
        base += model.predict(std::span<const double>(row));
    }
    a.baseline = base / static_cast<double>(bg.rows());
    if (options.permutations > 1) {
        const double mean = std::accumulate(base_draws.begin(), base_draws.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : base_draws) ss += (v - mean) * (v - mean);
        a.efficiency_se = std::sqrt(ss / (n - 1.0) / n);
    }
    return a;
}

}  // namespace

Attribution sampled_shapley(const FittedModel& model, const Matrix& background, std::span<const double> x,
                            const ShapleyOptions& options) {
    if (options.permutations < 1) throw ValidationError("shapley: permutations must be at least 1");
    if (background.rows() == 0) throw DomainError("shapley: background set is empty");
    if (x.size() != model.features() || static_cast<std::size_t>(background.cols()) != x.size())
        throw DomainError("shapley: feature count mismatch between model, background and instance");
    if (x.empty()) throw DomainError("shapley: no features");
    if (x.size() <= std::min<std::size_t>(options.exact_max_features, 20)) return exact_shapley(model, background, x);
    return permutation_shapley(model, background, x, options);
}

std::vector<Attribution> explain_rows(const FittedModel& model, const Matrix& background, const Matrix& rows,
                                      const ShapleyOptions& options, Exec exec) {
    std::vector<Attribution> out(static_cast<std::size_t>(rows.rows()));
    for_each_index(out.size(), exec, [&](std::size_t i) {
        ShapleyOptions o = options;
        o.seed = derive_seed(options.seed, "shapley.instance", i);
        std::vector<double> x(static_cast<std::size_t>(rows.cols()));
        for (Eigen::Index j = 0; j < rows.cols(); ++j) x[static_cast<std::size_t>(j)] = rows(static_cast<Eigen::Index>(i), j);
        out[i] = sampled_shapley(model, background, x, o);
    });
    return out;
}

std::string_view to_string(AggregateMode m) { return m == AggregateMode::Abs ? "abs" : "signed"; }

std::vector<GroupScore> group_aggregate(std::span<const Attribution> attrs, std::span<const std::string> groups,
                                        AggregateMode mode) {
    if (attrs.empty()) throw DomainError("group_aggregate: no attributions");
    std::vector<std::string> order;
    for (const auto& g : groups) {
        if (g.empty()) throw DomainError("group_aggregate: feature with an empty group label");
        if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < order.size(); ++k) index[order[k]] = k;
    std::vector<double> total(order.size(), 0.0);
    for (const auto& a : attrs) {
        if (a.values.size() != groups.size()) {
            throw DomainError("group_aggregate: " + std::to_string(a.values.size()) + " features but " +
                              std::to_string(groups.size()) + " group labels");
        }
        std::vector<double> per(order.size(), 0.0);
        for (std::size_t j = 0; j < groups.size(); ++j)
            per[index[groups[j]]] += mode == AggregateMode::Abs ? std::abs(a.values[j]) : a.values[j];
        for (std::size_t k = 0; k < per.size(); ++k) total[k] += per[k];
    }
    std::vector<GroupScore> out;
    for (std::size_t k = 0; k < order.size(); ++k)
        out.push_back({order[k], total[k], total[k] / static_cast<double>(attrs.size())});
    std::stable_sort(out.begin(), out.end(), [](const GroupScore& a, const GroupScore& b) { return a.mean > b.mean; });
    return out;
}

}  // namespace ufrkit
