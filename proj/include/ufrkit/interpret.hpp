#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ufrkit/learners.hpp"
#include "ufrkit/parallel.hpp"

namespace ufrkit {

/// Shapley decomposition of one prediction against a background distribution:
/// values sum to prediction - baseline (exactly in enumeration mode).
struct Attribution {
    std::vector<double> values;
    double baseline = 0.0;    // mean prediction over the background rows
    double prediction = 0.0;
    bool exact = false;
    /// Sampling mode: standard error of sum(values) across permutations.
    double efficiency_se = 0.0;
};

struct ShapleyOptions {
    int permutations = 256;
    std::uint64_t seed = 0;
    /// Exact coalition enumeration replaces sampling up to this many features.
    std::size_t exact_max_features = 12;
};

/// Interventional Shapley values: features outside a coalition take background values.
/// Enumerates every coalition for small feature counts (value of a coalition = mean over
/// all background rows); otherwise a Monte-Carlo permutation estimator that draws one
/// background row per permutation from a seeded stream.
[[nodiscard]] Attribution sampled_shapley(const FittedModel& model, const Matrix& background,
                                          std::span<const double> x, const ShapleyOptions& options = {});

/// Attributions for every row of `rows`; instance i uses the seed derived from
/// (options.seed, i), so the parallel path matches the serial one.
[[nodiscard]] std::vector<Attribution> explain_rows(const FittedModel& model, const Matrix& background,
                                                    const Matrix& rows, const ShapleyOptions& options = {},
                                                    Exec exec = Exec::Serial);

enum class AggregateMode { Abs, Signed };

[[nodiscard]] std::string_view to_string(AggregateMode m);

struct GroupScore {
    std::string group;
    double total = 0.0;  // summed over instances
    double mean = 0.0;   // total / instances
};

/// Per instance, sums |value| (Abs) or value (Signed) over each group's features, then
/// totals and averages over instances. Sorted by mean, descending. Throws DomainError
/// when `groups` does not label every feature.
[[nodiscard]] std::vector<GroupScore> group_aggregate(std::span<const Attribution> attrs,
                                                      std::span<const std::string> groups, AggregateMode mode);

}  // namespace ufrkit
