#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace ufrkit {

/// Execution policy for the data-parallel kernels. `Serial` is the reference
/// path; `Parallel` must produce bit-identical results.
enum class Exec { Serial, Parallel };

/// Runs body(i) for i in [0, n). Each index writes only its own output slot, so
/// the parallel schedule cannot change results. If several iterations throw, the
/// exception from the lowest index is rethrown, matching the serial path.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
    if (exec == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ufrkit
