#pragma once

#include <string>

#include "ufrkit/error.hpp"
#include "ufrkit/types.hpp"

namespace ufrkit {

/// Pivoted LU with a reciprocal-condition guard. Construction throws FitError
/// when rcond < 1 / kMaxConditionNumber.
class GuardedLu {
  public:
    GuardedLu(const Matrix& a, const std::string& what);

    [[nodiscard]] Vector solve(const Vector& b) const { return lu_.solve(b); }
    [[nodiscard]] Matrix inverse() const { return lu_.inverse(); }
    [[nodiscard]] double rcond() const noexcept { return rcond_; }

  private:
    Eigen::PartialPivLU<Matrix> lu_;
    double rcond_ = 0.0;
};

}  // namespace ufrkit
