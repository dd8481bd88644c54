#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ufrkit {

/// Base of every error the library throws. `kind()` is a stable, machine-readable
/// tag used by the CLI when it serializes failures.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};

/// Linear system for a Smith-Wilson fit (or a regression) is singular or too ill-conditioned.
class FitError : public Error {
  public:
    explicit FitError(const std::string& m) : Error("fit", m) {}
};

class ExtractionError : public Error {
  public:
    explicit ExtractionError(const std::string& m) : Error("extraction", m) {}
};

class CalibrationError : public Error {
  public:
    explicit CalibrationError(const std::string& m) : Error("calibration", m) {}
};

class ConvergenceError : public Error {
  public:
    explicit ConvergenceError(const std::string& m) : Error("convergence", m) {}
};

class ProjectionError : public Error {
  public:
    explicit ProjectionError(const std::string& m) : Error("projection", m) {}
};

/// A rolling-window fit failed; carries the window index and the underlying error kind.
class ForecastError : public Error {
  public:
    ForecastError(std::size_t window, const std::string& cause_kind, const std::string& m)
        : Error("forecast", m), window_(window), cause_(cause_kind) {}

    [[nodiscard]] std::size_t window() const noexcept { return window_; }
    [[nodiscard]] const std::string& cause_kind() const noexcept { return cause_; }

  private:
    std::size_t window_;
    std::string cause_;
};

/// Input files. `kind` distinguishes header / parse / duplicate_date / mapping / alignment.
class DataError : public Error {
  public:
    DataError(std::string kind, const std::string& m) : Error("data." + std::move(kind), m) {}
};

/// Invalid configuration or CLI usage. The CLI maps this to exit code 2.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

}  // namespace ufrkit
