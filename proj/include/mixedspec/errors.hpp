#pragma once

#include <stdexcept>
#include <string>

namespace mixedspec {

// Every numeric failure names the module and the pipeline stage it came from,
// so the CLI can report "reducibility/solve_h: ..." and map to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string stage, const std::string& what)
      : std::runtime_error(module + "/" + stage + ": " + what),
        module_(std::move(module)),
        stage_(std::move(stage)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string module_;
  std::string stage_;
};

class DomainError : public Error {
  using Error::Error;
};

class PreconditionError : public Error {
  using Error::Error;
};

class ResolutionError : public Error {
  using Error::Error;
};

class InsufficientDataError : public Error {
  using Error::Error;
};

class DegenerateError : public Error {
  using Error::Error;
};

class ConvergenceError : public Error {
  using Error::Error;
};

/// Work would exceed a configured precision or length budget.
class ResourceError : public Error {
  using Error::Error;
};

class SmallDivisorError : public Error {
 public:
  SmallDivisorError(std::string stage, long mode, std::string nearest_q,
                    double divisor)
      : Error("reducibility", std::move(stage),
              "small divisor |e^{2 pi i k w} - 1| = " + std::to_string(divisor) +
                  " at mode k = " + std::to_string(mode) +
                  " (nearest convergent denominator q = " + nearest_q + ")"),
        mode_(mode),
        nearest_q_(std::move(nearest_q)),
        divisor_(divisor) {}

  long mode() const noexcept { return mode_; }
  const std::string& nearest_q() const noexcept { return nearest_q_; }
  double divisor() const noexcept { return divisor_; }

 private:
  long mode_;
  std::string nearest_q_;
  double divisor_;
};

}  // namespace mixedspec
