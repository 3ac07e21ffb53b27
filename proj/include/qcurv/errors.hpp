#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcurv {

// Argument outside the mathematical domain of an operation (k < 1, a = b = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Grid or solver configuration that cannot deliver the requested accuracy.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller misuse: mismatched dimensions, windows outside a grid, bad flags.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation's documented precondition does not hold for its input.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A diagnostic could not be evaluated reliably (unsettled tail, short sweep).
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite value met while sampling; carries the offending node.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

// Raised by the normalisation when the volume integral leaves double range.
// Solvers catch it and report a blow-up instead of failing.
class BlowupSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcurv
