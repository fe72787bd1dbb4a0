#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pickroute {

/// A caller broke a documented precondition (bad shapes, duplicate items,
/// malformed action sequences). The CLI maps these to exit code 2.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A value lies outside the modelled domain (location outside the
/// warehouse, infeasible pick-list size, unknown file version).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An action pair was applied in a state where it is masked.
class InvalidActionError : public ContractViolation {
 public:
  InvalidActionError(const std::string& what, std::size_t step_index);

  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

/// Raised by the solvers and the evaluation harness when a result breaks an
/// optimality contract; always indicates a bug.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pickroute
