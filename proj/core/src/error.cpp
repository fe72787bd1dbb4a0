#include "pickroute/error.hpp"

namespace pickroute {

InvalidActionError::InvalidActionError(const std::string& what,
                                       std::size_t step_index)
    : ContractViolation(what + " (step " + std::to_string(step_index) + ")"),
      step_index_(step_index) {}

}  // namespace pickroute
