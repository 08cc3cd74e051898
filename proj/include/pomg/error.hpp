#pragma once

#include <stdexcept>
#include <string>

namespace pomg {

/// Raised when an operation's precondition is violated or a computation
/// cannot complete (budget exceeded, infeasible LP, empty confidence set).
class Fault : public std::runtime_error {
public:
    explicit Fault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pomg
