#pragma once

#include <stdexcept>
#include <string>

namespace chainres {

// Bad user input: malformed config, out-of-range arguments, violated preconditions.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure could not certify its result (winding did not
// settle, eigensolver failed, internal cross-check disagreed).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace chainres
