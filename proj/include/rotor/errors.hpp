#pragma once

#include <stdexcept>
#include <string>

namespace rotor {

// Bad argument or configuration value. The CLI maps this to exit code 2.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A runtime numeric guard tripped (norm drift, truncation, non-finite
// input). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Momentum-grid truncation violated: probability reached the edge band.
class TruncationError : public NumericError {
public:
    explicit TruncationError(const std::string& what) : NumericError(what) {}
};

// Propagation stopped being unitary beyond tolerance.
class NormDriftError : public NumericError {
public:
    explicit NormDriftError(const std::string& what) : NumericError(what) {}
};

} // namespace rotor
