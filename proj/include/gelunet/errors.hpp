#pragma once

#include <stdexcept>
#include <string>

namespace gelunet {

// Shape of a network or input does not line up.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Requested derivative order or input dimension exceeds what the engine supports.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// A proof-level sub-budget collapsed below representable range.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A build request violates a construction precondition.
struct RequestError : std::invalid_argument {
    explicit RequestError(const std::string& what) : std::invalid_argument(what) {}
};

// The refinement loop ran out of attempts; carries the last measured error.
struct RefinementError : std::runtime_error {
    RefinementError(const std::string& what, double last_measured)
        : std::runtime_error(what), last_measured_error(last_measured) {}
    double last_measured_error;
};

// Malformed serialized document.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Source text does not match the expression grammar.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error(what), line(line), column(column) {}
    int line;
    int column;
};

// An inferred interval violates a domain constraint of the construction.
struct RangeError : std::runtime_error {
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gelunet
