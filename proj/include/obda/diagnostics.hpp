#pragma once

#include <stdexcept>
#include <string>

namespace obda {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Schema-level problems: unknown relations or attributes, arity mismatches.
struct SchemaError : Error {
    using Error::Error;
};

/// Malformed plans: unbound CTE names, ill-formed operator trees.
struct PlanError : Error {
    using Error::Error;
};

/// Specification-level problems: constraints over undeclared predicates,
/// exact predicates without mappings, inconsistent option combinations.
struct SpecError : Error {
    using Error::Error;
};

/// Comparison of values of different types. By design this is an error,
/// not the unknown truth value.
struct TypeError : Error {
    using Error::Error;
};

/// Syntax error with source position.
struct ParseError : Error {
    ParseError(const std::string& source, unsigned line, unsigned column, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line(line),
          column(column) {}

    unsigned line = 0;
    unsigned column = 0;
};

} // namespace obda
