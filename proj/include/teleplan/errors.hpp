#ifndef TELEPLAN_ERRORS_HPP
#define TELEPLAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace teleplan {

/// Base class for all teleplan errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state, density matrix, or search instance exceeds a configured size cap.
class DimensionLimitError : public Error {
public:
    using Error::Error;
};

/// Numeric breakdown: eigensolver non-convergence, eigenvalue below the
/// negativity floor, and similar.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A search exceeded its expanded-node budget.
class SearchBudgetError : public Error {
public:
    using Error::Error;
};

/// Rejection of a textual input with a source position (1-based line/column).
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message,
               std::string token = {})
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
                message + (token.empty() ? "" : " (at '" + token + "')")),
          line(line), column(column), message(message), token(std::move(token)) {}

    int line;
    int column;
    std::string message;
    std::string token;
};

} // namespace teleplan

#endif
