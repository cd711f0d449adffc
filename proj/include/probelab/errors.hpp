#pragma once

#include <stdexcept>
#include <string>

namespace probelab {

/// Parameters for which a construction cannot succeed (exit code 3 in the CLI).
class InfeasibleParameters : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string & what, std::size_t line = 0) :
        std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A caller broke a documented precondition.
class ContractBreach : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace probelab
