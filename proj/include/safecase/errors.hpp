#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace safecase {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(format(source, line, what)), source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& source, std::size_t line, const std::string& what) {
        std::string out = source.empty() ? std::string("<input>") : source;
        if (line > 0) out += ":" + std::to_string(line);
        return out + ": " + what;
    }

    std::string source_;
    std::size_t line_;
};

class RegistryError : public Error {
    using Error::Error;
};
class StructuralError : public Error {
    using Error::Error;
};
class AllocationError : public Error {
    using Error::Error;
};
class ConsolidationError : public Error {
    using Error::Error;
};
class DerivationError : public Error {
    using Error::Error;
};
class GraphIntegrityError : public Error {
    using Error::Error;
};
class ConfigError : public Error {
    using Error::Error;
};
class TraceIntegrityError : public Error {
    using Error::Error;
};
class SpecError : public Error {
    using Error::Error;
};
class MetricsError : public Error {
    using Error::Error;
};
class ComparisonError : public Error {
    using Error::Error;
};

}  // namespace safecase
