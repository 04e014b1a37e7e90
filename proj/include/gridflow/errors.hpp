#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A factorization pivot fell below the singularity threshold.
class SingularMatrixError : public Error {
  public:
    explicit SingularMatrixError(const std::string& what) : Error(what) {}
};

/// Operand shapes do not agree.
class DimensionMismatchError : public Error {
  public:
    explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

/// Case or scenario document is not valid JSON or violates the schema.
/// `path` points at the offending location (field path or byte offset).
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::string path = {})
        : Error(path.empty() ? what : what + " (at " + path + ")"), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

/// One message per violated invariant; never just the first.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "case validation failed:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class UnknownBusError : public Error {
  public:
    explicit UnknownBusError(int bus_id)
        : Error("unknown bus id " + std::to_string(bus_id)) {}
};

/// Parsed but deliberately not implemented (e.g. complex phase-shifting taps).
class NotSupportedError : public Error {
  public:
    explicit NotSupportedError(const std::string& what) : Error(what) {}
};

/// A scenario action referenced a missing element or an element of the wrong kind.
class ActionRejectedError : public Error {
  public:
    explicit ActionRejectedError(const std::string& reason) : Error("action rejected: " + reason) {}
};

/// Fault current exceeds every rating in the breaker catalog.
class NoAdequateRatingError : public Error {
  public:
    explicit NoAdequateRatingError(double amps)
        : Error("no catalog rating covers " + std::to_string(amps) + " A") {}
};

/// The zero- (or source-free positive-) sequence network has no path to ground.
class UngroundedSystemError : public Error {
  public:
    explicit UngroundedSystemError(const std::string& what) : Error(what) {}
};

}  // namespace gridflow
