#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ubiq {

// Process exit codes shared by every CLI command.
enum class ExitCode : int {
    Success = 0,
    Validation = 2,
    Data = 3,
    Invariant = 4,
};

// Root of the engine's exception hierarchy. Each subtype maps onto one exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept = 0;
};

// Bad parameters, bad manifests, misaligned inputs.
class ValidationError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Validation; }
};

class ParameterError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AlignmentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyValidationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Collects every problem found while validating a document so they can be reported at once.
class ManifestError : public ValidationError {
public:
    explicit ManifestError(std::vector<std::string> problems)
        : ValidationError(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string out = "manifest validation failed:";
        for (const auto& p : problems) out += "\n  - " + p;
        return out;
    }
    std::vector<std::string> problems_;
};

// Non-finite values, malformed files, truncated payloads.
class DataError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Data; }
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class UnsupportedDTypeError : public DataError {
public:
    UnsupportedDTypeError(const std::string& descr, const std::string& path)
        : DataError(path + ": unsupported dtype descriptor '" + descr + "'"), descr_(descr) {}
    const std::string& descriptor() const noexcept { return descr_; }

private:
    std::string descr_;
};

class SizeError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

// A computed result broke an invariant the math guarantees.
class InvariantError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Invariant; }
};

}  // namespace ubiq
