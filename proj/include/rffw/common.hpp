#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rffw {

// Error classes map 1:1 onto CLI exit codes.
enum class ErrorClass : int { Config = 2, Data = 3, Tamper = 4, Internal = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorClass::Config, w) {}
};

struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorClass::Data, w) {}
};

struct TamperError : Error {
    explicit TamperError(const std::string& w) : Error(ErrorClass::Tamper, w) {}
};

// I/O failures (missing/unreadable files). Distinct type from TamperError so a
// broken ledger file is never reported as a tampered one.
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorClass::Data, w) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& w) : Error(ErrorClass::Internal, w) {}
};

// Dataset file validation errors, one type per failure mode.
struct BadMagicError : DataError {
    explicit BadMagicError(const std::string& w) : DataError(w) {}
};
struct VersionError : DataError {
    explicit VersionError(const std::string& w) : DataError(w) {}
};
struct TruncatedError : DataError {
    explicit TruncatedError(const std::string& w) : DataError(w) {}
};
struct ChecksumError : TamperError {
    explicit ChecksumError(const std::string& w) : TamperError(w) {}
};

} // namespace rffw
