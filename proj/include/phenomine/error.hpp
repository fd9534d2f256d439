#pragma once

#include <stdexcept>
#include <string>

namespace phenomine {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed schema or config document. Carries the offending location.
class SchemaError : public Error {
public:
    SchemaError(const std::string& where, const std::string& what)
        : Error(where + ": " + what), where_(where) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Gateway errors. Transient ones are retried by the gateway.
class TransportError : public Error {
public:
    using Error::Error;
};

class HttpStatusError : public Error {
public:
    HttpStatusError(int status, const std::string& body)
        : Error("HTTP " + std::to_string(status) + ": " + body), status_(status) {}
    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return status_ == 429 || status_ >= 500; }

private:
    int status_;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Contingency table with a zero margin or zero expected count.
class DegenerateTableError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace phenomine
