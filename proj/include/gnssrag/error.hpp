#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gnssrag {

enum class ErrorKind {
    ParameterDomain,
    Contract,
    DataIntegrity,
    Uniqueness,
    State,
    Format,
    Io,
    Transport,
    Timeout,
    MalformedResponse,
    NotEstimable,
    Leakage,
    NumericalFailure,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParameterDomain: return "parameter_domain";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::DataIntegrity: return "data_integrity";
        case ErrorKind::Uniqueness: return "uniqueness";
        case ErrorKind::State: return "state";
        case ErrorKind::Format: return "format";
        case ErrorKind::Io: return "io";
        case ErrorKind::Transport: return "transport";
        case ErrorKind::Timeout: return "timeout";
        case ErrorKind::MalformedResponse: return "malformed_response";
        case ErrorKind::NotEstimable: return "not_estimable";
        case ErrorKind::Leakage: return "leakage";
        case ErrorKind::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

/// Base of every error raised by the toolkit. Callers that only need a
/// category switch on kind(); tests catch the concrete subclasses.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Value outside its documented domain. field() names the offender.
class ParameterError : public Error {
public:
    ParameterError(std::string field, const std::string& what)
        : Error(ErrorKind::ParameterDomain, field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

class DimensionError : public ContractError {
public:
    DimensionError(std::size_t expected, std::size_t received)
        : ContractError("dimension mismatch: expected " + std::to_string(expected) + ", received " +
                        std::to_string(received)),
          expected_(expected), received_(received) {}
    std::size_t expected() const noexcept { return expected_; }
    std::size_t received() const noexcept { return received_; }

private:
    std::size_t expected_;
    std::size_t received_;
};

class DataIntegrityError : public Error {
public:
    explicit DataIntegrityError(const std::string& what) : Error(ErrorKind::DataIntegrity, what) {}
};

class UniquenessError : public Error {
public:
    explicit UniquenessError(const std::string& what) : Error(ErrorKind::Uniqueness, what) {}
};

class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

/// Malformed persisted data. offset() is the byte position where decoding failed.
class FormatError : public Error {
public:
    FormatError(std::uint64_t offset, const std::string& what)
        : Error(ErrorKind::Format, what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(ErrorKind::Transport, what) {}
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& what) : Error(ErrorKind::Timeout, what) {}
};

class MalformedResponseError : public Error {
public:
    explicit MalformedResponseError(const std::string& what) : Error(ErrorKind::MalformedResponse, what) {}
};

class NotEstimableError : public Error {
public:
    explicit NotEstimableError(const std::string& what) : Error(ErrorKind::NotEstimable, what) {}
};

class LeakageError : public Error {
public:
    explicit LeakageError(const std::string& what) : Error(ErrorKind::Leakage, what) {}
};

class NumericalError : public Error {
public:
    NumericalError(int iteration, const std::string& what)
        : Error(ErrorKind::NumericalFailure, what + " at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

}  // namespace gnssrag
