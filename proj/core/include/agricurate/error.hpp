#pragma once

#include <stdexcept>
#include <string>

namespace agricurate {

// Base of every error the library throws. `kind()` is a stable machine-readable
// tag that the CLI prints in its one-line error record.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message) : Error("integrity_error", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain_error", message) {}
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& message, double residual)
        : Error("numerical_error", message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& message, int epoch)
        : Error("training_error", message), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace agricurate
