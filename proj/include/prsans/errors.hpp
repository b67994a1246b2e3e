#pragma once

#include <stdexcept>
#include <string>

namespace prsans {

// Precondition / invariant violations (caller bugs).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// The prior in hand cannot support the requested analytic computation.
class UnsupportedPriorError : public ContractError {
public:
    explicit UnsupportedPriorError(const std::string& what) : ContractError(what) {}
};

class FileError : public std::runtime_error {
public:
    FileError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Solver produced a non-finite iterate.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(int iteration)
        : std::runtime_error("solver diverged at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

// A certified inequality failed; carries the first offending step index.
class CertificationError : public std::runtime_error {
public:
    CertificationError(int first_step, const std::string& what)
        : std::runtime_error(what), first_step_(first_step) {}
    int first_step() const { return first_step_; }

private:
    int first_step_;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(message + " (field: " + field + ")"), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class ImageIoCode {
    open_failure,
    bad_magic,
    bad_version,
    bad_header,
    dimension_mismatch,
    payload_size_mismatch,
    non_finite,
};

class ImageIoError : public std::runtime_error {
public:
    ImageIoError(ImageIoCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ImageIoCode code() const { return code_; }

private:
    ImageIoCode code_;
};

}  // namespace prsans
