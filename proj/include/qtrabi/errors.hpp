#pragma once

#include <stdexcept>
#include <string>

namespace qtrabi {

// Base of every error thrown by the library. Subclasses name the failure
// category so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SearchError : public Error {
public:
    using Error::Error;
};

class OverlapError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

class TruncationError : public Error {
public:
    TruncationError(const std::string& what, int last_cutoff, double last_top_weight,
                    double last_energy_change)
        : Error(what),
          last_cutoff_(last_cutoff),
          last_top_weight_(last_top_weight),
          last_energy_change_(last_energy_change) {}
    int last_cutoff() const noexcept { return last_cutoff_; }
    double last_top_weight() const noexcept { return last_top_weight_; }
    double last_energy_change() const noexcept { return last_energy_change_; }

private:
    int last_cutoff_;
    double last_top_weight_;
    double last_energy_change_;
};

// A solver or truncation failure at one sweep grid point; the message
// carries the point coordinates followed by the original message.
class PointError : public Error {
public:
    PointError(const std::string& what, double gamma, double lambda, double eta)
        : Error(what), gamma_(gamma), lambda_(lambda), eta_(eta) {}
    double gamma() const noexcept { return gamma_; }
    double lambda() const noexcept { return lambda_; }
    double eta() const noexcept { return eta_; }

private:
    double gamma_;
    double lambda_;
    double eta_;
};

}  // namespace qtrabi
