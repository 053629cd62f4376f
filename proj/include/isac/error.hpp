#pragma once

#include <stdexcept>
#include <string>

namespace isac {

enum class ErrorKind {
    validation,       // bad arguments, malformed configuration
    degenerate,       // coincident positions, singular ranges, zero-power patterns
    infeasible,       // SINR/power requirements cannot be met
    solver_failure,   // conic solver did not reach an optimal certificate
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DegenerateGeometryError : public Error {
public:
    explicit DegenerateGeometryError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ErrorKind::solver_failure, what) {}
};

}  // namespace isac
