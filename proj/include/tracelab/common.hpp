#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tracelab {

using Index = Eigen::Index;
using VertexSet = std::vector<Index>;

// Every failure raised by the library derives from this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Iterative solve did not reach tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Killed generator is singular: no Dirichlet region and no absorbing vertex.
class RecurrenceError : public Error {
public:
    RecurrenceError() : Error("transience required") {}
};

}  // namespace tracelab
