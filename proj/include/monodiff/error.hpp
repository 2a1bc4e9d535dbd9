#pragma once

#include <stdexcept>
#include <string>

namespace monodiff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid with fewer than two intervals (no interior nodes).
class InvalidGrid : public Error {
public:
    using Error::Error;
};

/// Point evaluation outside the closed unit square.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed coefficient expression, or one that cannot be differentiated.
class ExpressionError : public Error {
public:
    using Error::Error;
};

/// Diffusion tensor not uniformly positive definite on the probe lattice.
class FieldRejected : public Error {
public:
    using Error::Error;
};

/// No admissible stencil, or a request that would emit negative splitting
/// coefficients.
class PlanError : public Error {
public:
    using Error::Error;
};

/// Inconsistent plan / coefficient data found while building the system.
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// The assembled matrix failed the M-matrix audit.
class AuditError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch or similar misuse of the linear-algebra layer.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace monodiff
