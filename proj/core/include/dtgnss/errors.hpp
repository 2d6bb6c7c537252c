#pragma once

#include <stdexcept>
#include <string>

namespace dtgnss {

/// Base class for all dtgnss errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries line/field context.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A domain invariant or parameter constraint was violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Requested epoch lies outside the ephemeris table coverage.
class CoverageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Fewer than four usable pseudorange measurements.
class InsufficientSatellitesError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Normal-equation matrix is numerically singular.
class SingularGeometryError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Database file was written by an incompatible format version.
class VersionError : public Error {
public:
    using Error::Error;
};

/// Database file failed its checksum.
class CorruptionError : public Error {
public:
    using Error::Error;
};

} // namespace dtgnss
