#pragma once

#include <stdexcept>
#include <string>

namespace cmekit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NonFinite : public Error {
public:
  using Error::Error;
};

class NonSymmetric : public Error {
public:
  using Error::Error;
};

class NotPsd : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class RangeNotIncluded : public Error {
public:
  using Error::Error;
};

/// Raised by the CME fits when ran C_XY is not inside ran C_X; the truncated
/// fit is the fallback.
class RangeInclusionViolated : public RangeNotIncluded {
public:
  using RangeNotIncluded::RangeNotIncluded;
};

class RankOutOfBounds : public Error {
public:
  using Error::Error;
};

class Incompatible : public Error {
public:
  using Error::Error;
};

class SingularPopulationSpectrum : public Error {
public:
  using Error::Error;
};

/// Malformed joint spec, sample file or CLI configuration.
class InvalidSpec : public Error {
public:
  using Error::Error;
};

} // namespace cmekit
