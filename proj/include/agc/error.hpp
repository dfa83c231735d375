#pragma once

#include <stdexcept>
#include <string>

namespace agc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyHorizon : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NodeCountMismatch : public Error {
 public:
  using Error::Error;
};

class NotNested : public Error {
 public:
  using Error::Error;
};

class PatternViolation : public Error {
 public:
  using Error::Error;
};

class EmptyCouplingSet : public Error {
 public:
  using Error::Error;
};

class AlphaOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A product of two decision-dependent expressions was requested.
class NonAffineExpression : public Error {
 public:
  using Error::Error;
};

class NotSolved : public Error {
 public:
  using Error::Error;
};

class CausalityViolation : public Error {
 public:
  using Error::Error;
};

class SingularShape : public Error {
 public:
  using Error::Error;
};

class CoordOutOfRange : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed problem or solution file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace agc
