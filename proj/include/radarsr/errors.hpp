#pragma once

#include <stdexcept>
#include <string>

namespace radarsr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// RANSAC could not find a ground plane with enough support.
class PlaneFitFailure : public Error {
 public:
  using Error::Error;
};

/// A score or noise inversion was requested where v_t <= 0.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

class EmptyReference : public Error {
 public:
  using Error::Error;
};

/// Cross-covariance is rank deficient (collinear or coincident points).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class MissingForwardContext : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or parameters during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace radarsr
