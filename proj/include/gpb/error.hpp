#pragma once

#include <stdexcept>
#include <string>

namespace gpb {

// Root of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Index outside a sparse structure, duplicate entry, or malformed topology.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by an operation or a training step.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// A sampling request that the data cannot satisfy.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Argument outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Bundle ingestion failures. Each subclass is a distinct failure mode.
class BundleError : public Error {
 public:
  using Error::Error;
};
class MissingFileError : public BundleError {
 public:
  using BundleError::BundleError;
};
class RaggedRowError : public BundleError {
 public:
  using BundleError::BundleError;
};
class DanglingEdgeError : public BundleError {
 public:
  using BundleError::BundleError;
};
class LabelRangeError : public BundleError {
 public:
  using BundleError::BundleError;
};
class ParseError : public BundleError {
 public:
  using BundleError::BundleError;
};

// Checkpoint container failed its magic, version, length or checksum test.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration rejected during validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpb
