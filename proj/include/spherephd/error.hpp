#pragma once

#include <stdexcept>
#include <string>

namespace spherephd {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class UnsupportedSubdivision : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// File-format failures. Each malformed-header class has its own type.
class FormatError : public Error {
 public:
  using Error::Error;
};

class MagicMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersion : public FormatError {
 public:
  using FormatError::FormatError;
};

class LengthMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnknownDtype : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnknownKind : public FormatError {
 public:
  using FormatError::FormatError;
};

// Header parsed but the payload or a field value is inconsistent.
class InvalidContent : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace spherephd
