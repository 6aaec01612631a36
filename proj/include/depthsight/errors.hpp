// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace depthsight {

/// Base of every depthsight exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad input data or a degenerate runtime condition (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A broken library invariant, i.e. a bug (CLI exit code 3).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateDisparity : public DataError {
 public:
  using DataError::DataError;
};

class OutOfBounds : public DataError {
 public:
  using DataError::DataError;
};

class NonPositiveDepth : public DataError {
 public:
  using DataError::DataError;
};

class NoValidDepth : public DataError {
 public:
  using DataError::DataError;
};

class NoDepthInBox : public DataError {
 public:
  using DataError::DataError;
};

class ChannelMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class NegativeDimension : public DataError {
 public:
  using DataError::DataError;
};

class EmptyScene : public DataError {
 public:
  using DataError::DataError;
};

class UnknownFormat : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace depthsight
