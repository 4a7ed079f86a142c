#pragma once

#include <stdexcept>
#include <string>

namespace warpmetric {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite values, eigensolver trouble (CLI exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

class EmptyPathError : public DataError {
 public:
  EmptyPathError() : DataError("alignment path is empty") {}
};

/// Path does not start at (1,1) or end at (T_A,T_B). `index` is 1-based.
class BadEndpointError : public DataError {
 public:
  BadEndpointError(std::size_t index, const std::string& what)
      : DataError("bad endpoint at step " + std::to_string(index) + ": " + what), index(index) {}
  std::size_t index;
};

/// Step `index` is not reached by a (1,0), (0,1) or (1,1) move, or leaves the grid.
class BadMoveError : public DataError {
 public:
  BadMoveError(std::size_t index, const std::string& what)
      : DataError("bad move at step " + std::to_string(index) + ": " + what), index(index) {}
  std::size_t index;
};

class DimensionMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class TooLargeError : public DataError {
 public:
  using DataError::DataError;
};

class OutOfRangeError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyDatasetError : public DataError {
 public:
  EmptyDatasetError() : DataError("dataset is empty") {}
};

class BadSpecError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& file, long line, long column, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  long line;
  long column;
};

class InconsistentDimsError : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteError : public NumericError {
 public:
  using NumericError::NumericError;
};

class EigenFailureError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace warpmetric
