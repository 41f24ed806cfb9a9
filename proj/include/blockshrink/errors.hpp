#pragma once

#include <stdexcept>
#include <string>

namespace blockshrink {

// Base class so callers can catch everything coming out of this library
// with a single handler (the CLI maps these to exit code 3).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

class NotOrthogonal : public Error {
 public:
  explicit NotOrthogonal(const std::string& what) : Error(what) {}
};

class InsufficientDof : public Error {
 public:
  explicit InsufficientDof(const std::string& what) : Error(what) {}
};

class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

class NegativeCoefficient : public Error {
 public:
  explicit NegativeCoefficient(const std::string& what) : Error(what) {}
};

class ParityUnsupported : public Error {
 public:
  explicit ParityUnsupported(const std::string& what) : Error(what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row, long col)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(col) + ")"),
        row(row),
        col(col) {}
  long row;
  long col;
};

class InconsistentDim : public Error {
 public:
  explicit InconsistentDim(const std::string& what) : Error(what) {}
};

class SingularScatter : public Error {
 public:
  explicit SingularScatter(const std::string& what) : Error(what) {}
};

}  // namespace blockshrink
