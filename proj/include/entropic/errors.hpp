#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace entropic {

// Base of every error thrown by the library. The CLI maps these to exit
// code 2 (data/validation error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class TargetUnreachable : public Error {
 public:
  using Error::Error;
};

// Rejection sampling ran out of draws; `best` is the closest draw seen.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> best, double best_entropy)
      : Error(what), best(std::move(best)), best_entropy(best_entropy) {}

  std::vector<double> best;
  double best_entropy;
};

class UnsupportedSize : public Error {
 public:
  using Error::Error;
};

class TooManyOrientations : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line(line) {}

  int line;
};

}  // namespace entropic
