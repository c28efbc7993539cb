#pragma once

#include <stdexcept>
#include <string>

namespace rmu {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// A column that should carry mass is (numerically) all zero.
class ZeroColumnError : public Error {
 public:
  using Error::Error;
};

class NegativeEntryError : public Error {
 public:
  using Error::Error;
};

class NotOnManifoldError : public Error {
 public:
  using Error::Error;
};

class NotTangentError : public Error {
 public:
  using Error::Error;
};

class NotOnSimplexError : public Error {
 public:
  using Error::Error;
};

class RankTooLargeError : public Error {
 public:
  using Error::Error;
};

// Penalty weight came out zero/non-finite, e.g. perfectly fit or empty init.
class DegeneratePenaltyError : public Error {
 public:
  using Error::Error;
};

// Requested zero count cannot be placed without emptying a column.
class InfeasibleSparsityError : public Error {
 public:
  using Error::Error;
};

class EmptyTraceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmu
