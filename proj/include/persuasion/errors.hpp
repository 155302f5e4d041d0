#pragma once

#include <stdexcept>
#include <string>

namespace persuasion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (simplex membership, table shape, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Bayes update requested for an observation of marginal probability zero.
class ZeroProbabilityObservation : public Error {
 public:
  using Error::Error;
};

/// Solver or simulator configuration out of range.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration would exceed its cost guard.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

class CodebookTooLarge : public Error {
 public:
  using Error::Error;
};

class BlockTooLongForExact : public Error {
 public:
  using Error::Error;
};

/// No source sequence maps to the requested message.
class ZeroProbabilityMessage : public Error {
 public:
  using Error::Error;
};

/// Strategy fails the strict-feasibility / singleton worst-pair precondition.
class NotInQ0Tilde : public Error {
 public:
  using Error::Error;
};

/// Malformed instance, strategy or config document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace persuasion
