#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wandpoly {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or a violated caller precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// A digit stream was combined with a degree (or another stream) of a different base.
class BaseMismatch : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateChord : public InputError {
 public:
  using InputError::InputError;
};

/// The two chords intersect inside the open disk.
class ChordsCross : public InputError {
 public:
  using InputError::InputError;
};

/// A decision could not be made within the precision budget.
class Unresolved : public Error {
 public:
  using Error::Error;
};

/// An enclosure became too wide to support the requested containment test.
class EnclosureTooWide : public Unresolved {
 public:
  using Unresolved::Unresolved;
};

/// A fact that holds for every genuine wandering input failed to hold.
/// Always means a precondition (burn-in, wandering, precision) was violated.
class AssertionBreach : public Error {
 public:
  using Error::Error;
};

/// Two vertices share an image under the map.
class NotInjective : public Error {
 public:
  using Error::Error;
};

class NonInjectiveAtStep : public Error {
 public:
  NonInjectiveAtStep(std::size_t step, const std::string& what)
      : Error("not injective at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class NoBurnInWithinHorizon : public Error {
 public:
  using Error::Error;
};

class NoHoleExceedsOneOverD : public Error {
 public:
  using Error::Error;
};

class TieUnresolvable : public Error {
 public:
  using Error::Error;
};

class TooFewJumps : public Error {
 public:
  using Error::Error;
};

}  // namespace wandpoly
