#pragma once

#include <stdexcept>
#include <string>

namespace ztopo {

// Root of every error raised by the library. Each failure mode of the
// physics modules has its own type so callers (the sweep engine, the CLI)
// can react to it without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class CoincidentAtoms : public InvalidGeometry {
 public:
  using InvalidGeometry::InvalidGeometry;
};

class InvalidAngle : public Error {
 public:
  using Error::Error;
};

class SingularSeparation : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidCutoff : public Error {
 public:
  using Error::Error;
};

class DegenerateBands : public Error {
 public:
  DegenerateBands(const std::string& what, double k, double phi)
      : Error(what), k_(k), phi_(phi) {}

  double k() const noexcept { return k_; }
  double phi() const noexcept { return phi_; }

 private:
  double k_;
  double phi_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ztopo
