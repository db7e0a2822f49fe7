#ifndef ANDERSON_ERRORS_HPP
#define ANDERSON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace anderson {

// Error taxonomy shared by the C++ core and mirrored by the C API status
// codes in anderson.h. Each class corresponds to one failure mode of the
// numerical pipeline; catching anderson::Error catches them all.

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// mollifier scale not resolved by the grid (eps < 2h)
class UnresolvedMollifier : public Error {
public:
  explicit UnresolvedMollifier(const std::string& msg) : Error(msg) {}
};

class GridMismatch : public Error {
public:
  explicit GridMismatch(const std::string& msg) : Error(msg) {}
};

// kernel evaluated at its singular point (x = 0, d >= 2)
class SingularPoint : public Error {
public:
  explicit SingularPoint(const std::string& msg) : Error(msg) {}
};

class QuadratureFailure : public Error {
public:
  explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

class MaxIterations : public Error {
public:
  explicit MaxIterations(const std::string& msg) : Error(msg) {}
};

// fixed-point iteration stopped contracting (a below admissibility)
class Diverged : public Error {
public:
  explicit Diverged(const std::string& msg) : Error(msg) {}
};

class NoConvergence : public Error {
public:
  explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& msg) : Error(msg) {}
};

class InsufficientTailMass : public Error {
public:
  explicit InsufficientTailMass(const std::string& msg) : Error(msg) {}
};

} // namespace anderson

#endif
