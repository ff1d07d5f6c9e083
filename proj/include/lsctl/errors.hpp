#pragma once

#include <stdexcept>

namespace lsctl {

/// Input outside an operator's domain: R0 <= 1, a hatted denominator <= 0, bad grid.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Commanded newborn concentration cannot be realized with a positive dilution.
class SetpointError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BlowupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The predator loss term 1/int(g2 x1) is undefined.
class ExtinctionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsctl
