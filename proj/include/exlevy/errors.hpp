#pragma once

#include <stdexcept>
#include <string>

namespace exlevy {

/// Invalid argument, violated model invariant or admissibility bound.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its tolerance (quadrature, series, optimizer).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Intermediate quantity not representable in double precision.
class OverflowError : public NumericalError {
 public:
  OverflowError(const std::string& what, int term_index)
      : NumericalError(what + " (term " + std::to_string(term_index) + ")"),
        term_index_(term_index) {}
  int term_index() const noexcept { return term_index_; }

 private:
  int term_index_;
};

/// Malformed input data (JSON/CSV) or inconsistent market snapshot.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exlevy
