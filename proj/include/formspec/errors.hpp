#pragma once

#include <stdexcept>
#include <string>

namespace formspec {

// Precondition on a numeric argument violated (bad dimension, exponent, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input mesh is not a closed, connected, consistently oriented 2-manifold.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed experiment spec or report file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace formspec
