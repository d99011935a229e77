#pragma once

#include <stdexcept>
#include <string>

namespace kahler {

/// A function was evaluated outside its domain (log of zero, singular
/// metric, point outside a model's sampling box, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Matrix failed a Hermitian or positive-definiteness precondition.
class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model declaration: unknown builtin, malformed spec file,
/// non-Hermitian or indefinite metric entries.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kahler
