#pragma once

#include <stdexcept>
#include <string>

namespace qkdrates {

/// Bad caller input: out-of-range parameters, malformed strings, mismatched sizes.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerically well-formed request that falls outside a model's domain
/// (error rate beyond the channel family, support violation in a relative entropy).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The X·Z eigendecomposition has (numerically) repeated eigenvalues.
class DegenerateSpectrumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated session produced too few sifted estimation symbols to continue.
class SessionAbortedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace detail
}  // namespace qkdrates
