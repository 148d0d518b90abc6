#pragma once

#include <stdexcept>
#include <string>

namespace biortheq {

enum class ErrorKind {
  domain,          // point outside the branch domain of f, or bad domain shape
  parameter,       // argument outside its documented range
  structural,      // mismatched grids, empty supports, empty batches
  numerical,       // non-finite values encountered during iteration
  resource,        // size guard tripped
  precondition,    // input does not meet an operation's mathematical precondition
  no_convergence,  // iterative procedure did not stabilize
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define BIORTHEQ_DEFINE_ERROR(Name, Kind)                      \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& what) : Error(Kind, what) {} \
  };

BIORTHEQ_DEFINE_ERROR(DomainError, ErrorKind::domain)
BIORTHEQ_DEFINE_ERROR(ParameterError, ErrorKind::parameter)
BIORTHEQ_DEFINE_ERROR(StructuralError, ErrorKind::structural)
BIORTHEQ_DEFINE_ERROR(NumericalError, ErrorKind::numerical)
BIORTHEQ_DEFINE_ERROR(ResourceError, ErrorKind::resource)
BIORTHEQ_DEFINE_ERROR(PreconditionError, ErrorKind::precondition)

#undef BIORTHEQ_DEFINE_ERROR

/// Raised when an iterative procedure gives up. Carries the last radius or
/// iterate summary so callers can still report partial results.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double last_value)
      : Error(ErrorKind::no_convergence, what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

}  // namespace biortheq
