#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bmf {

enum class ErrorKind {
  InvalidInput,
  RankBudgetExceeded,
  InfeasibleInput,
  NotInClass,
  TooLarge,
  InvalidFrame,
  NotBalanced,
  NotStationary,
  CertificationFailed,
  NotPseudoStationary,
  InfeasibleD,
  Infeasible,
  FactorizableRegime,
  ConstructionFailed,
  SchemaMismatch,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace bmf
