#include "bmf/error.hpp"

namespace bmf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::RankBudgetExceeded: return "RankBudgetExceeded";
    case ErrorKind::InfeasibleInput: return "InfeasibleInput";
    case ErrorKind::NotInClass: return "NotInClass";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidFrame: return "InvalidFrame";
    case ErrorKind::NotBalanced: return "NotBalanced";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::CertificationFailed: return "CertificationFailed";
    case ErrorKind::NotPseudoStationary: return "NotPseudoStationary";
    case ErrorKind::InfeasibleD: return "InfeasibleD";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::FactorizableRegime: return "FactorizableRegime";
    case ErrorKind::ConstructionFailed: return "ConstructionFailed";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace bmf
