#include "heatdual/error.hpp"

namespace heatdual {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveSize: return "NonPositiveSize";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::NonPositiveM: return "NonPositiveM";
    case ErrorCode::L3SizeMismatch: return "L3SizeMismatch";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::NegativeEnergyInput: return "NegativeEnergyInput";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::AbsorbedState: return "AbsorbedState";
    case ErrorCode::EventBudgetExceeded: return "EventBudgetExceeded";
    case ErrorCode::WalkerBudgetExceeded: return "WalkerBudgetExceeded";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SiteOrderViolation: return "SiteOrderViolation";
    case ErrorCode::VariableMismatch: return "VariableMismatch";
    case ErrorCode::DomainGap: return "DomainGap";
    case ErrorCode::DegreeBudgetExceeded: return "DegreeBudgetExceeded";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::EqualTemperaturesForKappa: return "EqualTemperaturesForKappa";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace heatdual
