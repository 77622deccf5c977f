#ifndef HEATDUAL_ERROR_HPP
#define HEATDUAL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatdual {

enum class ErrorCode {
  // configuration
  NonPositiveSize,
  NonPositiveTemperature,
  NonPositiveM,
  L3SizeMismatch,
  UnknownKey,
  MissingKey,
  BadValue,
  // shape / family
  DimensionMismatch,
  WrongFamily,
  NegativeEnergyInput,
  NonFiniteInput,
  // jump processes
  AbsorbedState,
  EventBudgetExceeded,
  // absorption solver
  WalkerBudgetExceeded,
  SingularSystem,
  SiteOrderViolation,
  // symbolic verification
  VariableMismatch,
  DomainGap,
  DegreeBudgetExceeded,
  // estimators
  SeriesTooShort,
  EqualTemperaturesForKappa,
  // generic
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code; every module throws this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace heatdual

#endif  // HEATDUAL_ERROR_HPP
