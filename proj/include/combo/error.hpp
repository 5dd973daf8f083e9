#pragma once

#include <stdexcept>
#include <string>

namespace combo {

enum class ErrorCode {
  DuplicateId,
  EmptyCatalog,
  InvalidDates,
  SameOriginDestination,
  InvalidConfig,
  UnknownRoute,
  UnknownAirline,
  UnknownAirport,
  InvalidDay,
  IncompleteQuotes,
  NoOffers,
  EmptyCorpus,
  EmptyTrainingSet,
  NonFiniteLoss,
  MissingEmbeddingTable,
  NoCompetitiveCombos,
  EmptyInstanceSet,
  MalformedCurve,
  BudgetTooSmall,
  InsufficientHistory,
  ValidationFailed,
  EmptyPreviousRules,
  InvalidFractions,
  NoServedDays,
  MissingData,
  IoError,
};

const char* error_code_name(ErrorCode code);

// All library failures surface as Error; `code()` identifies the condition
// so callers and tests can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace combo
