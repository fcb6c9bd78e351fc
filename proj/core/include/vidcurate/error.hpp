#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidcurate {

enum class Errc {
  EmptySequence,
  DimensionMismatch,
  DecodeError,
  ParseError,
  RangeError,
  SequenceTooShort,
  InvalidFraction,
  EmptyBudget,
  InvalidThreshold,
  NoGroundTruth,
  NoSamples,
  MissingPredictions,
  NothingToExport,
  InvalidTransition,
  ValidationError,
  IoError,
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vidcurate
