#include "vidcurate/error.hpp"

namespace vidcurate {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DecodeError: return "DecodeError";
    case Errc::ParseError: return "ParseError";
    case Errc::RangeError: return "RangeError";
    case Errc::SequenceTooShort: return "SequenceTooShort";
    case Errc::InvalidFraction: return "InvalidFraction";
    case Errc::EmptyBudget: return "EmptyBudget";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::NoGroundTruth: return "NoGroundTruth";
    case Errc::NoSamples: return "NoSamples";
    case Errc::MissingPredictions: return "MissingPredictions";
    case Errc::NothingToExport: return "NothingToExport";
    case Errc::InvalidTransition: return "InvalidTransition";
    case Errc::ValidationError: return "ValidationError";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace vidcurate
