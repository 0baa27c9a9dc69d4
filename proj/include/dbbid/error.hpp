#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dbbid {

enum class Errc {
  kEmptyObservations,
  kNoWinObservations,
  kInvalidObservation,
  kModeMismatch,
  kInvalidRange,
  kInvalidInstance,
  kInvalidConfig,
  kParse,
  kIo,
  kDivergence,
};

std::string_view to_string(Errc code);

// Input-class errors map to CLI exit code 2, numeric ones to 3.
inline bool is_numeric(Errc code) { return code == Errc::kDivergence; }

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kEmptyObservations:
      return "EmptyObservations";
    case Errc::kNoWinObservations:
      return "NoWinObservations";
    case Errc::kInvalidObservation:
      return "InvalidObservation";
    case Errc::kModeMismatch:
      return "ModeMismatch";
    case Errc::kInvalidRange:
      return "InvalidRange";
    case Errc::kInvalidInstance:
      return "InvalidInstance";
    case Errc::kInvalidConfig:
      return "InvalidConfig";
    case Errc::kParse:
      return "ParseError";
    case Errc::kIo:
      return "IoError";
    case Errc::kDivergence:
      return "Divergence";
  }
  return "Unknown";
}

}  // namespace dbbid
