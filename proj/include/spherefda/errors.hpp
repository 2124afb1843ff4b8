#pragma once

#include <stdexcept>
#include <string>

namespace spherefda {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct AntipodalPoints : Error { using Error::Error; };
struct DegenerateEndpoints : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct ZeroVelocity : Error { using Error::Error; };

// curves / bundle
struct TooFewSamples : Error { using Error::Error; };
struct BaseMismatch : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct SpeedTooLarge : Error { using Error::Error; };

// statistics
struct TooFewCurves : Error { using Error::Error; };
struct DegenerateInit : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };

/// Parse errors keep the 1-based source line they were raised on.
struct ParseError : Error {
  long line;
  ParseError(const std::string& msg, long line_)
      : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

struct MalformedHeader : ParseError { using ParseError::ParseError; };
struct RowCountMismatch : ParseError { using ParseError::ParseError; };
struct BadCoordinate : ParseError { using ParseError::ParseError; };
struct BadHeader : ParseError { using ParseError::ParseError; };
struct NonMonotoneTime : ParseError { using ParseError::ParseError; };
struct NonUnitVector : ParseError { using ParseError::ParseError; };

struct LatOutOfRange : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace spherefda
