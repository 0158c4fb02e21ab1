#pragma once

#include <stdexcept>
#include <string>

namespace bbo {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpaceError : public Error { using Error::Error; };
class InvalidConfigurationError : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class ObservationShapeError : public Error { using Error::Error; };
class WrongTaskTypeError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class PopulationSizeError : public Error { using Error::Error; };
class ConfigurationError : public Error { using Error::Error; };
class SetupError : public Error { using Error::Error; };

/// Raised when every configuration of a finite space has been told or is pending.
class ExhaustedSpaceError : public Error { using Error::Error; };

/// Malformed input document; the message carries the offending field or line.
class ParseError : public Error { using Error::Error; };

/// Reading or writing a file failed.
class IoError : public Error { using Error::Error; };

/// Thrown by an objective to report that its evaluation ran past its deadline.
class EvaluationTimeout : public Error { using Error::Error; };

} // namespace bbo
