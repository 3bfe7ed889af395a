#ifndef SPP_ERRORS_HPP
#define SPP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spp {

// Base class for everything this library throws. The CLI maps subclasses
// onto exit codes (usage 1, data 2, numeric 3).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

struct UnreadableFile : DataError { using DataError::DataError; };
struct UnsupportedFormat : DataError { using DataError::DataError; };
struct EmptyDataset : DataError { using DataError::DataError; };
struct InsufficientSamples : DataError { using DataError::DataError; };
struct IoError : DataError { using DataError::DataError; };
struct CorruptModel : DataError { using DataError::DataError; };

struct PatchLargerThanImage : ConfigError { using ConfigError::ConfigError; };
struct PyramidTooDeep : ConfigError { using ConfigError::ConfigError; };
struct InconsistentConfig : ConfigError { using ConfigError::ConfigError; };
struct ConfigInvalid : ConfigError { using ConfigError::ConfigError; };
struct DimensionMismatch : ConfigError { using ConfigError::ConfigError; };
struct TooFewSamples : ConfigError { using ConfigError::ConfigError; };

struct NotSymmetric : NumericError { using NumericError::NumericError; };
struct NotPositiveDefinite : NumericError { using NumericError::NumericError; };
struct DidNotConverge : NumericError { using NumericError::NumericError; };
struct DegenerateData : NumericError { using NumericError::NumericError; };

} // namespace spp

#endif
