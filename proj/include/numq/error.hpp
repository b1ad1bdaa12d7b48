#pragma once

#include <stdexcept>
#include <string>

namespace numq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file: bad header, unreadable stream, zero usable rows.
struct SchemaError : Error {
    using Error::Error;
};

/// Invalid configuration document (bad value, unknown key shape, bad rule).
struct ConfigError : Error {
    using Error::Error;
};

/// Operation on data that cannot support it (unknown parameter, empty report).
struct DataError : Error {
    using Error::Error;
};

/// Mathematical precondition breach (e.g. relative distance with zero truth).
struct DomainError : Error {
    using Error::Error;
};

}  // namespace numq
