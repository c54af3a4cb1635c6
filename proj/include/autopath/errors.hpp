#pragma once

#include <stdexcept>
#include <string>

namespace autopath {

// Base class for all recoverable toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (wrong version string, missing keys, empty node list).
struct SchemaError : Error {
    using Error::Error;
};

// Structurally valid file with inconsistent content (dangling edge, node
// outside its lane boundaries, disconnected graph). Message names the entity.
struct ValidationError : Error {
    using Error::Error;
};

struct DegenerateEndpoints : Error {
    using Error::Error;
};

struct DestinationOffMap : Error {
    using Error::Error;
};

struct StartUnconnectable : Error {
    using Error::Error;
};

struct NoInvalidNodes : Error {
    using Error::Error;
};

struct UnknownLane : Error {
    using Error::Error;
};

struct MissingBoundaryContext : Error {
    using Error::Error;
};

// Left/right corridor half-planes leave no interior; message carries the step index.
struct DegenerateCorridor : Error {
    using Error::Error;
};

struct HorizonTooShort : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace autopath
