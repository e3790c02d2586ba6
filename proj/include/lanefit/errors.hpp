#pragma once

#include <stdexcept>
#include <string>

namespace lanefit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point lies on (or numerically at) the projected horizon line.
struct HorizonSingularity : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct MissingLabels : Error {
    using Error::Error;
};

struct MisalignedRows : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct SchemaError : Error {
    SchemaError(const std::string& missing_key, std::size_t line)
        : Error("missing key '" + missing_key + "' (line " + std::to_string(line) + ")"),
          key(missing_key), line_number(line) {}
    std::string key;
    std::size_t line_number;
};

struct InfeasibleStart : Error {
    using Error::Error;
};

struct DegenerateCamera : Error {
    using Error::Error;
};

struct MissingImage : Error {
    using Error::Error;
};

}  // namespace lanefit
