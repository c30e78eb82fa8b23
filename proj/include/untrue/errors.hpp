#pragma once

#include <stdexcept>
#include <string>

namespace untrue {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArchiveError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct TemplateMatchError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct WhitelistError : Error {
    using Error::Error;
};

struct FetchError : Error {
    using Error::Error;
};

struct TimeoutError : FetchError {
    using FetchError::FetchError;
};

struct TranslationError : Error {
    using Error::Error;
};

struct InvalidQuery : Error {
    using Error::Error;
};

struct SnapshotError : Error {
    using Error::Error;
};

struct DagError : Error {
    using Error::Error;
};

}  // namespace untrue
