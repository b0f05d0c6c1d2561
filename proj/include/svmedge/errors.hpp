#pragma once

#include <stdexcept>
#include <string>

namespace svmedge {

/// File or OS level failure (missing file, unwritable path).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed content in a file we expected to understand (PGM, model, CSV).
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace svmedge
