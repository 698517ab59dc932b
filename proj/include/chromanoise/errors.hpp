#pragma once

#include <stdexcept>
#include <string>

namespace chromanoise {

enum class ErrorKind {
    InvalidArgument,       // bad parameter or malformed input content
    DegeneratePatch,       // fewer than two samples, variance undefined
    ImageTooSmall,         // image cannot hold a single patch
    NoUsablePatches,       // every sampled patch was excluded
    InvalidFrame,          // Bayer frame violates CFA constraints
    Decode,                // file content could not be decoded
    Io,                    // OS-level read/write failure
    UndefinedCorrelation,  // zero-variance noise plane
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace chromanoise
