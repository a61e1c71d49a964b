#pragma once

#include <stdexcept>
#include <string>

namespace semjpeg {

// Invalid caller-supplied arguments (shapes, ranges, config combinations).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or unsupported JPEG input. The kind distinguishes structural
// truncation from unknown/unsupported markers and entropy-level corruption.
class DecodeError : public std::runtime_error {
public:
    enum class Kind {
        Truncated,      // stream ends before the syntax does (incl. missing EOI)
        UnknownMarker,  // marker we cannot process (progressive SOF, DRI, ...)
        Huffman,        // invalid Huffman code or impossible coefficient data
        Malformed,      // structurally broken segment contents
    };

    DecodeError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Raised when RMSE calibration cannot reach the requested target.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace semjpeg
