#pragma once

#include <stdexcept>
#include <string>

namespace msdet {

/// Data or contract violations: invalid boxes, out-of-range confidences,
/// schema errors, degenerate point configurations. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem and format-level failures (unreadable file, bad image magic,
/// write errors). Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace msdet
