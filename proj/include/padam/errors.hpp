#pragma once

#include <stdexcept>
#include <string>

namespace padam {

/// Numerical blow-up during time stepping or sampling. Carries the step at
/// which the first non-finite (or out-of-range) value appeared.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step = -1)
        : std::runtime_error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
          step_(step) {}

    long step() const { return step_; }

private:
    long step_;
};

/// Malformed container or record; carries the byte offset of the defect.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, long long offset = -1)
        : std::runtime_error(offset >= 0 ? what + " (offset " + std::to_string(offset) + ")" : what),
          offset_(offset) {}

    long long offset() const { return offset_; }

private:
    long long offset_;
};

} // namespace padam
