#pragma once

#include <stdexcept>
#include <string>

namespace ulamlab {

/// Base class for all errors raised by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed scenario configuration, schema violation, unknown scenario kind.
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
};

/// Expression source could not be parsed. Carries the byte offset of the
/// first offending character.
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t offset)
        : error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Domain arithmetic left the declared extent.
class range_error : public error {
public:
    explicit range_error(const std::string& what) : error(what) {}
};

/// A stated precondition of an operation does not hold for the given inputs.
class precondition_error : public error {
public:
    explicit precondition_error(const std::string& what) : error(what) {}
};

/// The fixed-point engine observed contraction ratios incompatible with the
/// declared Lipschitz constant.
class contraction_violation : public error {
public:
    explicit contraction_violation(const std::string& what) : error(what) {}
};

/// Stabilizer limits that should coincide disagree beyond tolerance; signals
/// a window that is too small or an overflowing instance.
class engine_inconsistency : public error {
public:
    explicit engine_inconsistency(const std::string& what) : error(what) {}
};

} // namespace ulamlab
