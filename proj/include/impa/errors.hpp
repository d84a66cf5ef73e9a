#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impa {

// Singular network transformation (open-circuit / pole condition).
class pole_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// SQUID critical current fully suppressed (flux at a half-integer).
class divergence_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// No reflection-phase resonance found in the search band.
class no_resonance_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Calibration target cannot be reached (above the bare resonance).
class infeasible_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pump strength at or above the parametric oscillation threshold.
class threshold_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Environment with non-positive real impedance at the evaluation point.
class unphysical_environment_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Nonlinear fit failed to converge or received degenerate data.
class fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data has no decaying trend (T1/T2 fits).
class no_decay_error : public fit_error {
public:
    using fit_error::fit_error;
};

// Config / trace file syntax or validation failure. Carries the 1-based
// line number and the offending key when known.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string message, std::size_t line, std::string key = {})
        : std::runtime_error(format(message, line, key)),
          line_(line),
          key_(std::move(key)) {}

    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    static std::string format(const std::string& message, std::size_t line,
                              const std::string& key) {
        std::string out = "line " + std::to_string(line);
        if (!key.empty()) out += " (" + key + ")";
        out += ": " + message;
        return out;
    }

    std::size_t line_;
    std::string key_;
};

// Filesystem level failure (distinct exit code in the CLI).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace impa
