#pragma once

// Measured-trace ingestion and derived-quantity extraction: S21 trace CSV,
// pump-on/pump-off gain and 1-dB compression from power sweeps.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "impa/paramp.hpp"

namespace impa {

// S21 trace with `# key=value` metadata. Frequencies strictly increasing.
struct MeasuredTrace {
    std::vector<double> freq;
    std::vector<complexd> s21;
    std::vector<std::pair<std::string, std::string>> meta;
};

// Parses the trace CSV format:
//   # key=value            (metadata lines, optional)
//   freq_hz,s21_re,s21_im  (header, mandatory)
//   9.4e9,0.5,-0.1         (rows)
// Errors carry 1-based line numbers.
MeasuredTrace parse_trace_csv(std::string_view text);

std::string serialize_trace_csv(const MeasuredTrace& trace);

// |on| / |off| with the off trace linearly interpolated onto the on grid,
// restricted to the overlapping frequency range.
GainProfile measured_gain(const MeasuredTrace& on, const MeasuredTrace& off);

struct PowerSweep {
    std::vector<double> power_dbm;  // strictly increasing
    std::vector<double> gain_db;
};

PowerSweep parse_power_sweep_csv(std::string_view text);

struct CompressionResult {
    bool compressed = false;
    double p1db_dbm = 0.0;
    double reference_db = 0.0;  // mean of the low-power plateau
};

// Reference gain from the low-power plateau (first points within 0.2 dB);
// returns the interpolated power where gain first falls 1 dB below it.
CompressionResult compression_from_sweep(const PowerSweep& sweep);

}  // namespace impa
