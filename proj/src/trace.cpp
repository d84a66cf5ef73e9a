#include "impa/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "impa/csv.hpp"
#include "impa/errors.hpp"

namespace impa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view token, std::size_t line) {
    token = trim(token);
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw parse_error("invalid numeric field '" + std::string(token) + "'", line);
    if (!std::isfinite(value)) throw parse_error("non-finite value", line);
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

}  // namespace

MeasuredTrace parse_trace_csv(std::string_view text) {
    MeasuredTrace trace;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '#') {
            if (header_seen)
                throw parse_error("metadata after the header row", line_no);
            std::string_view body = trim(line.substr(1));
            const std::size_t eq = body.find('=');
            if (eq == std::string_view::npos)
                throw parse_error("metadata line must be '# key=value'", line_no);
            trace.meta.emplace_back(std::string(trim(body.substr(0, eq))),
                                    std::string(trim(body.substr(eq + 1))));
            continue;
        }
        if (!header_seen) {
            if (line != "freq_hz,s21_re,s21_im")
                throw parse_error("expected header 'freq_hz,s21_re,s21_im'", line_no);
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw parse_error("expected 3 comma-separated fields, got " +
                                  std::to_string(fields.size()),
                              line_no);
        const double f = parse_field(fields[0], line_no);
        const double re = parse_field(fields[1], line_no);
        const double im = parse_field(fields[2], line_no);
        if (!trace.freq.empty() && f <= trace.freq.back())
            throw parse_error("frequency must be strictly increasing", line_no);
        trace.freq.push_back(f);
        trace.s21.emplace_back(re, im);
    }
    if (!header_seen) throw parse_error("missing header row", line_no);
    if (trace.freq.empty()) throw parse_error("trace has no data rows", line_no);
    return trace;
}

std::string serialize_trace_csv(const MeasuredTrace& trace) {
    std::ostringstream out;
    for (const auto& [key, value] : trace.meta) out << "# " << key << "=" << value << "\n";
    out << "freq_hz,s21_re,s21_im\n";
    for (std::size_t i = 0; i < trace.freq.size(); ++i)
        out << format_g12(trace.freq[i]) << "," << format_g12(trace.s21[i].real()) << ","
            << format_g12(trace.s21[i].imag()) << "\n";
    return out.str();
}

GainProfile measured_gain(const MeasuredTrace& on, const MeasuredTrace& off) {
    if (on.freq.empty() || off.freq.empty())
        throw std::invalid_argument("measured_gain: empty trace");
    const double lo = std::max(on.freq.front(), off.freq.front());
    const double hi = std::min(on.freq.back(), off.freq.back());
    if (!(hi >= lo)) throw std::domain_error("measured_gain: traces do not overlap");

    GainProfile profile;
    profile.pump = {};
    for (std::size_t i = 0; i < on.freq.size(); ++i) {
        const double f = on.freq[i];
        if (f < lo || f > hi) continue;
        // Linear interpolation of the complex off trace at f.
        const auto it = std::lower_bound(off.freq.begin(), off.freq.end(), f);
        complexd off_val;
        if (it == off.freq.begin()) {
            off_val = off.s21.front();
        } else if (it == off.freq.end()) {
            off_val = off.s21.back();
        } else {
            const std::size_t j = static_cast<std::size_t>(it - off.freq.begin());
            const double f1 = off.freq[j - 1];
            const double f2 = off.freq[j];
            const double t = (f - f1) / (f2 - f1);
            off_val = off.s21[j - 1] * (1.0 - t) + off.s21[j] * t;
        }
        if (std::abs(off_val) < 1e-300)
            throw std::domain_error("measured_gain: zero off-trace magnitude at " +
                                    format_g12(f) + " Hz");
        profile.freq.push_back(f);
        profile.signal_gain.push_back(on.s21[i] / off_val);
        profile.idler_gain.push_back(complexd{0.0, 0.0});
    }
    if (profile.freq.empty())
        throw std::domain_error("measured_gain: no on-trace points inside the overlap");
    return profile;
}

PowerSweep parse_power_sweep_csv(std::string_view text) {
    PowerSweep sweep;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "power_dbm,gain_db")
                throw parse_error("expected header 'power_dbm,gain_db'", line_no);
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2)
            throw parse_error("expected 2 comma-separated fields", line_no);
        const double p = parse_field(fields[0], line_no);
        const double g = parse_field(fields[1], line_no);
        if (!sweep.power_dbm.empty() && p <= sweep.power_dbm.back())
            throw parse_error("power must be strictly increasing", line_no);
        sweep.power_dbm.push_back(p);
        sweep.gain_db.push_back(g);
    }
    if (!header_seen) throw parse_error("missing header row", line_no);
    return sweep;
}

CompressionResult compression_from_sweep(const PowerSweep& sweep) {
    const std::size_t n = sweep.power_dbm.size();
    if (n != sweep.gain_db.size())
        throw std::invalid_argument("compression_from_sweep: size mismatch");
    if (n < 5)
        throw std::invalid_argument("compression_from_sweep: need at least 5 points");

    // Low-power plateau: the longest prefix spanning at most 0.2 dB.
    double lo = sweep.gain_db[0];
    double hi = sweep.gain_db[0];
    std::size_t plateau = 1;
    for (std::size_t i = 1; i < n; ++i) {
        const double new_lo = std::min(lo, sweep.gain_db[i]);
        const double new_hi = std::max(hi, sweep.gain_db[i]);
        if (new_hi - new_lo > 0.2) break;
        lo = new_lo;
        hi = new_hi;
        plateau = i + 1;
    }
    if (plateau < 3)
        throw std::domain_error("compression_from_sweep: no low-power plateau");

    double reference = 0.0;
    for (std::size_t i = 0; i < plateau; ++i) reference += sweep.gain_db[i];
    reference /= static_cast<double>(plateau);

    CompressionResult out;
    out.reference_db = reference;
    const double target = reference - 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (sweep.gain_db[i] <= target && sweep.gain_db[i - 1] > target) {
            const double t =
                (sweep.gain_db[i - 1] - target) / (sweep.gain_db[i - 1] - sweep.gain_db[i]);
            out.compressed = true;
            out.p1db_dbm =
                sweep.power_dbm[i - 1] + t * (sweep.power_dbm[i] - sweep.power_dbm[i - 1]);
            return out;
        }
    }
    return out;
}

}  // namespace impa
