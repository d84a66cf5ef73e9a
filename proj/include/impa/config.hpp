#pragma once

// Flat key-value device configuration: the operational surface of the CLI.
// Format: `section.key = value [unit]` lines, `#` comments, mandatory unit
// suffixes for dimensioned quantities (hz, ohm, f, h, a, k, dbm). A few keys
// accept the token `auto` and are then derived at build time.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "impa/squid.hpp"

namespace impa {

struct DeviceConfig {
    // squid / device
    double i_c = 0.0;                  // squid.i_c [A], required
    double c_p = 3e-12;                // device.c_p [F]
    std::optional<double> l_stray;     // device.l_stray [H]; auto = calibrate
    double flux_offset = 0.0;          // device.flux_offset [Phi0]

    // transformer chain
    std::string chain_style = "quarter-half";  // chain.style: quarter-half | none
    double z_ref = 50.0;               // chain.z_ref [ohm]
    double z_target = 30.0;            // chain.z_target [ohm]
    std::optional<double> f_design;    // chain.f_design [Hz]; auto = resonance.target

    double resonance_target = 9.4e9;   // resonance.target [Hz]

    // analysis band
    double band_lo = 4e9;              // band.lo [Hz]
    double band_hi = 8e9;              // band.hi [Hz]
    long band_points = 1201;           // band.points

    // flux map grids
    double fluxmap_lo = -0.75;         // fluxmap.lo [Phi0]
    double fluxmap_hi = 0.75;          // fluxmap.hi [Phi0]
    long fluxmap_flux_points = 121;    // fluxmap.flux_points
    long fluxmap_freq_points = 161;    // fluxmap.freq_points

    double operating_flux = 0.0;       // operating.flux [Phi0]

    // pump defaults
    std::optional<double> pump_f;      // pump.f_pump [Hz]; auto = tuned
    double pump_strength_hz = 0.0;     // pump.strength [Hz] (lambda / 2*pi)
    double pump_phase = 0.0;           // pump.phase [rad]

    std::optional<double> kerr_hz;     // kerr.k [Hz] (K / 2*pi); auto = default model

    double tune_target_db = 16.5;      // tune.target_gain [dB]

    // saturation sweep
    double saturate_p_lo = -150.0;     // saturate.p_lo [dBm]
    double saturate_p_hi = -60.0;      // saturate.p_hi [dBm]
    double saturate_step = 0.25;       // saturate.step [dB]
    std::optional<double> saturate_f_s;  // saturate.f_s [Hz]; auto = gain peak

    // amplification chain noise
    double noise_y = 3.0;              // noise.y
    double noise_g_p = 100.0;          // noise.g_p
    double noise_g_i = 1.0;            // noise.g_i
    double noise_g_a = 1.0;            // noise.g_a
    double noise_t_h = 4.0;            // noise.t_h [K]
    std::optional<double> noise_f;     // noise.f [Hz]; auto = resonance.target

    // dispersive readout
    double readout_f_q = 5.2e9;        // readout.f_q [Hz]
    double readout_f_r = 6.5e9;        // readout.f_r [Hz]
    double readout_chi = 1e6;          // readout.chi [Hz]
    double readout_g = 50e6;           // readout.g [Hz]
    double readout_kappa_r = 2e6;      // readout.kappa_r [Hz]
    std::optional<double> readout_separation;  // readout.separation; auto = calibrated
    double readout_target_snr = 14.56; // readout.target_snr
    double readout_eta = 0.2646;       // readout.eta
    long readout_shots = 100000;       // readout.shots

    std::uint64_t seed = 12345;        // seed

    bool operator==(const DeviceConfig&) const = default;
};

// Parses and fully validates; unknown keys, missing units, bad units and
// out-of-range values raise parse_error naming the key and line.
DeviceConfig parse_config(std::string_view text);

// Canonical serialization; parse(serialize(c)) == c exactly.
std::string serialize_config(const DeviceConfig& config);

// Builds the device. Calibrates l_stray to resonance.target when set to auto.
DeviceModel to_device(const DeviceConfig& config);

}  // namespace impa
