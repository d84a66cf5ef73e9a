#pragma once

// Pump-on behavior: small-signal parametric gain from the linearized
// signal/idler input-output system, N-dB bandwidth extraction, Kerr
// saturation and pump-setting optimization.

#include <complex>
#include <span>
#include <vector>

#include "impa/squid.hpp"

namespace impa {

struct PumpSettings {
    double f_pump = 0.0;   // [Hz]
    double strength = 0.0; // effective parametric drive lambda [rad/s], >= 0
    double phase = 0.0;    // pump phase [rad]
};

struct GainProfile {
    std::vector<double> freq;                  // [Hz]
    std::vector<complexd> signal_gain;
    std::vector<complexd> idler_gain;
    PumpSettings pump;

    std::vector<double> gain_db() const;       // 20*log10|signal_gain|
};

struct KerrModel {
    double kerr_per_photon;  // self-Kerr K [rad/s per photon], < 0
    double photon_energy;    // h*f at the operating point [J]
};

// Resolved single-mode picture of the biased device: loaded resonance and
// total branch inductance at the given flux.
struct OperatingPoint {
    double f0;     // loaded resonance [Hz]
    double l_tot;  // [H]
};

OperatingPoint operating_point(const DeviceModel& device, FluxBias flux);

// Signal/idler mode coefficients at one frequency: decay rate kappa and
// detuning delta [rad/s], both frequency dependent through the environment.
struct ModeCoefficients {
    double kappa;
    double delta;
};

ModeCoefficients mode_coefficients(const DeviceModel& device, const OperatingPoint& op,
                                   double f);

// Single-mode decay rate mapped from the environment per the parallel-RLC
// picture at the resonance: kappa(f) = Re[Z_env(f)] / L_tot. Throws
// unphysical_environment_error when Re[Z_env] <= 0.
double coupling_rate(const DeviceModel& device, double f, FluxBias flux);

// Parametric oscillation threshold of the degenerate point f_pump/2 [rad/s].
double oscillation_threshold(const DeviceModel& device, FluxBias flux, double f_pump);

// Reflection signal and idler gains over freq_grid for the given pump.
// Throws threshold_error at or above the oscillation threshold.
GainProfile small_signal_gain(const DeviceModel& device, FluxBias flux,
                              const PumpSettings& pump,
                              std::span<const double> freq_grid);

// Total measure of frequencies with gain >= threshold_db, with linear
// interpolation at the crossings.
double bandwidth_above(const GainProfile& profile, double threshold_db);
double bandwidth_above(std::span<const double> freq, std::span<const double> gain_db,
                       double threshold_db);

// Default self-Kerr coefficient: K = -(e^2 / (2*hbar*c_p)) * p^3 with
// participation p = L_J / (L_J + l_stray); photon energy h*f_op.
KerrModel default_kerr(const DeviceModel& device, FluxBias flux, double f_op);

struct DuffingResult {
    double photons;       // intracavity photon number (stable branch)
    complexd amplitude;   // response amplitude at the shifted detuning
    bool bistable;        // three positive real roots at this drive
};

// Classical cubic steady state of the Kerr-shifted resonator at signal
// frequency f_s under the given pump; detunings are replaced by
// delta + K*n and the smallest positive root is returned (the low-amplitude
// branch an upward power sweep follows).
DuffingResult duffing_steady_state(const DeviceModel& device, FluxBias flux,
                                   const PumpSettings& pump, const KerrModel& kerr,
                                   double drive_power_dbm, double f_s);

struct SaturationResult {
    bool compressed = false;
    double p1db_dbm = 0.0;        // valid when compressed
    double small_signal_db = 0.0;
};

// Gain at one input power: the Kerr shift from the steady-state photon
// number detunes both sidebands before the gain is re-evaluated.
double gain_db_at_power(const DeviceModel& device, FluxBias flux,
                        const PumpSettings& pump, const KerrModel& kerr, double f_s,
                        double power_dbm);

// Input power where the gain first drops 1 dB below its small-signal value,
// swept upward from -150 dBm in 0.25 dB steps with linear interpolation.
// Returns compressed = false when no compression occurs below -60 dBm.
SaturationResult saturation_power(const DeviceModel& device, FluxBias flux,
                                  const PumpSettings& pump, const KerrModel& kerr,
                                  double f_s);

struct TuneObjective {
    double target_gain_db;
    FrequencyBand band;
};

struct TuneResult {
    PumpSettings settings;
    double bandwidth_hz = 0.0;  // measure with gain >= target
    double peak_gain_db = 0.0;
    bool reached = false;       // peak >= target at the returned settings
};

// Deterministic coordinate descent over (f_pump, strength) maximizing
// bandwidth_above(target_gain_db) on the objective band. The strength line
// search runs nested inside the pump-frequency search so that each candidate
// pump frequency is judged at its own best strength.
TuneResult tune_pump(const DeviceModel& device, FluxBias flux,
                     const TuneObjective& objective);

}  // namespace impa
