#pragma once

// Flux-tunable SQUID inductance and pump-off device response: impedance,
// reflection, resonance extraction, stray-inductance calibration, flux maps
// and flux-modulation fitting.

#include <span>
#include <vector>

#include "impa/network.hpp"

namespace impa {

struct SquidParams {
    double i_c_total;  // total critical current [A], > 0
};

// External flux bias in units of the flux quantum. The physics is periodic
// with period 1 and even around integer multiples.
struct FluxBias {
    double phi = 0.0;
};

// Full electrical description of the amplifier: SQUID in series with a stray
// inductance, shunted by c_p, embedded in the transformer chain.
struct DeviceModel {
    SquidParams squid;
    double c_p = 3e-12;     // shunt capacitance [F]
    double l_stray = 0.0;   // series stray inductance [H]
    TransformerChain chain;
    double flux_offset = 0.0;  // bias of maximal resonance [Phi0]
};

struct FrequencyBand {
    double lo;
    double hi;
};

struct PhaseMap {
    std::vector<double> flux_grid;
    std::vector<double> freq_grid;
    // phase[i][j]: unwrapped reflection phase at flux_grid[i], freq_grid[j].
    std::vector<std::vector<double>> phase;
};

struct FluxFitResult {
    double i_c_est;          // [A]
    double flux_offset_est;  // same units as the flux samples
    double period_est;       // same units as the flux samples
    double f_max_est;        // model resonance at the offset [Hz]
    double residual_norm;
    int iterations;
};

// L_J = Phi0 / (2*pi * I_c * |cos(pi*phi)|). Throws divergence_error within
// 1e-9 of a half-integer flux.
double josephson_inductance(const SquidParams& squid, FluxBias flux);

// Total inductive branch l_stray + L_J.
double total_inductance(const DeviceModel& device, FluxBias flux);

// Parallel-LC impedance of the JPA node: j*w*L_tot / (1 - w^2*L_tot*c_p).
complexd jpa_impedance(const DeviceModel& device, double f, FluxBias flux);

// Reflection of the device seen from the external port, referenced to z_ref.
complexd pump_off_reflection(const DeviceModel& device, double f, FluxBias flux);

// Total susceptance at the JPA node: the device branch plus the environment.
// Its upward zero crossing defines the loaded resonance.
double node_susceptance(const DeviceModel& device, double f, FluxBias flux);

// Loaded resonance in the search band, found by bisection to 1 kHz. Throws
// no_resonance_error when no susceptance zero lies in the band.
double resonant_frequency(const DeviceModel& device, FluxBias flux,
                          FrequencyBand search = {4e9, 12e9});

// Fast variant for solvers: brackets the resonance around the bare-LC
// estimate instead of scanning a fixed band.
double resonant_frequency_near(const DeviceModel& device, FluxBias flux);

// Returns l_stray >= 0 such that the resonance at flux_offset equals
// f_max_target within 1 MHz (bisection on l_stray). Throws infeasible_error
// when the target is above the bare (l_stray = 0) resonance.
double calibrate_stray(const DeviceModel& device, double f_max_target);

// Unwrapped pump-off reflection phase over a flux and frequency grid.
PhaseMap phase_map(const DeviceModel& device, std::span<const double> flux_grid,
                   std::span<const double> freq_grid);

// Least-squares fit of the loaded-resonance flux modulation. The device
// supplies c_p, l_stray and the chain; i_c, flux offset and period are free.
FluxFitResult fit_flux_modulation(const DeviceModel& device,
                                  std::span<const double> flux,
                                  std::span<const double> f_res);

// Model curve used by fit_flux_modulation, exposed for tests.
double flux_modulation_model(const DeviceModel& device, double flux, double i_c,
                             double flux_offset, double period);

// Jacobian of the flux-modulation residuals by central differences; exposed
// so tests can compare it against an independent implementation.
std::vector<std::vector<double>> flux_modulation_jacobian(
    const DeviceModel& device, std::span<const double> flux,
    const std::vector<double>& params);

}  // namespace impa
