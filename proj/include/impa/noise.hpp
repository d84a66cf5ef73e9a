#pragma once

// Noise and efficiency arithmetic for the amplification chain.

namespace impa {

struct AmplChain {
    double g_p;  // first-stage (parametric) power gain, linear, > 0
    double g_i;  // intermediate/insertion gain factor, linear, > 0
    double g_a;  // post-amplifier gain, linear, > 0
    double t_h;  // hot reference temperature [K], > 0
};

struct EfficiencyEstimate {
    double n_noise;  // added noise photon number, >= 0
    double eta;      // quantum efficiency, 1 / (1 + n_noise)
};

// Equivalent temperature of one photon energy: T_q = h*f / k_B.
double quantum_limit_temperature(double f);

// Y-factor system noise: T_sys = (y - 1) / (g_p * g_i^2 * g_a) * t_h.
double system_noise_temperature(double y, const AmplChain& chain);

// Linear (Rayleigh-Jeans) photon-number conversion n = k_B*T / (h*f), the
// convention under which one photon corresponds exactly to the quantum limit.
double noise_photons_from_temperature(double t_sys, double f);

// eta = 1 / (1 + n_noise).
double efficiency_from_noise(double n_noise);

EfficiencyEstimate efficiency_estimate(double n_noise);

}  // namespace impa
