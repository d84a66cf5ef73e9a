#include "impa/noise.hpp"

#include <stdexcept>

#include "impa/constants.hpp"

namespace impa {

namespace {

void validate_chain(const AmplChain& chain) {
    if (!(chain.g_p > 0.0) || !(chain.g_i > 0.0) || !(chain.g_a > 0.0))
        throw std::domain_error("amplifier chain: gains must be positive");
    if (!(chain.t_h > 0.0))
        throw std::domain_error("amplifier chain: t_h must be positive");
}

}  // namespace

double quantum_limit_temperature(double f) {
    if (f < 0.0)
        throw std::domain_error("quantum_limit_temperature: negative frequency");
    return constants::planck_h * f / constants::boltzmann_k;
}

double system_noise_temperature(double y, const AmplChain& chain) {
    validate_chain(chain);
    if (y < 1.0) throw std::domain_error("system_noise_temperature: Y factor below 1");
    return (y - 1.0) / (chain.g_p * chain.g_i * chain.g_i * chain.g_a) * chain.t_h;
}

double noise_photons_from_temperature(double t_sys, double f) {
    if (t_sys < 0.0)
        throw std::domain_error("noise_photons_from_temperature: negative temperature");
    if (!(f > 0.0))
        throw std::domain_error("noise_photons_from_temperature: frequency must be positive");
    return constants::boltzmann_k * t_sys / (constants::planck_h * f);
}

double efficiency_from_noise(double n_noise) {
    if (n_noise < 0.0)
        throw std::domain_error("efficiency_from_noise: negative photon number");
    return 1.0 / (1.0 + n_noise);
}

EfficiencyEstimate efficiency_estimate(double n_noise) {
    return {n_noise, efficiency_from_noise(n_noise)};
}

}  // namespace impa
