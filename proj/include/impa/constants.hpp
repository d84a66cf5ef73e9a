#pragma once

// Physical constants (CODATA 2018, exact SI values where defined).

namespace impa::constants {

inline constexpr double pi = 3.14159265358979323846;

// Magnetic flux quantum h/2e [Wb].
inline constexpr double flux_quantum = 2.067833848e-15;

// Planck constant [J s] and reduced Planck constant [J s].
inline constexpr double planck_h = 6.62607015e-34;
inline constexpr double hbar = 1.054571817e-34;

// Boltzmann constant [J/K].
inline constexpr double boltzmann_k = 1.380649e-23;

// Elementary charge [C].
inline constexpr double elementary_charge = 1.602176634e-19;

}  // namespace impa::constants
