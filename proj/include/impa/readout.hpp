#pragma once

// Dispersive-readout simulation and analysis: pulled resonator frequencies,
// I/Q cloud generation under a given quantum efficiency, SNR and visibility
// estimation, coherence fits and tomography-repetition stability scaling.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace impa {

struct DispersiveModel {
    double f_q;         // qubit frequency [Hz]
    double f_r;         // bare resonator frequency [Hz]
    double chi;         // dispersive shift [Hz], >= 0
    double g_coupling;  // qubit-resonator coupling [Hz], >= 0
    double kappa_r;     // readout resonator linewidth [Hz], >= 0
    double separation;  // pointer-state separation |a0 - a1| [vacuum units]
    long shots;         // samples per state, >= 2

    void validate() const;  // dispersive guard |f_q - f_r| >= 10*g_coupling
};

struct IQCloudSet {
    std::vector<std::array<double, 2>> samples0;
    std::vector<std::array<double, 2>> samples1;
    std::array<double, 2> mean0{};
    std::array<double, 2> mean1{};
    std::array<double, 2> covariance0{};  // per-quadrature variances (I, Q)
    std::array<double, 2> covariance1{};
    std::array<double, 2> projection_axis{};
    bool axis_defined = false;

    void recompute_statistics();
};

struct CoherenceFit {
    double time_constant;  // T1 or T2 [s]
    double amplitude;
    double offset;
    double frequency;      // Ramsey only [Hz]
    double phase;          // Ramsey only [rad]
    double residual_norm;
    bool oscillation_fallback = false;  // Ramsey fell back to exponential
};

// Resonator frequencies pulled by the qubit state: (f_r - chi, f_r + chi).
std::pair<double, double> pulled_frequencies(const DispersiveModel& model);

// Draws `shots` samples per state from circular Gaussians of per-quadrature
// variance 1/2; the means are separated by sqrt(eta)*separation along I.
// Reproducible for a given (model, eta, seed).
IQCloudSet simulate_clouds(const DispersiveModel& model, double eta, std::uint64_t seed);

// Separation over RMS-averaged standard deviation along the projection axis.
double snr(const IQCloudSet& clouds);

// Best single-threshold state assignment: max_t [P(ok|0) + P(ok|1) - 1],
// computed from the empirical CDFs of the projected samples.
double visibility(const IQCloudSet& clouds);

// Closed-form separation whose expected SNR equals target at efficiency eta.
double calibrate_separation(double target_snr, double eta);

// Least-squares A*exp(-t/T1) + B.
CoherenceFit fit_exponential(std::span<const double> times, std::span<const double> values);

// Least-squares A*exp(-t/T2)*cos(2*pi*f*t + phi) + B with the frequency
// seeded from a periodogram; falls back to fit_exponential (flagged) when no
// oscillation is detected.
CoherenceFit fit_ramsey(std::span<const double> times, std::span<const double> values);

// std/mean over batch estimates of a fixed pointer amplitude measured with
// shots_per_batch samples per batch at efficiency eta. Batch substreams
// derive from (seed, batch index).
double qst_cv(double eta, long shots_per_batch, int batches, std::uint64_t seed);

// std/mean of a sample; used by qst_cv and exposed for tests.
double coefficient_of_variation(std::span<const double> values);

// Seeded standard normal generator (mt19937_64 + Box-Muller); exposed so
// tests can reproduce the sampling exactly.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed);
    double operator()();

    // Decorrelated substream for (seed, index), for per-batch sampling.
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace impa
