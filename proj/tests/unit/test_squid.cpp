#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "impa/constants.hpp"
#include "impa/errors.hpp"
#include "impa/squid.hpp"

using namespace impa;
namespace cn = impa::constants;

namespace {

DeviceModel base_device(bool with_chain = true) {
    DeviceModel device;
    device.squid.i_c_total = 11.1e-6;
    device.c_p = 3e-12;
    device.l_stray = 0.0;
    device.flux_offset = 0.0;
    device.chain.z_ref = 50.0;
    if (with_chain) {
        device.chain.sections = {quarter_wave(std::sqrt(50.0 * 30.0), 9.4e9),
                                 half_wave(30.0, 9.4e9)};
    }
    return device;
}

// Calibrated to a 9.4 GHz maximum; shared across the test cases below.
const DeviceModel& calibrated_device() {
    static const DeviceModel device = [] {
        DeviceModel d = base_device();
        d.l_stray = calibrate_stray(d, 9.4e9);
        return d;
    }();
    return device;
}

}  // namespace

TEST_CASE("josephson inductance values and symmetry") {
    const SquidParams squid{11.1e-6};

    // Oracle: direct evaluation of Phi0 / (2*pi*I_c).
    const double l0 = cn::flux_quantum / (2.0 * cn::pi * 11.1e-6);
    CHECK(josephson_inductance(squid, {0.0}) == doctest::Approx(l0).epsilon(1e-15));
    CHECK(l0 == doctest::Approx(29.65e-12).epsilon(1e-4));

    // cos(pi/4) = 1/sqrt(2) exactly doubles the inductance squared.
    CHECK(josephson_inductance(squid, {0.25}) ==
          doctest::Approx(l0 * std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(josephson_inductance(squid, {0.5}), divergence_error);
    CHECK_THROWS_AS(josephson_inductance(squid, {1.5}), divergence_error);

    // Periodicity and evenness at randomized fluxes.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> phi(-0.49, 0.49);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = phi(rng);
        const double l = josephson_inductance(squid, {p});
        CHECK(josephson_inductance(squid, {p + 1.0}) == doctest::Approx(l).epsilon(1e-9));
        CHECK(josephson_inductance(squid, {-p}) == doctest::Approx(l).epsilon(1e-12));
    }
}

TEST_CASE("jpa impedance against direct evaluation") {
    // Device with L_tot exactly 29.65 pH (no stray part).
    DeviceModel device = base_device(false);
    const double l_tot = 29.65e-12;
    device.squid.i_c_total = cn::flux_quantum / (2.0 * cn::pi * l_tot);

    SUBCASE("low-frequency limit is inductive") {
        const double f = 1e6;
        const complexd z = jpa_impedance(device, f, {0.0});
        const double wl = 2.0 * cn::pi * f * l_tot;
        CHECK(z.imag() == doctest::Approx(wl).epsilon(1e-6));
        CHECK(z.real() == 0.0);
    }

    SUBCASE("5 GHz point") {
        const double f = 5e9;
        const double w = 2.0 * cn::pi * f;
        const double oracle = w * l_tot / (1.0 - w * w * l_tot * 3e-12);
        const complexd z = jpa_impedance(device, f, {0.0});
        CHECK(z.imag() == doctest::Approx(oracle).epsilon(1e-15));
        CHECK(z.imag() == doctest::Approx(1.0212).epsilon(1e-4));
    }

    SUBCASE("pole at the LC antiresonance") {
        const double f_pole = 1.0 / (2.0 * cn::pi * std::sqrt(l_tot * 3e-12));
        CHECK_THROWS_AS(jpa_impedance(device, f_pole, {0.0}), pole_error);
    }
}

TEST_CASE("pump-off reflection is unimodular and winds across resonance") {
    const DeviceModel& device = calibrated_device();

    // |Gamma| = 1 on a 1000-point grid spanning 4-12 GHz.
    for (int i = 0; i < 1000; ++i) {
        const double f = 4e9 + 8e9 * i / 999.0;
        CHECK(std::abs(std::abs(pump_off_reflection(device, f, {0.0})) - 1.0) < 1e-9);
    }

    // Unwrapped phase drops by at least a full wrap across the resonance
    // (plus the slow line background, bounded below two wraps).
    const std::vector<double> flux_one{0.0};
    std::vector<double> freqs(4001);
    for (std::size_t i = 0; i < freqs.size(); ++i)
        freqs[i] = 7.0e9 + (11.8e9 - 7.0e9) * static_cast<double>(i) / (freqs.size() - 1);
    const PhaseMap map = phase_map(device, flux_one, freqs);
    const double traversal = map.phase[0].front() - map.phase[0].back();
    CHECK(traversal > 2.0 * cn::pi);
    CHECK(traversal < 4.0 * cn::pi);

    // Far below resonance the phase varies much more slowly than on it.
    auto slope = [&](double f) {
        const double df = 1e6;
        const double p1 = std::arg(pump_off_reflection(device, f - df, {0.0}));
        const double p2 = std::arg(pump_off_reflection(device, f + df, {0.0}));
        double d = p2 - p1;
        while (d > cn::pi) d -= 2.0 * cn::pi;
        while (d < -cn::pi) d += 2.0 * cn::pi;
        return std::abs(d) / (2.0 * df);
    };
    CHECK(slope(9.4e9) > 5.0 * slope(5.0e9));
}

TEST_CASE("resonant frequency: calibration, periodicity, monotonicity") {
    const DeviceModel& device = calibrated_device();

    const double f0 = resonant_frequency(device, {0.0});
    CHECK(std::abs(f0 - 9.4e9) < 1e6);

    // Periodicity in flux within solver tolerance.
    const double f_shift = resonant_frequency(device, {1.0});
    CHECK(std::abs(f_shift - f0) < 1e4);

    // Strictly decreasing away from the offset on (0, 0.5).
    double prev = f0 + 1.0;
    for (double phi = 0.02; phi < 0.46; phi += 0.02) {
        const double fr = resonant_frequency(device, {phi});
        CHECK(fr < prev);
        prev = fr;
    }

    // Far enough toward half flux the resonance leaves the band.
    CHECK_THROWS_AS(resonant_frequency(device, {0.499}, {4e9, 12e9}), no_resonance_error);
}

TEST_CASE("calibrate_stray matches the bare-LC inversion") {
    DeviceModel bare = base_device(false);

    const double w = 2.0 * cn::pi * 9.4e9;
    const double l_tot_oracle = 1.0 / (w * w * bare.c_p);
    const double l_j = cn::flux_quantum / (2.0 * cn::pi * 11.1e-6);
    const double oracle = l_tot_oracle - l_j;  // 65.9 pH

    const double l_bare = calibrate_stray(bare, 9.4e9);
    CHECK(l_bare == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(oracle == doctest::Approx(65.9e-12).epsilon(1e-3));

    // Round trip within 1 MHz.
    bare.l_stray = l_bare;
    CHECK(std::abs(resonant_frequency_near(bare, {0.0}) - 9.4e9) < 1e6);

    // Target at the bare resonance needs no stray inductance.
    DeviceModel fresh = base_device(false);
    const double f_bare = resonant_frequency_near(fresh, {0.0});
    CHECK(calibrate_stray(fresh, f_bare) == 0.0);

    // Target above the bare resonance is infeasible.
    CHECK_THROWS_AS(calibrate_stray(fresh, 2.0 * f_bare), infeasible_error);

    // The full chain is susceptance-neutral at its design frequency, so the
    // calibrated value agrees with the bare inversion.
    DeviceModel chained = base_device(true);
    const double l_chained = calibrate_stray(chained, 9.4e9);
    CHECK(l_chained == doctest::Approx(l_bare).epsilon(1e-9));
}

TEST_CASE("resonance is invariant under flux reflection about the offset") {
    DeviceModel device = calibrated_device();
    device.flux_offset = 0.11;

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> phi(-0.30, 0.30);
    for (int trial = 0; trial < 25; ++trial) {
        const double p = device.flux_offset + phi(rng);
        const double mirrored = 2.0 * device.flux_offset - p;
        const double f1 = resonant_frequency(device, {p});
        const double f2 = resonant_frequency(device, {mirrored});
        CHECK(std::abs(f1 - f2) < 1e4);
    }
}

TEST_CASE("phase map basics") {
    const DeviceModel& device = calibrated_device();

    SUBCASE("single point equals the reflection phase") {
        const std::vector<double> one_flux{0.1};
        const std::vector<double> one_freq{8.8e9};
        const PhaseMap map = phase_map(device, one_flux, one_freq);
        REQUIRE(map.phase.size() == 1);
        REQUIRE(map.phase[0].size() == 1);
        CHECK(map.phase[0][0] ==
              doctest::Approx(std::arg(pump_off_reflection(device, 8.8e9, {0.1}))));
    }

    SUBCASE("periodicity and even symmetry") {
        std::vector<double> flux{-0.2, -0.1, 0.0, 0.1, 0.2};
        std::vector<double> flux_shift{0.8, 0.9, 1.0, 1.1, 1.2};
        std::vector<double> flux_mirror{0.2, 0.1, 0.0, -0.1, -0.2};
        std::vector<double> freqs(101);
        for (std::size_t i = 0; i < freqs.size(); ++i)
            freqs[i] = 8.0e9 + 2.6e9 * static_cast<double>(i) / (freqs.size() - 1);

        const PhaseMap a = phase_map(device, flux, freqs);
        const PhaseMap b = phase_map(device, flux_shift, freqs);
        const PhaseMap c = phase_map(device, flux_mirror, freqs);
        for (std::size_t i = 0; i < flux.size(); ++i) {
            for (std::size_t j = 0; j < freqs.size(); ++j) {
                CHECK(std::abs(a.phase[i][j] - b.phase[i][j]) < 1e-9);
                CHECK(std::abs(a.phase[i][j] - c.phase[i][j]) < 1e-9);
            }
        }
    }

    SUBCASE("empty grids are rejected") {
        std::vector<double> empty;
        std::vector<double> one{9e9};
        CHECK_THROWS_AS(phase_map(device, empty, one), std::invalid_argument);
    }
}

TEST_CASE("flux modulation fit: noiseless round trip") {
    const DeviceModel& device = calibrated_device();

    std::vector<double> flux;
    std::vector<double> fres;
    for (double p = -0.42; p <= 0.4201; p += 0.06) {
        flux.push_back(p);
        fres.push_back(flux_modulation_model(device, p, 11.1e-6, 0.0, 1.0));
    }
    REQUIRE(flux.size() >= 8);

    const FluxFitResult fit = fit_flux_modulation(device, flux, fres);
    CHECK(std::abs(fit.i_c_est - 11.1e-6) < 0.001 * 11.1e-6);
    CHECK(std::abs(fit.flux_offset_est) < 1e-4);
    CHECK(std::abs(fit.period_est - 1.0) < 1e-3);
    CHECK(std::abs(fit.f_max_est - 9.4e9) < 2e6);

    // Shifting the data by one period moves only the offset, by exactly 1.
    std::vector<double> flux_shifted(flux);
    for (double& p : flux_shifted) p += 1.0;
    const FluxFitResult fit2 = fit_flux_modulation(device, flux_shifted, fres);
    CHECK(std::abs(fit2.i_c_est - fit.i_c_est) < 1e-3 * fit.i_c_est);
    CHECK(std::abs(fit2.flux_offset_est - (fit.flux_offset_est + 1.0)) < 1e-3);
}

TEST_CASE("flux modulation fit: 1 percent noise Monte Carlo") {
    const DeviceModel& device = calibrated_device();

    std::vector<double> flux;
    std::vector<double> clean;
    for (double p = -0.42; p <= 0.4201; p += 0.053) {
        flux.push_back(p);
        clean.push_back(flux_modulation_model(device, p, 11.1e-6, 0.0, 1.0));
    }
    const auto [lo, hi] = std::minmax_element(clean.begin(), clean.end());
    const double sigma = 0.01 * (*hi - *lo);

    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::normal_distribution<double> noise(0.0, sigma);
        std::vector<double> noisy(clean);
        for (double& v : noisy) v += noise(rng);
        const FluxFitResult fit = fit_flux_modulation(device, flux, noisy);
        CHECK(std::abs(fit.i_c_est - 11.1e-6) < 0.02 * 11.1e-6);
        CHECK(std::abs(fit.period_est - 1.0) < 0.02);
    }
}

TEST_CASE("flux modulation fit rejects degenerate data") {
    const DeviceModel& device = calibrated_device();
    std::vector<double> flux{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35};
    std::vector<double> constant(flux.size(), 9.0e9);
    CHECK_THROWS_AS(fit_flux_modulation(device, flux, constant), fit_error);

    std::vector<double> short_flux{0.0, 0.1};
    std::vector<double> short_vals{9.0e9, 8.9e9};
    CHECK_THROWS_AS(fit_flux_modulation(device, short_flux, short_vals),
                    std::invalid_argument);
}

TEST_CASE("flux modulation jacobian matches independent central differences") {
    const DeviceModel& device = calibrated_device();
    std::vector<double> flux;
    for (double p = -0.3; p <= 0.301; p += 0.06) flux.push_back(p);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    for (int trial = 0; trial < 3; ++trial) {
        const std::vector<double> params{11.1e-6 * jitter(rng), 0.02 * (jitter(rng) - 1.0),
                                         1.0 * jitter(rng)};
        const auto jac = flux_modulation_jacobian(device, flux, params);

        // Independent central differences with a different step.
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 3e-6 * std::abs(params[j]) + 3e-9;
            std::vector<double> pp(params), pm(params);
            pp[j] += h;
            pm[j] -= h;
            double col_scale = 0.0;
            std::vector<double> ref(flux.size());
            for (std::size_t i = 0; i < flux.size(); ++i) {
                const double fp =
                    flux_modulation_model(device, flux[i], pp[0], pp[1], pp[2]);
                const double fm =
                    flux_modulation_model(device, flux[i], pm[0], pm[1], pm[2]);
                ref[i] = (fp - fm) / (2.0 * h);
                col_scale = std::max(col_scale, std::abs(ref[i]));
            }
            for (std::size_t i = 0; i < flux.size(); ++i)
                CHECK(std::abs(jac[i][j] - ref[i]) <= 1e-6 * col_scale);
        }
    }
}
