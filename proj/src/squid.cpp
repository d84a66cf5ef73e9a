#include "impa/squid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "impa/constants.hpp"
#include "impa/errors.hpp"
#include "impa/fitting.hpp"

namespace impa {

namespace {

constexpr double kCosGuard = 1e-9;       // |cos| below this is a suppressed SQUID
constexpr double kFreqTol = 1e3;         // resonance bisection tolerance [Hz]
constexpr double kCalibTol = 1e6;        // calibration acceptance [Hz]

double cos_modulation(double phi) {
    return std::abs(std::cos(constants::pi * phi));
}

// Bare parallel-LC estimate used to seed bracketing solvers.
double lc_estimate(double l_tot, double c_p) {
    return 1.0 / (2.0 * constants::pi * std::sqrt(l_tot * c_p));
}

double bisect_susceptance(const DeviceModel& device, FluxBias flux, double lo,
                          double hi, double b_lo, double tol) {
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double b = node_susceptance(device, mid, flux);
        if ((b <= 0.0) == (b_lo <= 0.0)) {
            lo = mid;
            b_lo = b;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double josephson_inductance(const SquidParams& squid, FluxBias flux) {
    if (!(squid.i_c_total > 0.0))
        throw std::invalid_argument("josephson_inductance: i_c_total must be positive");
    const double c = cos_modulation(flux.phi);
    if (c <= kCosGuard)
        throw divergence_error("josephson_inductance: critical current fully suppressed");
    return constants::flux_quantum / (2.0 * constants::pi * squid.i_c_total * c);
}

double total_inductance(const DeviceModel& device, FluxBias flux) {
    return device.l_stray + josephson_inductance(device.squid, flux);
}

complexd jpa_impedance(const DeviceModel& device, double f, FluxBias flux) {
    if (!(f > 0.0)) throw std::domain_error("jpa_impedance: frequency must be positive");
    const double l_tot = total_inductance(device, flux);
    const double w = 2.0 * constants::pi * f;
    const double den = 1.0 - w * w * l_tot * device.c_p;
    if (std::abs(den) < 1e-12)
        throw pole_error("jpa_impedance: evaluated at the LC antiresonance");
    return complexd{0.0, w * l_tot / den};
}

complexd pump_off_reflection(const DeviceModel& device, double f, FluxBias flux) {
    const complexd z_jpa = jpa_impedance(device, f, flux);
    const complexd z_in = port_impedance(device.chain, z_jpa, f);
    return reflection(z_in, device.chain.z_ref);
}

double node_susceptance(const DeviceModel& device, double f, FluxBias flux) {
    const double l_tot = total_inductance(device, flux);
    const double w = 2.0 * constants::pi * f;
    double b_env = 0.0;
    if (!device.chain.sections.empty()) {
        b_env = (1.0 / environment_impedance(device.chain, f)).imag();
    }
    return w * device.c_p - 1.0 / (w * l_tot) + b_env;
}

double resonant_frequency(const DeviceModel& device, FluxBias flux, FrequencyBand search) {
    if (!(search.lo > 0.0) || !(search.hi > search.lo))
        throw std::invalid_argument("resonant_frequency: bad search band");
    constexpr int kScanPoints = 2048;
    const double step = (search.hi - search.lo) / kScanPoints;

    const double f_est = lc_estimate(total_inductance(device, flux), device.c_p);

    double best = std::numeric_limits<double>::quiet_NaN();
    double best_dist = std::numeric_limits<double>::infinity();
    double prev_f = search.lo;
    double prev_b = node_susceptance(device, prev_f, flux);
    for (int i = 1; i <= kScanPoints; ++i) {
        const double fi = search.lo + i * step;
        const double bi = node_susceptance(device, fi, flux);
        if (prev_b <= 0.0 && bi > 0.0) {  // upward crossing
            const double froot =
                bisect_susceptance(device, flux, prev_f, fi, prev_b, kFreqTol);
            const double dist = std::abs(froot - f_est);
            if (dist < best_dist) {
                best_dist = dist;
                best = froot;
            }
        }
        prev_f = fi;
        prev_b = bi;
    }
    if (!(best > 0.0))
        throw no_resonance_error("resonant_frequency: no susceptance zero in band");
    return best;
}

double resonant_frequency_near(const DeviceModel& device, FluxBias flux) {
    const double f_est = lc_estimate(total_inductance(device, flux), device.c_p);
    // Expand a bracket around the bare-LC estimate until the susceptance
    // changes sign. The loaded resonance stays within a factor of the
    // estimate for any physical chain.
    double width = 0.02;
    for (; width <= 0.97; width *= 1.6) {
        const double lo = f_est * (1.0 - width);
        const double hi = f_est * (1.0 + width);
        const double b_lo = node_susceptance(device, lo, flux);
        const double b_hi = node_susceptance(device, hi, flux);
        if (b_lo <= 0.0 && b_hi > 0.0)  // near machine precision: solvers and
            return bisect_susceptance(device, flux, lo, hi, b_lo,
                                      f_est * 1e-14);  // fits differentiate through this
    }
    throw no_resonance_error("resonant_frequency_near: no bracket around the LC estimate");
}

double calibrate_stray(const DeviceModel& device, double f_max_target) {
    if (!(f_max_target > 0.0))
        throw std::invalid_argument("calibrate_stray: target must be positive");
    const FluxBias at_offset{device.flux_offset};

    DeviceModel trial = device;
    trial.l_stray = 0.0;
    const double f_bare = resonant_frequency_near(trial, at_offset);
    if (f_max_target > f_bare + kCalibTol)
        throw infeasible_error("calibrate_stray: target above the bare resonance");
    if (std::abs(f_max_target - f_bare) <= kFreqTol) return 0.0;

    auto f_of = [&](double l_stray) {
        trial.l_stray = l_stray;
        return resonant_frequency_near(trial, at_offset);
    };

    double lo = 0.0;
    double hi = 1e-12;
    while (f_of(hi) > f_max_target) {
        hi *= 2.0;
        if (hi > 1e-4)
            throw infeasible_error("calibrate_stray: target unreachable");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f_of(mid);
        if (std::abs(fm - f_max_target) < 0.5 * kFreqTol) return mid;
        if (fm > f_max_target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-20) break;
    }
    return 0.5 * (lo + hi);
}

PhaseMap phase_map(const DeviceModel& device, std::span<const double> flux_grid,
                   std::span<const double> freq_grid) {
    if (flux_grid.empty() || freq_grid.empty())
        throw std::invalid_argument("phase_map: empty grid");
    PhaseMap map;
    map.flux_grid.assign(flux_grid.begin(), flux_grid.end());
    map.freq_grid.assign(freq_grid.begin(), freq_grid.end());
    map.phase.resize(flux_grid.size());
    for (std::size_t i = 0; i < flux_grid.size(); ++i) {
        auto& row = map.phase[i];
        row.resize(freq_grid.size());
        double offset = 0.0;
        double prev = 0.0;
        for (std::size_t j = 0; j < freq_grid.size(); ++j) {
            const complexd g =
                pump_off_reflection(device, freq_grid[j], FluxBias{flux_grid[i]});
            double ph = std::arg(g);
            if (j > 0) {  // unwrap along frequency with a pi jump threshold
                while (ph + offset - prev > constants::pi) offset -= 2.0 * constants::pi;
                while (ph + offset - prev < -constants::pi) offset += 2.0 * constants::pi;
            }
            row[j] = ph + offset;
            prev = row[j];
        }
    }
    return map;
}

double flux_modulation_model(const DeviceModel& device, double flux, double i_c,
                             double flux_offset, double period) {
    const double phi = (flux - flux_offset) / period;
    // Clamp the modulation away from the divergence so the fitter sees a
    // finite, smooth surface near half-integer flux.
    const double c = std::max(cos_modulation(phi), 1e-6);
    DeviceModel eval = device;
    eval.squid.i_c_total = i_c * c;  // same L_J evaluated at zero flux
    return resonant_frequency_near(eval, FluxBias{0.0});
}

namespace {

// Residuals of the flux-modulation model against the samples, used by both
// the fit and the exposed Jacobian.
struct FluxResiduals {
    const DeviceModel& device;
    std::span<const double> flux;
    std::span<const double> f_res;

    void operator()(const std::vector<double>& p, std::vector<double>& r) const {
        for (std::size_t k = 0; k < flux.size(); ++k) {
            double model;
            if (p[0] <= 0.0 || p[2] <= 0.0) {
                model = 0.0;  // out-of-domain parameters: large residual
            } else {
                model = flux_modulation_model(device, flux[k], p[0], p[1], p[2]);
            }
            r[k] = model - (f_res.empty() ? 0.0 : f_res[k]);
        }
    }
};

}  // namespace

std::vector<std::vector<double>> flux_modulation_jacobian(
    const DeviceModel& device, std::span<const double> flux,
    const std::vector<double>& params) {
    FluxResiduals res{device, flux, {}};
    std::vector<std::vector<double>> jac;
    fd_jacobian([&](const std::vector<double>& p, std::vector<double>& r) { res(p, r); },
                params, flux.size(), jac);
    return jac;
}

FluxFitResult fit_flux_modulation(const DeviceModel& device,
                                  std::span<const double> flux,
                                  std::span<const double> f_res) {
    if (flux.size() != f_res.size())
        throw std::invalid_argument("fit_flux_modulation: size mismatch");
    if (flux.size() < 8)
        throw std::invalid_argument("fit_flux_modulation: need at least 8 samples");

    const auto [fmin_it, fmax_it] = std::minmax_element(f_res.begin(), f_res.end());
    if (*fmax_it - *fmin_it < 1e-6 * std::abs(*fmax_it))
        throw fit_error("fit_flux_modulation: degenerate (constant) data");

    const std::size_t k_max = std::distance(f_res.begin(), fmax_it);
    const auto [phi_min_it, phi_max_it] = std::minmax_element(flux.begin(), flux.end());
    const double span = *phi_max_it - *phi_min_it;
    if (!(span > 0.0))
        throw std::invalid_argument("fit_flux_modulation: flux samples do not span a range");

    // Initial guesses: offset at the maximum, i_c from the bare-LC inversion
    // of the maximal resonance, period from the sampled span.
    const double w_max = 2.0 * constants::pi * *fmax_it;
    const double l_tot0 = 1.0 / (w_max * w_max * device.c_p);
    const double l_j0 = std::max(l_tot0 - device.l_stray, 1e-13);
    const double i_c0 = constants::flux_quantum / (2.0 * constants::pi * l_j0);

    FluxResiduals res{device, flux, f_res};
    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        res(p, r);
    };

    LmResult best;
    bool have = false;
    for (double period0 : {2.0 * span, span, 1.0}) {
        LmResult lm = levenberg_marquardt(fn, flux.size(),
                                          {i_c0, flux[k_max], period0});
        if (!have || (lm.converged && lm.residual_norm < best.residual_norm) ||
            (!best.converged && lm.converged)) {
            best = lm;
            have = true;
        }
    }
    if (!have || !best.converged)
        throw fit_error("fit_flux_modulation: no convergence");

    FluxFitResult out;
    out.i_c_est = best.params[0];
    out.flux_offset_est = best.params[1];
    out.period_est = std::abs(best.params[2]);
    out.f_max_est = flux_modulation_model(device, best.params[1], out.i_c_est,
                                          out.flux_offset_est, out.period_est);
    out.residual_norm = best.residual_norm;
    out.iterations = best.iterations;
    return out;
}

}  // namespace impa
