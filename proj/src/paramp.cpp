#include "impa/paramp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "impa/constants.hpp"
#include "impa/errors.hpp"

namespace impa {

namespace {

constexpr double kStrengthCap = 0.995;  // fraction of threshold the tuner may use

struct ModeRow {
    double kappa;   // [rad/s]
    double delta;   // [rad/s]
};

// Environment admittance at the JPA node; constant 1/z_ref without sections.
complexd node_admittance(const DeviceModel& device, double f) {
    if (device.chain.sections.empty())
        return complexd{1.0 / device.chain.z_ref, 0.0};
    return 1.0 / environment_impedance(device.chain, f);
}

// Signal/idler row coefficients of the linearized two-sideband system. The
// total node admittance maps onto kappa/2 + i*delta after division by 2*c_p;
// delta vanishes at the loaded resonance by construction, so the reactive
// part of the environment enters as a frequency-dependent detuning shift that
// is slope-matched at f0.
ModeRow mode_row(const DeviceModel& device, double l_tot, double f) {
    const complexd y_env = node_admittance(device, f);
    const double w = 2.0 * constants::pi * f;
    const double b_total = y_env.imag() + w * device.c_p - 1.0 / (w * l_tot);
    return {y_env.real() / device.c_p, b_total / (2.0 * device.c_p)};
}

struct GainPoint {
    complexd signal;
    complexd idler;
};

GainPoint gain_point(const ModeRow& s, const ModeRow& i, double lam, double phase) {
    const complexd u{0.5 * s.kappa, -s.delta};
    const complexd v{0.5 * i.kappa, i.delta};
    const complexd det = u * v - lam * lam;
    const complexd u_conj{0.5 * s.kappa, s.delta};
    const complexd signal = (u_conj * v + lam * lam) / det;
    const complexd idler = complexd{0.0, 1.0} * lam *
                           std::exp(complexd{0.0, -phase}) *
                           std::sqrt(s.kappa * i.kappa) / det;
    return {signal, idler};
}

double dbm_to_watts(double p_dbm) { return 1e-3 * std::pow(10.0, p_dbm / 10.0); }

// Smallest positive real root of a3 x^3 + a2 x^2 + a1 x + a0 (a0 < 0), with a
// bistability flag when three positive roots exist. Uses the trigonometric /
// Cardano closed form.
struct CubicSolution {
    double root;
    int positive_roots;
};

CubicSolution smallest_positive_root(double a3, double a2, double a1, double a0) {
    double roots[3];
    int n_real = 0;
    if (std::abs(a3) < 1e-300) {
        if (std::abs(a2) < 1e-300) {
            roots[n_real++] = -a0 / a1;
        } else {
            const double disc = a1 * a1 - 4.0 * a2 * a0;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                roots[n_real++] = (-a1 + s) / (2.0 * a2);
                roots[n_real++] = (-a1 - s) / (2.0 * a2);
            }
        }
    } else {
        const double b = a2 / a3;
        const double c = a1 / a3;
        const double d = a0 / a3;
        const double p = c - b * b / 3.0;
        const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        const double shift = -b / 3.0;
        const double disc = q * q / 4.0 + p * p * p / 27.0;
        if (disc > 0.0) {
            const double s = std::sqrt(disc);
            const double u = std::cbrt(-q / 2.0 + s);
            const double w = std::cbrt(-q / 2.0 - s);
            roots[n_real++] = u + w + shift;
        } else {
            const double r = std::sqrt(-p * p * p / 27.0);
            const double ang = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
            const double mag = 2.0 * std::sqrt(-p / 3.0);
            for (int k = 0; k < 3; ++k)
                roots[n_real++] =
                    mag * std::cos((ang + 2.0 * constants::pi * k) / 3.0) + shift;
        }
    }
    CubicSolution out{0.0, 0};
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_real; ++k) {
        if (roots[k] > 0.0) {
            ++out.positive_roots;
            best = std::min(best, roots[k]);
        }
    }
    if (out.positive_roots == 0)
        throw std::runtime_error("duffing_steady_state: no positive real root");
    out.root = best;
    return out;
}

}  // namespace

std::vector<double> GainProfile::gain_db() const {
    std::vector<double> out(signal_gain.size());
    for (std::size_t i = 0; i < signal_gain.size(); ++i)
        out[i] = 20.0 * std::log10(std::abs(signal_gain[i]));
    return out;
}

OperatingPoint operating_point(const DeviceModel& device, FluxBias flux) {
    OperatingPoint op;
    op.l_tot = total_inductance(device, flux);
    op.f0 = resonant_frequency_near(device, flux);
    return op;
}

ModeCoefficients mode_coefficients(const DeviceModel& device, const OperatingPoint& op,
                                   double f) {
    const ModeRow row = mode_row(device, op.l_tot, f);
    return {row.kappa, row.delta};
}

double coupling_rate(const DeviceModel& device, double f, FluxBias flux) {
    if (!(f > 0.0)) throw std::domain_error("coupling_rate: frequency must be positive");
    const double re_z = device.chain.sections.empty()
                            ? device.chain.z_ref
                            : environment_impedance(device.chain, f).real();
    if (!(re_z > 0.0))
        throw unphysical_environment_error("coupling_rate: Re[Z_env] <= 0");
    return re_z / total_inductance(device, flux);
}

double oscillation_threshold(const DeviceModel& device, FluxBias flux, double f_pump) {
    if (!(f_pump > 0.0))
        throw std::domain_error("oscillation_threshold: pump frequency must be positive");
    const OperatingPoint op = operating_point(device, flux);
    const ModeRow d = mode_row(device, op.l_tot, 0.5 * f_pump);
    return std::sqrt(0.25 * d.kappa * d.kappa + d.delta * d.delta);
}

GainProfile small_signal_gain(const DeviceModel& device, FluxBias flux,
                              const PumpSettings& pump,
                              std::span<const double> freq_grid) {
    if (freq_grid.empty())
        throw std::invalid_argument("small_signal_gain: empty frequency grid");
    if (!(pump.f_pump > 0.0))
        throw std::domain_error("small_signal_gain: pump frequency must be positive");
    if (pump.strength < 0.0)
        throw std::domain_error("small_signal_gain: strength must be non-negative");

    const OperatingPoint op = operating_point(device, flux);
    const double lam = pump.strength;

    // Stability of the degenerate point: lambda^2 < (kappa/2)^2 + delta^2.
    const ModeRow deg = mode_row(device, op.l_tot, 0.5 * pump.f_pump);
    if (lam * lam >= 0.25 * deg.kappa * deg.kappa + deg.delta * deg.delta)
        throw threshold_error("small_signal_gain: strength at/above oscillation threshold");

    GainProfile profile;
    profile.freq.assign(freq_grid.begin(), freq_grid.end());
    profile.signal_gain.resize(freq_grid.size());
    profile.idler_gain.resize(freq_grid.size());
    profile.pump = pump;

    for (std::size_t k = 0; k < freq_grid.size(); ++k) {
        const double fs = freq_grid[k];
        const double fi = pump.f_pump - fs;
        if (!(fs > 0.0) || !(fi > 0.0))
            throw std::domain_error("small_signal_gain: grid requires 0 < f < f_pump");
        const ModeRow rs = mode_row(device, op.l_tot, fs);
        const ModeRow ri = mode_row(device, op.l_tot, fi);
        const GainPoint g = gain_point(rs, ri, lam, pump.phase);
        profile.signal_gain[k] = g.signal;
        profile.idler_gain[k] = g.idler;
    }
    return profile;
}

double bandwidth_above(std::span<const double> freq, std::span<const double> gain_db,
                       double threshold_db) {
    if (freq.size() != gain_db.size())
        throw std::invalid_argument("bandwidth_above: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < freq.size(); ++i) {
        const double a = gain_db[i];
        const double b = gain_db[i + 1];
        const double w = freq[i + 1] - freq[i];
        if (a >= threshold_db && b >= threshold_db) {
            total += w;
        } else if (a >= threshold_db && b < threshold_db) {
            total += w * (a - threshold_db) / (a - b);
        } else if (a < threshold_db && b >= threshold_db) {
            total += w * (b - threshold_db) / (b - a);
        }
    }
    return total;
}

double bandwidth_above(const GainProfile& profile, double threshold_db) {
    const std::vector<double> db = profile.gain_db();
    return bandwidth_above(profile.freq, db, threshold_db);
}

KerrModel default_kerr(const DeviceModel& device, FluxBias flux, double f_op) {
    const double l_j = josephson_inductance(device.squid, flux);
    const double p = l_j / (l_j + device.l_stray);
    const double e = constants::elementary_charge;
    const double k = -(e * e / (2.0 * constants::hbar * device.c_p)) * p * p * p;
    return {k, constants::planck_h * f_op};
}

DuffingResult duffing_steady_state(const DeviceModel& device, FluxBias flux,
                                   const PumpSettings& pump, const KerrModel& kerr,
                                   double drive_power_dbm, double f_s) {
    if (!(f_s > 0.0))
        throw std::domain_error("duffing_steady_state: frequency must be positive");
    if (!std::isfinite(drive_power_dbm))
        throw std::domain_error("duffing_steady_state: drive power must be finite");

    const OperatingPoint op = operating_point(device, flux);
    const double lam = pump.strength;
    const double fi = pump.f_pump > 0.0 ? pump.f_pump - f_s : f_s;
    if (!(fi > 0.0))
        throw std::domain_error("duffing_steady_state: idler frequency must be positive");

    const ModeRow rs = mode_row(device, op.l_tot, f_s);
    const ModeRow ri = mode_row(device, op.l_tot, fi);
    const complexd u{0.5 * rs.kappa, -rs.delta};
    const complexd v{0.5 * ri.kappa, ri.delta};
    const complexd det0 = u * v - lam * lam;

    const double flux_in = dbm_to_watts(drive_power_dbm) /
                           (constants::planck_h * f_s);  // photons/s
    const double rhs = rs.kappa * (std::norm(v) + lam * lam) * flux_in;

    // Kerr shift s = K*n moves both detunings: det(s) = det0 + i*(u - v)*s + s^2.
    // Dropping the quadratic term keeps the steady state a cubic in n:
    //   n * |det0 + i*(u - v)*K*n|^2 = rhs.
    const complexd c = complexd{0.0, 1.0} * (u - v);
    const double k = kerr.kerr_per_photon;
    const double a1 = std::norm(det0);
    const double a2 = 2.0 * k * (c * std::conj(det0)).real();
    const double a3 = k * k * std::norm(c);

    const CubicSolution sol = smallest_positive_root(a3, a2, a1, -rhs);

    const double shift = k * sol.root;
    const complexd u_shift{0.5 * rs.kappa, -(rs.delta + shift)};
    const complexd v_shift{0.5 * ri.kappa, ri.delta + shift};
    const complexd det_shift = u_shift * v_shift - lam * lam;
    const complexd amplitude =
        std::sqrt(rs.kappa * flux_in) * v_shift / det_shift;

    return {sol.root, amplitude, sol.positive_roots >= 3};
}

double gain_db_at_power(const DeviceModel& device, FluxBias flux,
                        const PumpSettings& pump, const KerrModel& kerr, double f_s,
                        double power_dbm) {
    const OperatingPoint op = operating_point(device, flux);
    const double fi = pump.f_pump - f_s;
    if (!(fi > 0.0))
        throw std::domain_error("gain_db_at_power: idler frequency must be positive");
    const DuffingResult d =
        duffing_steady_state(device, flux, pump, kerr, power_dbm, f_s);
    const double shift = kerr.kerr_per_photon * d.photons;
    const ModeRow rs = mode_row(device, op.l_tot, f_s);
    const ModeRow ri = mode_row(device, op.l_tot, fi);
    const ModeRow rss{rs.kappa, rs.delta + shift};
    const ModeRow ris{ri.kappa, ri.delta + shift};
    const GainPoint g = gain_point(rss, ris, pump.strength, pump.phase);
    return 20.0 * std::log10(std::abs(g.signal));
}

SaturationResult saturation_power(const DeviceModel& device, FluxBias flux,
                                  const PumpSettings& pump, const KerrModel& kerr,
                                  double f_s) {
    const OperatingPoint op = operating_point(device, flux);
    const double lam = pump.strength;
    const double fi = pump.f_pump - f_s;
    if (!(fi > 0.0))
        throw std::domain_error("saturation_power: idler frequency must be positive");

    const ModeRow rs = mode_row(device, op.l_tot, f_s);
    const ModeRow ri = mode_row(device, op.l_tot, fi);

    auto gain_db_at_shift = [&](double shift) {
        const ModeRow rss{rs.kappa, rs.delta + shift};
        const ModeRow ris{ri.kappa, ri.delta + shift};
        const GainPoint g = gain_point(rss, ris, lam, pump.phase);
        return 20.0 * std::log10(std::abs(g.signal));
    };

    const double g0_db = gain_db_at_shift(0.0);
    if (g0_db < 2.0)
        throw std::domain_error("saturation_power: small-signal gain below 2 dB");

    SaturationResult out;
    out.small_signal_db = g0_db;

    double prev_p = -150.0;
    double prev_g = g0_db;
    for (double p = -150.0; p <= -60.0 + 1e-9; p += 0.25) {
        const DuffingResult d = duffing_steady_state(device, flux, pump, kerr, p, f_s);
        const double g = gain_db_at_shift(kerr.kerr_per_photon * d.photons);
        if (g <= g0_db - 1.0) {
            const double target = g0_db - 1.0;
            const double frac = (prev_g - target) / (prev_g - g);
            out.compressed = true;
            out.p1db_dbm = prev_p + frac * (p - prev_p);
            return out;
        }
        prev_p = p;
        prev_g = g;
    }
    return out;  // no compression below -60 dBm
}

namespace {

// Deterministic golden-section maximization; ties move the interval right so
// flat-zero plateaus at small strength drain toward the informative region.
template <typename F>
std::pair<double, double> golden_max(const F& f, double a, double b, int iters) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace

TuneResult tune_pump(const DeviceModel& device, FluxBias flux,
                     const TuneObjective& objective) {
    if (objective.target_gain_db < 0.0)
        throw std::domain_error("tune_pump: target gain must be non-negative");
    if (!(objective.band.lo > 0.0) || !(objective.band.hi > objective.band.lo))
        throw std::invalid_argument("tune_pump: bad objective band");

    const OperatingPoint op = operating_point(device, flux);

    constexpr std::size_t kGridPoints = 801;
    std::vector<double> grid(kGridPoints);
    for (std::size_t i = 0; i < kGridPoints; ++i)
        grid[i] = objective.band.lo +
                  (objective.band.hi - objective.band.lo) *
                      static_cast<double>(i) / (kGridPoints - 1);

    // Signal-side coefficients never change across pump candidates.
    std::vector<ModeRow> rows_s(kGridPoints);
    for (std::size_t i = 0; i < kGridPoints; ++i)
        rows_s[i] = mode_row(device, op.l_tot, grid[i]);

    auto threshold_at = [&](double fp) {
        const ModeRow d = mode_row(device, op.l_tot, 0.5 * fp);
        return std::sqrt(0.25 * d.kappa * d.kappa + d.delta * d.delta);
    };

    auto bw_at = [&](double fp, double lam) {
        std::vector<double> db(kGridPoints);
        for (std::size_t i = 0; i < kGridPoints; ++i) {
            const double fi = fp - grid[i];
            if (!(fi > 0.0)) return 0.0;
            const ModeRow ri = mode_row(device, op.l_tot, fi);
            const GainPoint g = gain_point(rows_s[i], ri, lam, 0.0);
            db[i] = 20.0 * std::log10(std::abs(g.signal));
        }
        return bandwidth_above(grid, db, objective.target_gain_db);
    };

    auto best_strength_at = [&](double fp) {
        const double cap = kStrengthCap * threshold_at(fp);
        return golden_max([&](double l) { return bw_at(fp, l); }, 0.0, cap, 48);
    };

    const double fp_lo = 2.0 * objective.band.lo;
    const double fp_hi = 2.0 * objective.band.hi;
    double fp = std::clamp(2.0 * op.f0, fp_lo, fp_hi);
    double lam = 0.0;

    if (objective.target_gain_db == 0.0) {
        // Zero strength already meets a 0 dB target everywhere.
        TuneResult out;
        out.settings = {fp, 0.0, 0.0};
        out.bandwidth_hz = objective.band.hi - objective.band.lo;
        out.peak_gain_db = 0.0;
        out.reached = true;
        return out;
    }

    double best_bw = -1.0;
    for (int sweep = 0; sweep < 8; ++sweep) {
        auto [l1, bw1] = best_strength_at(fp);
        lam = l1;

        // Coarse pump-frequency sweep judged at each candidate's own best
        // strength, then golden refinement around the winner.
        constexpr int kCoarse = 33;
        int best_i = 0;
        double best_v = -1.0;
        for (int i = 0; i < kCoarse; ++i) {
            const double f = fp_lo + (fp_hi - fp_lo) * i / (kCoarse - 1);
            const double v = best_strength_at(f).second;
            if (v > best_v) {
                best_v = v;
                best_i = i;
            }
        }
        const double fa = fp_lo + (fp_hi - fp_lo) * std::max(best_i - 1, 0) / (kCoarse - 1);
        const double fb =
            fp_lo + (fp_hi - fp_lo) * std::min(best_i + 1, kCoarse - 1) / (kCoarse - 1);
        auto [f2, bw2] = golden_max(
            [&](double f) { return best_strength_at(f).second; }, fa, fb, 32);
        fp = f2;
        auto [l3, bw3] = best_strength_at(fp);
        lam = l3;

        if (bw3 <= best_bw + 1e-4 * std::max(best_bw, 1.0)) {
            best_bw = std::max(best_bw, bw3);
            break;
        }
        best_bw = bw3;
    }

    TuneResult out;
    out.settings = {fp, lam, 0.0};
    out.bandwidth_hz = best_bw;

    const GainProfile profile = small_signal_gain(device, flux, out.settings, grid);
    const std::vector<double> db = profile.gain_db();
    out.peak_gain_db = *std::max_element(db.begin(), db.end());
    out.reached = out.peak_gain_db >= objective.target_gain_db - 1e-9;
    return out;
}

}  // namespace impa
