// Command-line front end: configuration, simulation sweeps, trace analysis
// and parameter fitting for impedance-transformed JPA devices.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "impa/config.hpp"
#include "impa/constants.hpp"
#include "impa/csv.hpp"
#include "impa/errors.hpp"
#include "impa/noise.hpp"
#include "impa/paramp.hpp"
#include "impa/readout.hpp"
#include "impa/trace.hpp"

namespace {

using namespace impa;
namespace cn = impa::constants;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
};

struct Context {
    DeviceConfig config;
    DeviceModel device;
    FluxBias flux;
    std::uint64_t seed;
};

Context load_context(const CommonArgs& args, const std::string& default_out,
                     std::string& out_path) {
    Context ctx;
    ctx.config = parse_config(read_file(args.config_path));
    if (args.seed) ctx.config.seed = *args.seed;
    ctx.device = to_device(ctx.config);
    ctx.flux = FluxBias{ctx.config.operating_flux};
    ctx.seed = ctx.config.seed;
    out_path = args.out_path.empty() ? default_out : args.out_path;
    return ctx;
}

std::vector<double> band_grid(const DeviceConfig& config) {
    std::vector<double> grid(static_cast<std::size_t>(config.band_points));
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = config.band_lo + (config.band_hi - config.band_lo) *
                                       static_cast<double>(i) /
                                       static_cast<double>(grid.size() - 1);
    return grid;
}

PumpSettings resolve_pump(const Context& ctx) {
    if (ctx.config.pump_f && ctx.config.pump_strength_hz > 0.0) {
        return {*ctx.config.pump_f, 2.0 * cn::pi * ctx.config.pump_strength_hz,
                ctx.config.pump_phase};
    }
    const TuneResult tuned =
        tune_pump(ctx.device, ctx.flux,
                  {ctx.config.tune_target_db, {ctx.config.band_lo, ctx.config.band_hi}});
    return tuned.settings;
}

KerrModel resolve_kerr(const Context& ctx, double f_op) {
    if (ctx.config.kerr_hz)
        return {2.0 * cn::pi * *ctx.config.kerr_hz, cn::planck_h * f_op};
    return default_kerr(ctx.device, ctx.flux, f_op);
}

// Two-column CSV used by the fit subcommand.
std::pair<std::vector<double>, std::vector<double>> parse_xy_csv(
    std::string_view text, const std::string& header) {
    std::vector<double> xs, ys;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.remove_suffix(1);
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (std::string(line) != header)
                throw parse_error("expected header '" + header + "'", line_no);
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos)
            throw parse_error("expected 2 comma-separated fields", line_no);
        try {
            xs.push_back(std::stod(std::string(line.substr(0, comma))));
            ys.push_back(std::stod(std::string(line.substr(comma + 1))));
        } catch (const std::exception&) {
            throw parse_error("invalid numeric field", line_no);
        }
    }
    if (!header_seen) throw parse_error("missing header row", line_no);
    if (xs.empty()) throw parse_error("no data rows", line_no);
    return {xs, ys};
}

std::string stem_with_suffix(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path() / p.stem();
    return out.string() + suffix + p.extension().string();
}

int run_flux_map(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "flux_map.csv", out_path);
    const DeviceConfig& c = ctx.config;

    std::vector<double> flux(static_cast<std::size_t>(c.fluxmap_flux_points));
    for (std::size_t i = 0; i < flux.size(); ++i)
        flux[i] = c.fluxmap_lo + (c.fluxmap_hi - c.fluxmap_lo) * static_cast<double>(i) /
                                     static_cast<double>(flux.size() - 1);
    std::vector<double> freq(static_cast<std::size_t>(c.fluxmap_freq_points));
    for (std::size_t i = 0; i < freq.size(); ++i)
        freq[i] = c.band_lo + (c.band_hi - c.band_lo) * static_cast<double>(i) /
                                  static_cast<double>(freq.size() - 1);

    const PhaseMap map = phase_map(ctx.device, flux, freq);

    std::ostringstream csv;
    csv << "flux_phi0,freq_hz,phase_rad\n";
    double lo = map.phase[0][0], hi = map.phase[0][0];
    for (std::size_t i = 0; i < flux.size(); ++i) {
        for (std::size_t j = 0; j < freq.size(); ++j) {
            csv << format_g12(flux[i]) << "," << format_g12(freq[j]) << ","
                << format_g12(map.phase[i][j]) << "\n";
            lo = std::min(lo, map.phase[i][j]);
            hi = std::max(hi, map.phase[i][j]);
        }
    }
    write_file_atomic(out_path, csv.str());

    std::cout << "flux-map: " << flux.size() << " flux x " << freq.size()
              << " frequency points\n"
              << "phase range [" << format_g12(lo) << ", " << format_g12(hi)
              << "] rad\n"
              << "wrote " << out_path << "\n";
    return 0;
}

int run_gain(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "gain.csv", out_path);

    const PumpSettings pump = resolve_pump(ctx);
    const std::vector<double> grid = band_grid(ctx.config);
    const GainProfile profile = small_signal_gain(ctx.device, ctx.flux, pump, grid);
    const std::vector<double> db = profile.gain_db();

    std::ostringstream csv;
    csv << "freq_hz,gain_db,signal_re,signal_im,idler_db\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv << format_g12(grid[i]) << "," << format_g12(db[i]) << ","
            << format_g12(profile.signal_gain[i].real()) << ","
            << format_g12(profile.signal_gain[i].imag()) << ","
            << format_g12(20.0 * std::log10(std::abs(profile.idler_gain[i]))) << "\n";
    }
    write_file_atomic(out_path, csv.str());

    // Simulated traces for the analyze pipeline: off = pump-off reflection,
    // on = off scaled by the signal gain.
    MeasuredTrace off_trace;
    off_trace.meta = {{"pump", "off"}, {"flux", format_g12(ctx.flux.phi)}};
    MeasuredTrace on_trace;
    on_trace.meta = {{"pump", "on"}, {"flux", format_g12(ctx.flux.phi)}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const complexd off = pump_off_reflection(ctx.device, grid[i], ctx.flux);
        off_trace.freq.push_back(grid[i]);
        off_trace.s21.push_back(off);
        on_trace.freq.push_back(grid[i]);
        on_trace.s21.push_back(off * profile.signal_gain[i]);
    }
    const std::string on_path = stem_with_suffix(out_path, "_trace_on");
    const std::string off_path = stem_with_suffix(out_path, "_trace_off");
    write_file_atomic(on_path, serialize_trace_csv(on_trace));
    write_file_atomic(off_path, serialize_trace_csv(off_trace));

    const double peak = *std::max_element(db.begin(), db.end());
    std::cout << "pump: f_pump = " << format_g12(pump.f_pump)
              << " Hz, strength = " << format_g12(pump.strength)
              << " rad/s, phase = " << format_g12(pump.phase) << " rad\n"
              << "peak gain: " << format_g12(peak) << " dB\n"
              << "bandwidth above 10 dB: " << format_g12(bandwidth_above(profile, 10.0))
              << " Hz\n"
              << "bandwidth above 14 dB: " << format_g12(bandwidth_above(profile, 14.0))
              << " Hz\n"
              << "wrote " << out_path << ", " << on_path << ", " << off_path << "\n";
    return 0;
}

int run_saturate(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "saturate.csv", out_path);
    const DeviceConfig& c = ctx.config;

    const PumpSettings pump = resolve_pump(ctx);
    double f_s;
    if (c.saturate_f_s) {
        f_s = *c.saturate_f_s;
    } else {
        const std::vector<double> grid = band_grid(c);
        const GainProfile profile = small_signal_gain(ctx.device, ctx.flux, pump, grid);
        const std::vector<double> db = profile.gain_db();
        f_s = grid[static_cast<std::size_t>(
            std::max_element(db.begin(), db.end()) - db.begin())];
    }
    const KerrModel kerr = resolve_kerr(ctx, f_s);

    std::ostringstream csv;
    csv << "power_dbm,gain_db\n";
    for (double p = c.saturate_p_lo; p <= c.saturate_p_hi + 1e-9; p += c.saturate_step) {
        csv << format_g12(p) << ","
            << format_g12(gain_db_at_power(ctx.device, ctx.flux, pump, kerr, f_s, p))
            << "\n";
    }
    write_file_atomic(out_path, csv.str());

    const SaturationResult sat = saturation_power(ctx.device, ctx.flux, pump, kerr, f_s);
    std::cout << "signal frequency: " << format_g12(f_s) << " Hz\n"
              << "kerr per photon: " << format_g12(kerr.kerr_per_photon) << " rad/s\n"
              << "small-signal gain: " << format_g12(sat.small_signal_db) << " dB\n";
    if (sat.compressed)
        std::cout << "P1dB: " << format_g12(sat.p1db_dbm) << " dBm\n";
    else
        std::cout << "P1dB: no compression below -60 dBm\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_noise(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "noise.csv", out_path);
    const DeviceConfig& c = ctx.config;

    const double f = c.noise_f.value_or(c.resonance_target);
    const AmplChain chain{c.noise_g_p, c.noise_g_i, c.noise_g_a, c.noise_t_h};
    const double t_q = quantum_limit_temperature(f);
    const double t_sys = system_noise_temperature(c.noise_y, chain);
    const double n = noise_photons_from_temperature(t_sys, f);
    const double eta = efficiency_from_noise(n);

    std::ostringstream csv;
    csv << "quantity,value\n"
        << "f_hz," << format_g12(f) << "\n"
        << "t_quantum_k," << format_g12(t_q) << "\n"
        << "t_sys_k," << format_g12(t_sys) << "\n"
        << "n_noise," << format_g12(n) << "\n"
        << "eta," << format_g12(eta) << "\n";
    write_file_atomic(out_path, csv.str());

    std::cout << "quantum limit at " << format_g12(f) << " Hz: " << format_g12(t_q)
              << " K\n"
              << "system noise temperature: " << format_g12(t_sys) << " K\n"
              << "added noise photons: " << format_g12(n) << "\n"
              << "quantum efficiency: " << format_g12(eta) << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

int run_readout(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "readout.csv", out_path);
    const DeviceConfig& c = ctx.config;

    const double separation =
        c.readout_separation.value_or(calibrate_separation(c.readout_target_snr,
                                                           c.readout_eta));
    const DispersiveModel model{c.readout_f_q, c.readout_f_r,     c.readout_chi,
                                c.readout_g,   c.readout_kappa_r, separation,
                                c.readout_shots};
    const IQCloudSet clouds = simulate_clouds(model, c.readout_eta, ctx.seed);

    std::ostringstream csv;
    csv << "state,i,q\n";
    for (const auto& p : clouds.samples0)
        csv << "0," << format_g12(p[0]) << "," << format_g12(p[1]) << "\n";
    for (const auto& p : clouds.samples1)
        csv << "1," << format_g12(p[0]) << "," << format_g12(p[1]) << "\n";
    write_file_atomic(out_path, csv.str());

    const auto [f0, f1] = pulled_frequencies(model);
    std::cout << "pulled resonator frequencies: " << format_g12(f0) << " / "
              << format_g12(f1) << " Hz\n"
              << "separation: " << format_g12(separation) << " (eta = "
              << format_g12(c.readout_eta) << ")\n"
              << "snr: " << format_g12(snr(clouds)) << "\n"
              << "visibility: " << format_g12(visibility(clouds)) << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

int run_fit(const CommonArgs& args, const std::string& kind, const std::string& in_path) {
    std::string out_path;
    const Context ctx = load_context(args, "fit_" + kind + ".csv", out_path);

    std::ostringstream csv;
    csv << "parameter,value\n";
    if (kind == "t1" || kind == "t2") {
        const auto [ts, vs] = parse_xy_csv(read_file(in_path), "time_s,value");
        const CoherenceFit fit =
            kind == "t1" ? fit_exponential(ts, vs) : fit_ramsey(ts, vs);
        csv << (kind == "t1" ? "t1_s," : "t2_s,") << format_g12(fit.time_constant)
            << "\n"
            << "amplitude," << format_g12(fit.amplitude) << "\n"
            << "offset," << format_g12(fit.offset) << "\n";
        if (kind == "t2" && !fit.oscillation_fallback) {
            csv << "frequency_hz," << format_g12(fit.frequency) << "\n"
                << "phase_rad," << format_g12(fit.phase) << "\n";
        }
        csv << "residual_norm," << format_g12(fit.residual_norm) << "\n"
            << "oscillation_fallback," << (fit.oscillation_fallback ? 1 : 0) << "\n";
        std::cout << (kind == "t1" ? "T1 = " : "T2 = ")
                  << format_g12(fit.time_constant) << " s\n";
        if (fit.oscillation_fallback)
            std::cout << "note: no oscillation detected, exponential fallback used\n";
    } else {
        const auto [flux, fres] = parse_xy_csv(read_file(in_path), "flux,f_res_hz");
        const FluxFitResult fit = fit_flux_modulation(ctx.device, flux, fres);
        csv << "i_c_a," << format_g12(fit.i_c_est) << "\n"
            << "flux_offset," << format_g12(fit.flux_offset_est) << "\n"
            << "period," << format_g12(fit.period_est) << "\n"
            << "f_max_hz," << format_g12(fit.f_max_est) << "\n"
            << "residual_norm," << format_g12(fit.residual_norm) << "\n";
        std::cout << "i_c = " << format_g12(fit.i_c_est) << " A\n"
                  << "flux offset = " << format_g12(fit.flux_offset_est) << "\n"
                  << "period = " << format_g12(fit.period_est) << "\n"
                  << "f_max = " << format_g12(fit.f_max_est) << " Hz\n";
    }
    write_file_atomic(out_path, csv.str());
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_analyze(const CommonArgs& args, const std::string& on_path,
                const std::string& off_path, const std::string& sweep_path) {
    std::string out_path;
    const Context ctx = load_context(args, "analyze.csv", out_path);
    (void)ctx;

    const MeasuredTrace on = parse_trace_csv(read_file(on_path));
    const MeasuredTrace off = parse_trace_csv(read_file(off_path));
    const GainProfile profile = measured_gain(on, off);
    const std::vector<double> db = profile.gain_db();

    std::ostringstream csv;
    csv << "freq_hz,gain_db\n";
    for (std::size_t i = 0; i < profile.freq.size(); ++i)
        csv << format_g12(profile.freq[i]) << "," << format_g12(db[i]) << "\n";
    write_file_atomic(out_path, csv.str());

    std::cout << "peak gain: " << format_g12(*std::max_element(db.begin(), db.end()))
              << " dB\n"
              << "bandwidth above 10 dB: " << format_g12(bandwidth_above(profile, 10.0))
              << " Hz\n"
              << "bandwidth above 14 dB: " << format_g12(bandwidth_above(profile, 14.0))
              << " Hz\n";

    if (!sweep_path.empty()) {
        const PowerSweep sweep = parse_power_sweep_csv(read_file(sweep_path));
        const CompressionResult comp = compression_from_sweep(sweep);
        if (comp.compressed)
            std::cout << "P1dB: " << format_g12(comp.p1db_dbm) << " dBm (reference "
                      << format_g12(comp.reference_db) << " dB)\n";
        else
            std::cout << "P1dB: no compression in the sweep (reference "
                      << format_g12(comp.reference_db) << " dB)\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_tune(const CommonArgs& args) {
    std::string out_path;
    const Context ctx = load_context(args, "tune.csv", out_path);
    const DeviceConfig& c = ctx.config;

    const TuneResult result = tune_pump(
        ctx.device, ctx.flux, {c.tune_target_db, {c.band_lo, c.band_hi}});

    std::ostringstream csv;
    csv << "parameter,value\n"
        << "f_pump_hz," << format_g12(result.settings.f_pump) << "\n"
        << "strength_rad_s," << format_g12(result.settings.strength) << "\n"
        << "phase_rad," << format_g12(result.settings.phase) << "\n"
        << "bandwidth_hz," << format_g12(result.bandwidth_hz) << "\n"
        << "peak_gain_db," << format_g12(result.peak_gain_db) << "\n"
        << "reached," << (result.reached ? 1 : 0) << "\n";
    write_file_atomic(out_path, csv.str());

    std::cout << "pump frequency: " << format_g12(result.settings.f_pump) << " Hz\n"
              << "pump strength: " << format_g12(result.settings.strength) << " rad/s\n"
              << "bandwidth above " << format_g12(c.tune_target_db)
              << " dB: " << format_g12(result.bandwidth_hz) << " Hz\n"
              << "peak gain: " << format_g12(result.peak_gain_db) << " dB\n"
              << "target " << (result.reached ? "reached" : "NOT reached (best effort)")
              << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Device configuration file")
        ->required();
    cmd->add_option("--out", args.out_path, "Output CSV path");
    cmd->add_option("--seed", args.seed, "Override the configured RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design and characterization toolkit for impedance-transformed "
                 "Josephson parametric amplifiers"};
    app.require_subcommand(1);

    CommonArgs flux_args, gain_args, sat_args, noise_args, readout_args, fit_args,
        analyze_args, tune_args;
    std::string fit_kind, fit_in, analyze_on, analyze_off, analyze_sweep;

    CLI::App* cmd_flux = app.add_subcommand("flux-map", "Pump-off reflection phase map");
    add_common(cmd_flux, flux_args);

    CLI::App* cmd_gain =
        app.add_subcommand("gain", "Small-signal gain profile and bandwidths");
    add_common(cmd_gain, gain_args);

    CLI::App* cmd_sat = app.add_subcommand("saturate", "Gain versus input power");
    add_common(cmd_sat, sat_args);

    CLI::App* cmd_noise = app.add_subcommand("noise", "Noise and efficiency table");
    add_common(cmd_noise, noise_args);

    CLI::App* cmd_readout =
        app.add_subcommand("readout", "Simulated I/Q clouds with SNR and visibility");
    add_common(cmd_readout, readout_args);

    CLI::App* cmd_fit = app.add_subcommand("fit", "Parameter fits from CSV data");
    cmd_fit->add_option("kind", fit_kind, "t1 | t2 | fluxmod")
        ->required()
        ->check(CLI::IsMember({"t1", "t2", "fluxmod"}));
    cmd_fit->add_option("--in", fit_in, "Input CSV")->required();
    add_common(cmd_fit, fit_args);

    CLI::App* cmd_analyze =
        app.add_subcommand("analyze", "Gain and compression from measured traces");
    cmd_analyze->add_option("--on", analyze_on, "Pump-on trace CSV")->required();
    cmd_analyze->add_option("--off", analyze_off, "Pump-off trace CSV")->required();
    cmd_analyze->add_option("--sweep", analyze_sweep, "Power sweep CSV (optional)");
    add_common(cmd_analyze, analyze_args);

    CLI::App* cmd_tune = app.add_subcommand("tune", "Optimize pump settings");
    add_common(cmd_tune, tune_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (cmd_flux->parsed()) return run_flux_map(flux_args);
        if (cmd_gain->parsed()) return run_gain(gain_args);
        if (cmd_sat->parsed()) return run_saturate(sat_args);
        if (cmd_noise->parsed()) return run_noise(noise_args);
        if (cmd_readout->parsed()) return run_readout(readout_args);
        if (cmd_fit->parsed()) return run_fit(fit_args, fit_kind, fit_in);
        if (cmd_analyze->parsed())
            return run_analyze(analyze_args, analyze_on, analyze_off, analyze_sweep);
        if (cmd_tune->parsed()) return run_tune(tune_args);
    } catch (const io_error& error) {
        std::cerr << "io error: " << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 1;
}
