#include "impa/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "impa/csv.hpp"
#include "impa/errors.hpp"

namespace impa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view token, std::size_t line, const std::string& key) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw parse_error("invalid numeric value '" + std::string(token) + "'", line, key);
    return value;
}

struct KeySpec {
    const char* unit;  // required unit suffix; nullptr = plain number
    bool allow_auto;
    std::function<void(DeviceConfig&, std::optional<double>, std::string_view,
                       std::size_t)> apply;
};

void require_range(bool ok, const char* message, std::size_t line, const std::string& key) {
    if (!ok) throw parse_error(message, line, key);
}

using OptD = std::optional<double>;

const std::map<std::string, KeySpec, std::less<>>& key_table() {
    static const std::map<std::string, KeySpec, std::less<>> table = [] {
        std::map<std::string, KeySpec, std::less<>> t;
        auto num = [](const char* unit, auto setter, bool allow_auto = false) {
            return KeySpec{unit, allow_auto,
                           [setter](DeviceConfig& c, OptD v, std::string_view,
                                    std::size_t line) { setter(c, v, line); }};
        };
        t.emplace("squid.i_c", num("a", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "i_c must be positive", ln, "squid.i_c");
            c.i_c = *v;
        }));
        t.emplace("device.c_p", num("f", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "c_p must be positive", ln, "device.c_p");
            c.c_p = *v;
        }));
        t.emplace("device.l_stray", num("h", [](DeviceConfig& c, OptD v, std::size_t ln) {
            if (v) require_range(*v >= 0.0, "l_stray must be >= 0", ln, "device.l_stray");
            c.l_stray = v;
        }, true));
        t.emplace("device.flux_offset",
                  num(nullptr, [](DeviceConfig& c, OptD v, std::size_t) {
                      c.flux_offset = *v;
                  }));
        t.emplace("chain.style",
                  KeySpec{nullptr, false,
                          [](DeviceConfig& c, OptD, std::string_view raw, std::size_t ln) {
                              if (raw != "quarter-half" && raw != "none")
                                  throw parse_error("chain.style must be quarter-half or none",
                                                    ln, "chain.style");
                              c.chain_style = std::string(raw);
                          }});
        t.emplace("chain.z_ref", num("ohm", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "z_ref must be positive", ln, "chain.z_ref");
            c.z_ref = *v;
        }));
        t.emplace("chain.z_target", num("ohm", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "z_target must be positive", ln, "chain.z_target");
            c.z_target = *v;
        }));
        t.emplace("chain.f_design", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            if (v) require_range(*v > 0.0, "f_design must be positive", ln, "chain.f_design");
            c.f_design = v;
        }, true));
        t.emplace("resonance.target", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "target must be positive", ln, "resonance.target");
            c.resonance_target = *v;
        }));
        t.emplace("band.lo", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "band.lo must be positive", ln, "band.lo");
            c.band_lo = *v;
        }));
        t.emplace("band.hi", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v > 0.0, "band.hi must be positive", ln, "band.hi");
            c.band_hi = *v;
        }));
        t.emplace("band.points", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 2 && *v == std::floor(*v), "band.points must be an integer >= 2",
                          ln, "band.points");
            c.band_points = static_cast<long>(*v);
        }));
        t.emplace("fluxmap.lo", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t) {
            c.fluxmap_lo = *v;
        }));
        t.emplace("fluxmap.hi", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t) {
            c.fluxmap_hi = *v;
        }));
        t.emplace("fluxmap.flux_points",
                  num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
                      require_range(*v >= 2 && *v == std::floor(*v),
                                    "fluxmap.flux_points must be an integer >= 2", ln,
                                    "fluxmap.flux_points");
                      c.fluxmap_flux_points = static_cast<long>(*v);
                  }));
        t.emplace("fluxmap.freq_points",
                  num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
                      require_range(*v >= 2 && *v == std::floor(*v),
                                    "fluxmap.freq_points must be an integer >= 2", ln,
                                    "fluxmap.freq_points");
                      c.fluxmap_freq_points = static_cast<long>(*v);
                  }));
        t.emplace("operating.flux", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t) {
            c.operating_flux = *v;
        }));
        t.emplace("pump.f_pump", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            if (v) require_range(*v > 0.0, "f_pump must be positive", ln, "pump.f_pump");
            c.pump_f = v;
        }, true));
        t.emplace("pump.strength", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(v && *v >= 0.0, "strength must be >= 0", ln, "pump.strength");
            c.pump_strength_hz = *v;
        }));
        t.emplace("pump.phase", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t) {
            c.pump_phase = *v;
        }));
        t.emplace("kerr.k", num("hz", [](DeviceConfig& c, OptD v, std::size_t) {
            c.kerr_hz = v;
        }, true));
        t.emplace("tune.target_gain", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 0.0, "target gain must be >= 0", ln, "tune.target_gain");
            c.tune_target_db = *v;
        }));
        t.emplace("saturate.p_lo", num("dbm", [](DeviceConfig& c, OptD v, std::size_t) {
            c.saturate_p_lo = *v;
        }));
        t.emplace("saturate.p_hi", num("dbm", [](DeviceConfig& c, OptD v, std::size_t) {
            c.saturate_p_hi = *v;
        }));
        t.emplace("saturate.step", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "step must be positive", ln, "saturate.step");
            c.saturate_step = *v;
        }));
        t.emplace("saturate.f_s", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            if (v) require_range(*v > 0.0, "f_s must be positive", ln, "saturate.f_s");
            c.saturate_f_s = v;
        }, true));
        t.emplace("noise.y", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 1.0, "Y factor must be >= 1", ln, "noise.y");
            c.noise_y = *v;
        }));
        t.emplace("noise.g_p", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "g_p must be positive", ln, "noise.g_p");
            c.noise_g_p = *v;
        }));
        t.emplace("noise.g_i", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "g_i must be positive", ln, "noise.g_i");
            c.noise_g_i = *v;
        }));
        t.emplace("noise.g_a", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "g_a must be positive", ln, "noise.g_a");
            c.noise_g_a = *v;
        }));
        t.emplace("noise.t_h", num("k", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "t_h must be positive", ln, "noise.t_h");
            c.noise_t_h = *v;
        }));
        t.emplace("noise.f", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            if (v) require_range(*v > 0.0, "noise.f must be positive", ln, "noise.f");
            c.noise_f = v;
        }, true));
        t.emplace("readout.f_q", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "f_q must be positive", ln, "readout.f_q");
            c.readout_f_q = *v;
        }));
        t.emplace("readout.f_r", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0, "f_r must be positive", ln, "readout.f_r");
            c.readout_f_r = *v;
        }));
        t.emplace("readout.chi", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 0.0, "chi must be >= 0", ln, "readout.chi");
            c.readout_chi = *v;
        }));
        t.emplace("readout.g", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 0.0, "g must be >= 0", ln, "readout.g");
            c.readout_g = *v;
        }));
        t.emplace("readout.kappa_r", num("hz", [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 0.0, "kappa_r must be >= 0", ln, "readout.kappa_r");
            c.readout_kappa_r = *v;
        }));
        t.emplace("readout.separation",
                  num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
                      if (v) require_range(*v >= 0.0, "separation must be >= 0", ln,
                                           "readout.separation");
                      c.readout_separation = v;
                  }, true));
        t.emplace("readout.target_snr",
                  num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
                      require_range(*v >= 0.0, "target_snr must be >= 0", ln,
                                    "readout.target_snr");
                      c.readout_target_snr = *v;
                  }));
        t.emplace("readout.eta", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v > 0.0 && *v <= 1.0, "eta must lie in (0, 1]", ln, "readout.eta");
            c.readout_eta = *v;
        }));
        t.emplace("readout.shots", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 2 && *v == std::floor(*v),
                          "shots must be an integer >= 2", ln, "readout.shots");
            c.readout_shots = static_cast<long>(*v);
        }));
        t.emplace("seed", num(nullptr, [](DeviceConfig& c, OptD v, std::size_t ln) {
            require_range(*v >= 0 && *v == std::floor(*v), "seed must be a non-negative integer",
                          ln, "seed");
            c.seed = static_cast<std::uint64_t>(*v);
        }));
        return t;
    }();
    return table;
}

}  // namespace

DeviceConfig parse_config(std::string_view text) {
    DeviceConfig config;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw parse_error("expected key = value", line_no, {});
        const std::string key{trim(line.substr(0, eq))};
        std::string_view rhs = trim(line.substr(eq + 1));

        const auto it = key_table().find(key);
        if (it == key_table().end()) throw parse_error("unknown key", line_no, key);
        if (!seen.insert(key).second) throw parse_error("duplicate key", line_no, key);
        const KeySpec& spec = it->second;

        if (key == "chain.style") {
            spec.apply(config, std::nullopt, rhs, line_no);
            continue;
        }
        if (rhs == "auto") {
            if (!spec.allow_auto)
                throw parse_error("'auto' is not valid for this key", line_no, key);
            spec.apply(config, std::nullopt, rhs, line_no);
            continue;
        }

        std::string_view value_token = rhs;
        if (spec.unit != nullptr) {
            const std::size_t sp = rhs.rfind(' ');
            if (sp == std::string_view::npos)
                throw parse_error(std::string("missing unit suffix '") + spec.unit + "'",
                                  line_no, key);
            const std::string_view unit = trim(rhs.substr(sp + 1));
            if (unit != spec.unit)
                throw parse_error("bad unit suffix '" + std::string(unit) + "' (expected '" +
                                      spec.unit + "')",
                                  line_no, key);
            value_token = trim(rhs.substr(0, sp));
        } else if (rhs.find(' ') != std::string_view::npos) {
            throw parse_error("unexpected unit on a dimensionless key", line_no, key);
        }
        spec.apply(config, parse_number(value_token, line_no, key), rhs, line_no);
    }

    if (seen.find("squid.i_c") == seen.end())
        throw parse_error("missing required key", 0, "squid.i_c");
    if (!(config.band_hi > config.band_lo))
        throw parse_error("band.hi must exceed band.lo", 0, "band.hi");
    if (!(config.fluxmap_hi > config.fluxmap_lo))
        throw parse_error("fluxmap.hi must exceed fluxmap.lo", 0, "fluxmap.hi");
    if (!(config.saturate_p_hi > config.saturate_p_lo))
        throw parse_error("saturate.p_hi must exceed saturate.p_lo", 0, "saturate.p_hi");
    return config;
}

std::string serialize_config(const DeviceConfig& c) {
    std::ostringstream out;
    auto opt = [](const std::optional<double>& v) {
        return v ? format_exact(*v) : std::string("auto");
    };
    auto unit_or_auto = [&](const std::optional<double>& v, const char* unit) {
        return v ? format_exact(*v) + " " + unit : std::string("auto");
    };
    out << "# impa device configuration\n";
    out << "squid.i_c = " << format_exact(c.i_c) << " a\n";
    out << "device.c_p = " << format_exact(c.c_p) << " f\n";
    out << "device.l_stray = " << unit_or_auto(c.l_stray, "h") << "\n";
    out << "device.flux_offset = " << format_exact(c.flux_offset) << "\n";
    out << "chain.style = " << c.chain_style << "\n";
    out << "chain.z_ref = " << format_exact(c.z_ref) << " ohm\n";
    out << "chain.z_target = " << format_exact(c.z_target) << " ohm\n";
    out << "chain.f_design = " << unit_or_auto(c.f_design, "hz") << "\n";
    out << "resonance.target = " << format_exact(c.resonance_target) << " hz\n";
    out << "band.lo = " << format_exact(c.band_lo) << " hz\n";
    out << "band.hi = " << format_exact(c.band_hi) << " hz\n";
    out << "band.points = " << c.band_points << "\n";
    out << "fluxmap.lo = " << format_exact(c.fluxmap_lo) << "\n";
    out << "fluxmap.hi = " << format_exact(c.fluxmap_hi) << "\n";
    out << "fluxmap.flux_points = " << c.fluxmap_flux_points << "\n";
    out << "fluxmap.freq_points = " << c.fluxmap_freq_points << "\n";
    out << "operating.flux = " << format_exact(c.operating_flux) << "\n";
    out << "pump.f_pump = " << unit_or_auto(c.pump_f, "hz") << "\n";
    out << "pump.strength = " << format_exact(c.pump_strength_hz) << " hz\n";
    out << "pump.phase = " << format_exact(c.pump_phase) << "\n";
    out << "kerr.k = " << unit_or_auto(c.kerr_hz, "hz") << "\n";
    out << "tune.target_gain = " << format_exact(c.tune_target_db) << "\n";
    out << "saturate.p_lo = " << format_exact(c.saturate_p_lo) << " dbm\n";
    out << "saturate.p_hi = " << format_exact(c.saturate_p_hi) << " dbm\n";
    out << "saturate.step = " << format_exact(c.saturate_step) << "\n";
    out << "saturate.f_s = " << unit_or_auto(c.saturate_f_s, "hz") << "\n";
    out << "noise.y = " << format_exact(c.noise_y) << "\n";
    out << "noise.g_p = " << format_exact(c.noise_g_p) << "\n";
    out << "noise.g_i = " << format_exact(c.noise_g_i) << "\n";
    out << "noise.g_a = " << format_exact(c.noise_g_a) << "\n";
    out << "noise.t_h = " << format_exact(c.noise_t_h) << " k\n";
    out << "noise.f = " << unit_or_auto(c.noise_f, "hz") << "\n";
    out << "readout.f_q = " << format_exact(c.readout_f_q) << " hz\n";
    out << "readout.f_r = " << format_exact(c.readout_f_r) << " hz\n";
    out << "readout.chi = " << format_exact(c.readout_chi) << " hz\n";
    out << "readout.g = " << format_exact(c.readout_g) << " hz\n";
    out << "readout.kappa_r = " << format_exact(c.readout_kappa_r) << " hz\n";
    out << "readout.separation = " << opt(c.readout_separation) << "\n";
    out << "readout.target_snr = " << format_exact(c.readout_target_snr) << "\n";
    out << "readout.eta = " << format_exact(c.readout_eta) << "\n";
    out << "readout.shots = " << c.readout_shots << "\n";
    out << "seed = " << c.seed << "\n";
    return out.str();
}

DeviceModel to_device(const DeviceConfig& config) {
    DeviceModel device;
    device.squid.i_c_total = config.i_c;
    device.c_p = config.c_p;
    device.flux_offset = config.flux_offset;
    device.chain.z_ref = config.z_ref;
    if (config.chain_style == "quarter-half") {
        const double f_design = config.f_design.value_or(config.resonance_target);
        device.chain.sections.push_back(
            quarter_wave(std::sqrt(config.z_ref * config.z_target), f_design));
        device.chain.sections.push_back(half_wave(config.z_target, f_design));
    }
    device.l_stray = 0.0;
    if (config.l_stray) {
        device.l_stray = *config.l_stray;
    } else {
        device.l_stray = calibrate_stray(device, config.resonance_target);
    }
    return device;
}

}  // namespace impa
