#include "impa/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "impa/constants.hpp"
#include "impa/errors.hpp"
#include "impa/fitting.hpp"

namespace impa {

namespace {

constexpr double kQuadratureSigma = 0.70710678118654752440;  // sqrt(1/2)

double splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::array<double, 2> sample_mean(const std::vector<std::array<double, 2>>& s) {
    std::array<double, 2> m{0.0, 0.0};
    for (const auto& p : s) {
        m[0] += p[0];
        m[1] += p[1];
    }
    m[0] /= static_cast<double>(s.size());
    m[1] /= static_cast<double>(s.size());
    return m;
}

std::array<double, 2> sample_variance(const std::vector<std::array<double, 2>>& s,
                                      const std::array<double, 2>& m) {
    std::array<double, 2> v{0.0, 0.0};
    for (const auto& p : s) {
        v[0] += (p[0] - m[0]) * (p[0] - m[0]);
        v[1] += (p[1] - m[1]) * (p[1] - m[1]);
    }
    const double den = static_cast<double>(s.size()) - 1.0;
    v[0] /= den;
    v[1] /= den;
    return v;
}

struct Projected {
    std::vector<double> p0;
    std::vector<double> p1;
    double m0, m1, v0, v1;
};

Projected project(const IQCloudSet& clouds) {
    if (clouds.samples0.empty() || clouds.samples1.empty())
        throw std::invalid_argument("snr/visibility: empty cloud");
    const auto& ax = clouds.projection_axis;
    Projected out;
    out.p0.reserve(clouds.samples0.size());
    out.p1.reserve(clouds.samples1.size());
    for (const auto& p : clouds.samples0) out.p0.push_back(p[0] * ax[0] + p[1] * ax[1]);
    for (const auto& p : clouds.samples1) out.p1.push_back(p[0] * ax[0] + p[1] * ax[1]);
    auto stats = [](const std::vector<double>& v, double& mean, double& var) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size()) - 1.0;
    };
    stats(out.p0, out.m0, out.v0);
    stats(out.p1, out.m1, out.v1);
    return out;
}

}  // namespace

NormalSampler::NormalSampler(std::uint64_t seed) : gen_(seed) {}

double NormalSampler::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on uniforms built from the top 53 bits of the generator.
    double u1 = 0.0;
    do {
        u1 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * constants::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t NormalSampler::substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    (void)splitmix64(x);  // one mixing round
    return x;
}

void DispersiveModel::validate() const {
    if (!(f_q > 0.0) || !(f_r > 0.0))
        throw std::invalid_argument("dispersive model: frequencies must be positive");
    if (chi < 0.0 || kappa_r < 0.0 || separation < 0.0)
        throw std::invalid_argument("dispersive model: chi, kappa_r, separation must be >= 0");
    if (std::abs(f_q - f_r) < 10.0 * g_coupling)
        throw std::invalid_argument(
            "dispersive model: |f_q - f_r| must be at least 10*g (dispersive regime)");
    if (shots < 2) throw std::invalid_argument("dispersive model: shots must be >= 2");
}

void IQCloudSet::recompute_statistics() {
    mean0 = sample_mean(samples0);
    mean1 = sample_mean(samples1);
    covariance0 = sample_variance(samples0, mean0);
    covariance1 = sample_variance(samples1, mean1);
    const double dx = mean1[0] - mean0[0];
    const double dy = mean1[1] - mean0[1];
    const double norm = std::hypot(dx, dy);
    if (norm > 0.0) {
        projection_axis = {dx / norm, dy / norm};
        axis_defined = true;
    } else {
        projection_axis = {1.0, 0.0};
        axis_defined = false;
    }
}

std::pair<double, double> pulled_frequencies(const DispersiveModel& model) {
    model.validate();
    return {model.f_r - model.chi, model.f_r + model.chi};
}

IQCloudSet simulate_clouds(const DispersiveModel& model, double eta, std::uint64_t seed) {
    model.validate();
    if (!(eta > 0.0) || eta > 1.0)
        throw std::domain_error("simulate_clouds: eta must lie in (0, 1]");

    const double d = std::sqrt(eta) * model.separation;
    IQCloudSet clouds;
    clouds.samples0.resize(static_cast<std::size_t>(model.shots));
    clouds.samples1.resize(static_cast<std::size_t>(model.shots));

    NormalSampler rng0(NormalSampler::substream(seed, 0));
    NormalSampler rng1(NormalSampler::substream(seed, 1));
    for (auto& p : clouds.samples0) {
        p[0] = kQuadratureSigma * rng0();
        p[1] = kQuadratureSigma * rng0();
    }
    for (auto& p : clouds.samples1) {
        p[0] = d + kQuadratureSigma * rng1();
        p[1] = kQuadratureSigma * rng1();
    }
    clouds.recompute_statistics();
    return clouds;
}

double snr(const IQCloudSet& clouds) {
    if (!clouds.axis_defined) return 0.0;
    const Projected pr = project(clouds);
    const double sigma = std::sqrt(0.5 * (pr.v0 + pr.v1));
    if (!(sigma > 0.0)) return 0.0;
    return std::abs(pr.m1 - pr.m0) / sigma;
}

double visibility(const IQCloudSet& clouds) {
    if (!clouds.axis_defined) return 0.0;
    Projected pr = project(clouds);
    // Best threshold = Kolmogorov-Smirnov distance between the projected
    // empirical distributions.
    std::sort(pr.p0.begin(), pr.p0.end());
    std::sort(pr.p1.begin(), pr.p1.end());
    const double n0 = static_cast<double>(pr.p0.size());
    const double n1 = static_cast<double>(pr.p1.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < pr.p0.size() && j < pr.p1.size()) {
        if (pr.p0[i] <= pr.p1[j])
            ++i;
        else
            ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / n0 -
                                       static_cast<double>(j) / n1));
    }
    return best;
}

double calibrate_separation(double target_snr, double eta) {
    if (target_snr < 0.0)
        throw std::domain_error("calibrate_separation: target must be >= 0");
    if (!(eta > 0.0) || eta > 1.0)
        throw std::domain_error("calibrate_separation: eta must lie in (0, 1]");
    // Expected SNR of the simulated clouds is sqrt(eta)*separation / sigma
    // with sigma = sqrt(1/2), i.e. sqrt(2*eta)*separation.
    return target_snr / std::sqrt(2.0 * eta);
}

namespace {

struct ExpInit {
    double a, b, t;
};

ExpInit exponential_seed(std::span<const double> t, std::span<const double> v) {
    const std::size_t n = t.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double b0 = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) b0 += v[i];
    b0 /= static_cast<double>(tail);
    const double a0 = v[0] - b0;
    // Log-linear regression on the positive part for the time constant.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = (v[i] - b0) / (a0 != 0.0 ? a0 : 1.0);
        if (y > 1e-8) {
            const double ly = std::log(y);
            sx += t[i];
            sy += ly;
            sxx += t[i] * t[i];
            sxy += t[i] * ly;
            ++m;
        }
    }
    double t0 = (t[n - 1] - t[0]) / 2.0;
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        if (std::abs(denom) > 0.0) {
            const double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
            if (slope < -1e-30) t0 = -1.0 / slope;
        }
    }
    return {a0, b0, t0};
}

}  // namespace

CoherenceFit fit_exponential(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_exponential: size mismatch");
    if (times.size() < 4)
        throw std::invalid_argument("fit_exponential: need at least 4 points");

    const auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
    const double range = *vmax - *vmin;
    if (range < 1e-12 * std::max(std::abs(*vmax), 1.0))
        throw no_decay_error("fit_exponential: constant data");

    // Require a decaying trend: first third above last third.
    const std::size_t third = std::max<std::size_t>(1, times.size() / 3);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < third; ++i) head += values[i];
    for (std::size_t i = times.size() - third; i < times.size(); ++i) tail += values[i];
    if (head <= tail)
        throw no_decay_error("fit_exponential: data do not decay");

    const ExpInit init = exponential_seed(times, values);
    const std::size_t m = times.size();

    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < m; ++i)
            r[i] = p[0] * std::exp(-times[i] / p[2]) + p[1] - values[i];
    };
    const JacobianFn jac = [&](const std::vector<double>& p,
                               std::vector<std::vector<double>>& out) {
        out.assign(m, std::vector<double>(3, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::exp(-times[i] / p[2]);
            out[i][0] = e;
            out[i][1] = 1.0;
            out[i][2] = p[0] * e * times[i] / (p[2] * p[2]);
        }
    };

    const LmResult lm =
        levenberg_marquardt(fn, m, {init.a, init.b, std::max(init.t, 1e-12)}, jac);
    if (!lm.converged) throw fit_error("fit_exponential: no convergence");
    if (!(lm.params[2] > 0.0)) throw fit_error("fit_exponential: non-positive T1");

    CoherenceFit out{};
    out.amplitude = lm.params[0];
    out.offset = lm.params[1];
    out.time_constant = lm.params[2];
    out.residual_norm = lm.residual_norm;
    return out;
}

CoherenceFit fit_ramsey(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_ramsey: size mismatch");
    if (times.size() < 8)
        throw std::invalid_argument("fit_ramsey: need at least 8 points");

    const std::size_t n = times.size();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(n);

    // Periodogram prescan on the detrended samples (uniform-grid assumption).
    double best_power = 0.0;
    double total_power = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = 2.0 * constants::pi * static_cast<double>(k) *
                               static_cast<double>(i) / static_cast<double>(n);
            re += (values[i] - mean) * std::cos(ang);
            im -= (values[i] - mean) * std::sin(ang);
        }
        const double p = re * re + im * im;
        total_power += p;
        if (p > best_power) {
            best_power = p;
            best_k = k;
        }
    }

    const bool oscillating =
        best_k > 0 && total_power > 0.0 && best_power > 0.5 * total_power;
    if (!oscillating) {
        CoherenceFit out = fit_exponential(times, values);
        out.oscillation_fallback = true;
        return out;
    }

    const double span = times[n - 1] - times[0];
    const double f0 = static_cast<double>(best_k) / span;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double a0 = std::sqrt(2.0 * var);

    const std::size_t m = n;
    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < m; ++i)
            r[i] = p[0] * std::exp(-times[i] / p[2]) *
                       std::cos(2.0 * constants::pi * p[3] * times[i] + p[4]) +
                   p[1] - values[i];
    };
    const JacobianFn jac = [&](const std::vector<double>& p,
                               std::vector<std::vector<double>>& out) {
        out.assign(m, std::vector<double>(5, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::exp(-times[i] / p[2]);
            const double ang = 2.0 * constants::pi * p[3] * times[i] + p[4];
            const double c = std::cos(ang);
            const double s = std::sin(ang);
            out[i][0] = e * c;
            out[i][1] = 1.0;
            out[i][2] = p[0] * e * c * times[i] / (p[2] * p[2]);
            out[i][3] = -p[0] * e * s * 2.0 * constants::pi * times[i];
            out[i][4] = -p[0] * e * s;
        }
    };

    const LmResult lm = levenberg_marquardt(
        fn, m, {a0, mean, std::max(span / 2.0, 1e-12), f0, 0.0}, jac);
    if (!lm.converged) throw fit_error("fit_ramsey: no convergence");
    if (!(lm.params[2] > 0.0)) throw fit_error("fit_ramsey: non-positive T2");

    CoherenceFit out{};
    out.amplitude = lm.params[0];
    out.offset = lm.params[1];
    out.time_constant = lm.params[2];
    out.frequency = lm.params[3];
    out.phase = lm.params[4];
    out.residual_norm = lm.residual_norm;
    return out;
}

double coefficient_of_variation(std::span<const double> values) {
    if (values.size() < 2)
        throw std::invalid_argument("coefficient_of_variation: need >= 2 values");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size()) - 1.0;
    const double sd = std::sqrt(var);
    if (std::abs(mean) < 1e-12 * std::max(sd, 1e-300))
        throw std::domain_error("coefficient_of_variation: mean indistinguishable from 0");
    return sd / mean;
}

double qst_cv(double eta, long shots_per_batch, int batches, std::uint64_t seed) {
    if (!(eta > 0.0) || eta > 1.0)
        throw std::domain_error("qst_cv: eta must lie in (0, 1]");
    if (shots_per_batch < 1)
        throw std::domain_error("qst_cv: shots_per_batch must be >= 1");
    if (batches < 10) throw std::domain_error("qst_cv: need at least 10 batches");

    // Fixed superposition pointer signal of unit amplitude, attenuated by
    // sqrt(eta), measured against vacuum-unit noise.
    const double signal = std::sqrt(eta);
    std::vector<double> estimates(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        NormalSampler rng(NormalSampler::substream(seed, static_cast<std::uint64_t>(b)));
        double acc = 0.0;
        for (long s = 0; s < shots_per_batch; ++s)
            acc += signal + kQuadratureSigma * rng();
        estimates[static_cast<std::size_t>(b)] = acc / static_cast<double>(shots_per_batch);
    }
    return coefficient_of_variation(estimates);
}

}  // namespace impa
