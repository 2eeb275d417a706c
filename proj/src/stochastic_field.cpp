#include "qlkit/stochastic_field.hpp"

#include "qlkit/fft.hpp"
#include "qlkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qlkit {
namespace {

constexpr double pi = std::numbers::pi;

double sinc(double u)
{
    if (std::abs(u) < 1e-4)
        return 1.0 - u * u / 6.0;
    return std::sin(u) / u;
}

int next_pow2(int n)
{
    int p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

std::vector<CorrelationMode const *> positive_modes(CorrelationSpec const &spec)
{
    std::vector<CorrelationMode const *> out;
    for (auto const &m : spec.modes)
        if (m.k > 0)
            out.push_back(&m);
    std::sort(out.begin(), out.end(), [](auto a, auto b) { return a->k < b->k; });
    return out;
}

FieldOnGrid field_from_modes(PhaseSpaceGrid const &grid,
                             std::vector<std::pair<int, cplx>> const &modes)
{
    int const nx = grid.nx();
    FieldOnGrid E{grid, std::vector<double>(nx), std::vector<cplx>(nx / 2 + 1)};
    for (auto const &[m, value] : modes) {
        if (m <= 0 || m >= nx / 2)
            throw Error("field mode index " + std::to_string(m) +
                        " is not resolved by the x grid");
        E.fourier[m] += value;
    }
    fft::c2r(E.fourier, E.values);
    return E;
}

cplx complex_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    // Box-Muller on two counter-keyed uniforms; unit variance E|z|^2 = 1.
    double const u1 = 1.0 - counter_uniform(seed, a, 2 * b);
    double const u2 = counter_uniform(seed, a, 2 * b + 1);
    double const r = std::sqrt(-std::log(u1));
    return std::polar(r, 2.0 * pi * u2);
}

} // namespace

CorrelationFamily parse_family(std::string_view name)
{
    if (name == "triangular")
        return CorrelationFamily::triangular;
    if (name == "bohman")
        return CorrelationFamily::bohman;
    throw Error("unknown correlation family '" + std::string(name) + "'");
}

std::string_view to_string(CorrelationFamily family)
{
    switch (family) {
    case CorrelationFamily::triangular:
        return "triangular";
    case CorrelationFamily::bohman:
        return "bohman";
    }
    return "unknown";
}

void validate(CorrelationSpec const &spec)
{
    std::map<int, CorrelationMode const *> by_k;
    for (auto const &m : spec.modes) {
        if (m.k == 0)
            throw Error("correlation spec: k = 0 is not allowed");
        if (!(m.amplitude >= 0.0) || !std::isfinite(m.amplitude))
            throw Error("correlation spec: amplitude must be >= 0");
        if (!(m.tau > 0.0) || !std::isfinite(m.tau))
            throw Error("correlation spec: tau must be > 0");
        if (!std::isfinite(m.omega))
            throw Error("correlation spec: omega must be finite");
        if (!by_k.emplace(m.k, &m).second)
            throw Error("correlation spec: duplicate mode k = " + std::to_string(m.k));
    }
    for (auto const &[k, m] : by_k) {
        auto it = by_k.find(-k);
        if (it == by_k.end())
            throw Error("correlation spec: mode k = " + std::to_string(k) +
                        " has no conjugate partner");
        auto const *p = it->second;
        if (p->omega != -m->omega || p->family != m->family ||
            p->amplitude != m->amplitude || p->tau != m->tau)
            throw Error("correlation spec: conjugate pair k = +-" + std::to_string(std::abs(k)) +
                        " must satisfy omega_{-k} = -omega_k with identical shape");
    }
    if (!std::isfinite(bound_constant(spec)))
        throw Error("correlation spec: sum |k|^3 integral |A_k| is not finite");
}

double bound_constant(CorrelationSpec const &spec)
{
    double c = 0.0;
    for (auto const &m : spec.modes) {
        double const ak = std::abs(double(m.k));
        // Both families are nonnegative, so integral |A| = A^(0).
        c += ak * ak * ak * hat_transform(m, 0.0);
    }
    return c;
}

double correlation(CorrelationMode const &mode, double sigma)
{
    double const x = std::abs(sigma) / mode.tau;
    if (x >= 1.0)
        return 0.0;
    switch (mode.family) {
    case CorrelationFamily::triangular:
        return mode.amplitude * (1.0 - x);
    case CorrelationFamily::bohman:
        return mode.amplitude * ((1.0 - x) * std::cos(pi * x) + std::sin(pi * x) / pi);
    }
    return 0.0;
}

double hat_transform(CorrelationMode const &mode, double s)
{
    double const a = mode.amplitude, tau = mode.tau;
    switch (mode.family) {
    case CorrelationFamily::triangular: {
        double const sc = sinc(0.5 * s * tau);
        return a * tau * sc * sc;
    }
    case CorrelationFamily::bohman: {
        // Cosine pulse transform pi sinc(pi/2 - |s| tau/2) / (p + |s|),
        // written to stay finite at |s| = p = pi/tau.
        double const p = pi / tau;
        double const as = std::abs(s);
        double const g = pi * sinc(0.5 * pi - 0.5 * as * tau) / (p + as);
        return 2.0 * a / tau * g * g;
    }
    }
    return 0.0;
}

cplx FieldRealization::envelope_at(std::size_t mode, double tau) const
{
    double const end = time.end();
    double const slack = 1e-9 * time.dtau;
    if (tau < -slack || tau > end + slack) {
        std::ostringstream msg;
        msg << "field realization covers fast time [0, " << end << "], requested " << tau;
        throw Error(msg.str());
    }
    double const u = std::clamp(tau / time.dtau, 0.0, double(time.samples - 1));
    int n = static_cast<int>(std::floor(u));
    if (n >= time.samples - 1)
        n = time.samples - 2;
    double const w = u - n;
    auto const &e = envelope[mode];
    return (1.0 - w) * e[n] + w * e[n + 1];
}

cplx FieldRealization::potential_at(std::size_t mode, double tau) const
{
    cplx const env = envelope_at(mode, tau);
    return carrier ? env * std::polar(1.0, -omega[mode] * tau) : env;
}

cplx FieldRealization::potential_signed(int k_signed, double tau) const
{
    int const ak = std::abs(k_signed);
    for (std::size_t q = 0; q < k.size(); ++q)
        if (k[q] == ak) {
            cplx const p = potential_at(q, tau);
            return k_signed > 0 ? p : std::conj(p);
        }
    return {};
}

FieldRealization synthesize_realization(CorrelationSpec const &spec, std::uint64_t seed,
                                        double epsilon, TimeGrid const &grid,
                                        SynthesisBackend backend)
{
    validate(spec);
    if (!(grid.dtau > 0.0) || grid.samples < 2)
        throw Error("synthesize_realization: time grid needs dtau > 0 and >= 2 samples");
    if (!(epsilon > 0.0))
        throw Error("synthesize_realization: epsilon must be > 0");

    FieldRealization r;
    r.time = grid;
    r.epsilon = epsilon;
    r.carrier = true;
    for (auto const *m : positive_modes(spec)) {
        if (grid.dtau > m->tau / 16.0 * (1.0 + 1e-12) ||
            grid.dtau * std::abs(m->omega) > pi / 8.0 * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "synthesize_realization: dtau = " << grid.dtau << " under-resolves mode k = "
                << m->k << " (needs dtau <= tau/16 = " << m->tau / 16.0
                << " and dtau |omega| <= pi/8)";
            throw Error(msg.str());
        }
        r.k.push_back(m->k);
        r.omega.push_back(m->omega);
        std::vector<cplx> env(grid.samples);
        auto const key = static_cast<std::uint64_t>(m->k);

        if (m->amplitude > 0.0 && backend == SynthesisBackend::spectral) {
            int const nfft = std::max(64, next_pow2(2 * grid.samples));
            double const dnu = 2.0 * pi / (nfft * grid.dtau);
            double const peak = hat_transform(*m, 0.0);
            std::vector<cplx> spectrum(nfft);
            for (int q = 0; q < nfft; ++q) {
                int const signed_q = q < nfft / 2 ? q : q - nfft;
                double const nu = signed_q * dnu;
                double const h = hat_transform(*m, nu);
                if (h < 1e-8 * peak)
                    continue;
                double const c = std::sqrt(h * dnu / (2.0 * pi));
                double const theta =
                    2.0 * pi * counter_uniform(seed, key, static_cast<std::uint64_t>(signed_q));
                spectrum[q] = std::polar(c, theta);
            }
            std::vector<cplx> series(nfft);
            fft::c2c(spectrum, series, +1);
            std::copy_n(series.begin(), grid.samples, env.begin());
        } else if (m->amplitude > 0.0) {
            // Moving average with kernel g, g * g~ = A_k, on the midpoints of [0, tau).
            int const width = std::max(1, static_cast<int>(std::lround(m->tau / grid.dtau)));
            double const cell = m->tau / width;
            std::vector<double> g(width);
            for (int j = 0; j < width; ++j) {
                double const u = (j + 0.5) * cell;
                g[j] = m->family == CorrelationFamily::triangular
                           ? std::sqrt(m->amplitude / m->tau)
                           : std::sqrt(2.0 * m->amplitude / m->tau) * std::sin(pi * u / m->tau);
            }
            std::uint64_t const ma_key = key | (std::uint64_t{1} << 40);
            std::vector<cplx> noise(grid.samples + width);
            for (std::size_t i = 0; i < noise.size(); ++i)
                noise[i] = complex_gaussian(seed, ma_key, i);
            double const scale = std::sqrt(cell);
            for (int n = 0; n < grid.samples; ++n) {
                cplx acc{};
                for (int j = 0; j < width; ++j)
                    acc += g[j] * noise[n - j + width];
                env[n] = scale * acc;
            }
        }
        r.envelope.push_back(std::move(env));
    }
    return r;
}

FieldOnGrid field_at(FieldRealization const &r, PhaseSpaceGrid const &grid, double t)
{
    double const tau = t / (r.epsilon * r.epsilon);
    std::vector<std::pair<int, cplx>> modes;
    for (std::size_t q = 0; q < r.mode_count(); ++q) {
        double const k = grid.wavenumber(r.k[q]);
        modes.emplace_back(r.k[q], cplx(0.0, -k) * r.potential_at(q, tau));
    }
    return field_from_modes(grid, modes);
}

void validate(AnsatzSpec const &spec)
{
    std::map<int, AnsatzMode const *> by_k;
    for (auto const &m : spec.modes) {
        if (m.k == 0)
            throw Error("ansatz spec: k = 0 is not allowed");
        if (!(m.beta >= 0.0))
            throw Error("ansatz spec: beta must be >= 0");
        if (!by_k.emplace(m.k, &m).second)
            throw Error("ansatz spec: duplicate mode k = " + std::to_string(m.k));
    }
    for (auto const &[k, m] : by_k) {
        auto it = by_k.find(-k);
        if (it == by_k.end())
            throw Error("ansatz spec: mode k = " + std::to_string(k) + " has no conjugate partner");
        auto const *p = it->second;
        if (p->omega != -m->omega || p->beta != m->beta ||
            std::abs(p->amplitude - std::conj(m->amplitude)) > 1e-14 * (1.0 + std::abs(m->amplitude)))
            throw Error("ansatz spec: conjugate pair k = +-" + std::to_string(std::abs(k)) +
                        " must have omega_{-k} = -omega_k, equal beta and conjugate amplitude");
    }
}

FieldOnGrid deterministic_ansatz_field(AnsatzSpec const &spec, double epsilon, double t,
                                       PhaseSpaceGrid const &grid)
{
    if (!(epsilon > 0.0))
        throw Error("deterministic_ansatz_field: epsilon must be > 0");
    std::vector<std::pair<int, cplx>> modes;
    for (auto const &m : spec.modes) {
        if (m.k <= 0)
            continue;
        double const k = grid.wavenumber(m.k);
        double const phase = m.omega * std::pow(epsilon, -m.beta) * t;
        modes.emplace_back(m.k, cplx(0.0, -k) * m.amplitude * std::polar(1.0, -phase));
    }
    return field_from_modes(grid, modes);
}

FieldRealization ansatz_realization(AnsatzSpec const &spec, double epsilon, TimeGrid const &grid)
{
    validate(spec);
    FieldRealization r;
    r.time = grid;
    r.epsilon = epsilon;
    r.carrier = true;
    std::vector<AnsatzMode> pos;
    for (auto const &m : spec.modes)
        if (m.k > 0)
            pos.push_back(m);
    std::sort(pos.begin(), pos.end(), [](auto const &a, auto const &b) { return a.k < b.k; });
    for (auto const &m : pos) {
        r.k.push_back(m.k);
        r.omega.push_back(m.omega * std::pow(epsilon, 2.0 - m.beta));
        r.envelope.emplace_back(grid.samples, m.amplitude);
    }
    return r;
}

CorrelationReport verify_correlation(std::vector<FieldRealization> const &realizations,
                                     CorrelationSpec const &spec)
{
    if (realizations.size() < 2)
        throw Error("verify_correlation: needs at least 2 realizations");
    validate(spec);
    auto const pos = positive_modes(spec);
    auto const &first = realizations.front();
    for (auto const &r : realizations) {
        if (r.k.size() != pos.size() || r.time.samples != first.time.samples ||
            r.time.dtau != first.time.dtau)
            throw Error("verify_correlation: realizations do not match the correlation modes or each other");
        for (std::size_t q = 0; q < pos.size(); ++q)
            if (r.k[q] != pos[q]->k || r.omega[q] != pos[q]->omega)
                throw Error("verify_correlation: realization modes do not match the correlation modes");
    }

    int const n = first.time.samples;
    double const dtau = first.time.dtau;
    double const count = static_cast<double>(realizations.size());
    int const pad = next_pow2(2 * n);

    CorrelationReport report;
    report.realizations = realizations.size();
    for (std::size_t q = 0; q < pos.size(); ++q) {
        auto const &mode = *pos[q];
        int const lmax = std::min(n - 1, static_cast<int>(std::ceil(3.0 * mode.tau / dtau)));
        std::vector<cplx> acc(lmax + 1);
        std::vector<cplx> mean(n);
        std::vector<cplx> buf(pad), spec_buf(pad);
        for (auto const &r : realizations) {
            auto const &x = r.envelope[q];
            std::fill(buf.begin(), buf.end(), cplx{});
            std::copy(x.begin(), x.end(), buf.begin());
            fft::c2c(buf, spec_buf, -1);
            for (auto &z : spec_buf)
                z = std::norm(z);
            fft::c2c(spec_buf, buf, +1);
            for (int l = 0; l <= lmax; ++l)
                acc[l] += buf[l] / double(pad);
            for (int i = 0; i < n; ++i)
                mean[i] += x[i];
        }

        ModeCorrelation mc;
        mc.k = mode.k;
        mc.scale = correlation(mode, 0.0);
        std::vector<cplx> emp(lmax + 1);
        for (int l = 0; l <= lmax; ++l) {
            emp[l] = acc[l] / (count * (n - l));
            double const lag = l * dtau;
            mc.lags.push_back(lag);
            mc.empirical.push_back(emp[l].real());
            mc.target.push_back(correlation(mode, lag));
            double const dev = std::abs(emp[l] - mc.target.back());
            if (lag <= mode.tau)
                mc.max_deviation = std::max(mc.max_deviation, dev);
            if (lag > 2.0 * mode.tau)
                mc.max_leakage = std::max(mc.max_leakage, std::abs(emp[l]));
        }
        for (auto const &z : mean)
            mc.max_mean_modulus = std::max(mc.max_mean_modulus, std::abs(z) / count);

        // Bartlett-tapered transform of the empirical autocorrelation.
        int const nb = next_pow2(4 * (lmax + 1));
        std::vector<cplx> seq(nb), tr(nb);
        for (int l = 0; l <= lmax; ++l) {
            cplx const c = emp[l] * (1.0 - double(l) / (lmax + 1));
            seq[l] += c;
            if (l > 0)
                seq[nb - l] += std::conj(c);
        }
        fft::c2c(seq, tr, -1);
        double lo = tr[0].real(), hi = tr[0].real();
        for (auto const &z : tr) {
            lo = std::min(lo, z.real());
            hi = std::max(hi, z.real());
        }
        mc.bochner_min = hi > 0.0 ? lo / hi : 0.0;

        double const s = mc.scale > 0.0 ? mc.scale : 1.0;
        report.worst_relative_deviation = std::max(report.worst_relative_deviation, mc.max_deviation / s);
        report.worst_relative_leakage = std::max(report.worst_relative_leakage, mc.max_leakage / s);
        report.modes.push_back(std::move(mc));
    }

    for (std::size_t q1 = 0; q1 < pos.size(); ++q1)
        for (std::size_t q2 = q1 + 1; q2 < pos.size(); ++q2) {
            std::vector<cplx> z;
            z.reserve(realizations.size());
            for (auto const &r : realizations) {
                cplx s{};
                for (int i = 0; i < n; ++i)
                    s += r.envelope[q1][i] * std::conj(r.envelope[q2][i]);
                z.push_back(s / double(n));
            }
            cplx m{};
            for (auto const &v : z)
                m += v;
            m /= count;
            double var = 0.0;
            for (auto const &v : z)
                var += std::norm(v - m);
            var /= (count - 1.0);
            report.cross.push_back({pos[q1]->k, pos[q2]->k, std::abs(m), std::sqrt(var / count)});
        }
    return report;
}

} // namespace qlkit
