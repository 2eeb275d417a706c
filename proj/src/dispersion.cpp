#include "qlkit/dispersion.hpp"

#include "qlkit/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace qlkit {
namespace {

constexpr double pi = std::numbers::pi;

double trapezoid_mass(VelocityGrid const &vg, std::vector<double> const &values)
{
    auto const w = vg.weights();
    double s = 0.0;
    for (int i = 0; i < vg.nv; ++i)
        s += w[i] * values[i];
    return s;
}

double nyquist(ProfileG const &G) { return pi / G.vgrid.dv(); }

double window(double xi, double xn)
{
    double const a = std::abs(xi);
    if (a <= 0.5 * xn)
        return 1.0;
    if (a >= xn)
        return 0.0;
    double const u = (a - 0.5 * xn) / (0.5 * xn);
    return 0.5 * (1.0 + std::cos(pi * u));
}

// Upper bound of |(F G)(xi)|.
double transform_bound(ProfileG const &G, double xi)
{
    if (G.mixture) {
        double s = 0.0;
        for (auto const &c : *G.mixture)
            s += c.weight * std::exp(-0.5 * c.width * c.width * xi * xi);
        return s;
    }
    return window(xi, nyquist(G)) * trapezoid_mass(G.vgrid, G.values);
}

// Support scale used to pick the number of initial quadrature panels.
double velocity_extent(ProfileG const &G)
{
    if (G.mixture) {
        double e = 0.0;
        for (auto const &c : *G.mixture)
            e = std::max(e, std::abs(c.center) + 2.0 * c.width);
        return e;
    }
    double peak = 0.0;
    for (double x : G.values)
        peak = std::max(peak, x);
    double e = 0.0;
    for (int i = 0; i < G.vgrid.nv; ++i)
        if (G.values[i] > 1e-3 * peak)
            e = std::max(e, std::abs(G.vgrid.v(i)));
    return e;
}

double truncation_length(ProfileG const &G, double k, double gamma)
{
    auto bound = [&](double s) { return s * std::exp(-gamma * s) * transform_bound(G, k * s); };
    double const cap = G.mixture ? 1e7 : nyquist(G) / std::abs(k);
    double S = std::min(1.0, cap);
    constexpr int n = 2000;
    for (;;) {
        double peak = 0.0;
        int last = 0;
        std::vector<double> b(n + 1);
        for (int i = 1; i <= n; ++i) {
            b[i] = bound(S * i / n);
            peak = std::max(peak, b[i]);
        }
        for (int i = 1; i <= n; ++i)
            if (b[i] >= 1e-17 * peak)
                last = i;
        if (last < n || S >= cap)
            return std::min(cap, S * std::min(n, last + 1) / n);
        S = std::min(2.0 * S, cap);
    }
}

cplx mixture_velocity_integrand(std::vector<GaussianComponent> const &mix, double v, double k,
                                cplx lambda)
{
    double g = 0.0;
    for (auto const &c : mix) {
        double const u = (v - c.center) / c.width;
        g += c.weight * std::exp(-0.5 * u * u) / (c.width * std::sqrt(2.0 * pi));
    }
    cplx const d = lambda + cplx(0.0, k * v);
    return g / (d * d);
}

// Evaluates 1 + K and dK/dlambda for one (G, k). Gridded profiles get a
// fixed composite Kronrod table of (F G)(k s) over the window support, so
// repeated evaluations cost one exponential per node.
class Evaluator {
public:
    Evaluator(ProfileG const &G, double k, double rel_tol) : G_(G), k_(k), rel_tol_(rel_tol)
    {
        if (G.mixture)
            return;
        double const S = nyquist(G) / std::abs(k);
        double const nu = im_cap_ + std::abs(k) * G.vgrid.v_max;
        int const panels = std::max(4, static_cast<int>(std::ceil(S * nu / 4.0)));
        double const h = S / panels;
        auto const &xk = quad::detail::xgk;
        auto const &wk = quad::detail::wgk;
        for (int p = 0; p < panels; ++p) {
            double const c = (p + 0.5) * h, r = 0.5 * h;
            for (int j = 0; j < 8; ++j) {
                if (j == 7) {
                    push(c, r * wk[7]);
                } else {
                    push(c - r * xk[j], r * wk[j]);
                    push(c + r * xk[j], r * wk[j]);
                }
            }
        }
    }

    KernelValue operator()(cplx lambda) const
    {
        if (G_.mixture || std::abs(lambda.imag()) > im_cap_ || !(lambda.real() > 0.0))
            return kernel_K(G_, k_, lambda, rel_tol_);
        KernelValue out;
        for (std::size_t n = 0; n < s_.size(); ++n) {
            cplx const e = std::exp(-lambda * s_[n]) * fg_[n];
            out.value += e;
            out.derivative -= s_[n] * e;
        }
        out.evaluations = static_cast<int>(s_.size());
        return out;
    }

private:
    void push(double s, double w)
    {
        s_.push_back(s);
        fg_.push_back(w * s * profile_transform(G_, k_ * s));
    }

    ProfileG const &G_;
    double k_, rel_tol_;
    double im_cap_ = 8.0;
    std::vector<double> s_;
    std::vector<cplx> fg_; ///< weight * s * (F G)(k s)
};

} // namespace

ProfileG maxwellian_profile(VelocityGrid const &vg, double sigma)
{
    return mixture_profile(vg, {{1.0, 0.0, sigma}});
}

ProfileG mixture_profile(VelocityGrid const &vg, std::vector<GaussianComponent> components)
{
    if (components.empty())
        throw Error("profile: empty Gaussian mixture");
    double total = 0.0;
    for (auto const &c : components) {
        if (!(c.weight >= 0.0) || !(c.width > 0.0))
            throw Error("profile: mixture weights must be >= 0 and widths > 0");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw Error("profile: mixture weights must sum to 1");
    ProfileG G;
    G.vgrid = vg;
    G.values.resize(vg.nv);
    for (int i = 0; i < vg.nv; ++i) {
        double g = 0.0;
        for (auto const &c : components) {
            double const u = (vg.v(i) - c.center) / c.width;
            g += c.weight * std::exp(-0.5 * u * u) / (c.width * std::sqrt(2.0 * pi));
        }
        G.values[i] = g;
    }
    G.mixture = std::move(components);
    return G;
}

ProfileG bump_on_tail_profile(VelocityGrid const &vg)
{
    return mixture_profile(vg, {{0.9, 0.0, 1.0}, {0.1, 4.5, 0.5}});
}

ProfileG gridded_profile(VelocityGrid const &vg, std::vector<double> values)
{
    if (static_cast<int>(values.size()) != vg.nv)
        throw Error("profile: value count does not match the velocity grid");
    for (double x : values)
        if (!std::isfinite(x) || x < 0.0)
            throw Error("profile: values must be finite and >= 0");
    double const m = trapezoid_mass(vg, values);
    if (std::abs(m - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "profile: mass " << m << " differs from 1";
        throw Error(msg.str());
    }
    return {vg, std::move(values), std::nullopt};
}

cplx profile_transform(ProfileG const &G, double xi)
{
    if (G.mixture) {
        cplx s{};
        for (auto const &c : *G.mixture)
            s += c.weight * std::exp(-0.5 * c.width * c.width * xi * xi) *
                 std::polar(1.0, -c.center * xi);
        return s;
    }
    double const w = window(xi, nyquist(G));
    if (w == 0.0)
        return {};
    auto const &vg = G.vgrid;
    // e^{-i v_i xi} by recurrence from v_0 = -v_max.
    cplx z = std::polar(1.0, vg.v_max * xi);
    cplx const r = std::polar(1.0, -vg.dv() * xi);
    cplx s = 0.5 * G.values.front() * z;
    for (int i = 1; i + 1 < vg.nv; ++i) {
        z *= r;
        s += G.values[i] * z;
    }
    z *= r;
    s += 0.5 * G.values.back() * z;
    return w * vg.dv() * s;
}

double analyticity_bound(ProfileG const &G, double k)
{
    if (!G.mixture)
        return 0.0;
    double sigma = std::numeric_limits<double>::infinity();
    for (auto const &c : *G.mixture)
        sigma = std::min(sigma, c.width);
    return -3.0 * sigma * std::abs(k);
}

KernelValue kernel_K(ProfileG const &G, double k, cplx lambda, double rel_tol)
{
    if (k == 0.0 || !std::isfinite(k))
        throw Error("kernel_K: k must be finite and nonzero");
    double const bound = analyticity_bound(G, k);
    if (!(lambda.real() > bound)) {
        std::ostringstream msg;
        msg << "kernel_K: Re lambda = " << lambda.real() << " is outside the analyticity strip Re lambda > "
            << bound << (G.mixture ? "" : " (gridded profile)");
        throw Error(msg.str());
    }
    double const S = truncation_length(G, k, lambda.real());
    double const nu = std::abs(lambda.imag()) + std::abs(k) * velocity_extent(G);
    int const panels = std::clamp(static_cast<int>(S * nu / pi) + 4, 4, 2000);
    auto f = [&](double s) {
        cplx const e = std::exp(-lambda * s) * profile_transform(G, k * s);
        return std::array<cplx, 2>{s * e, -s * s * e};
    };
    auto const r = quad::integrate<std::array<cplx, 2>>(f, 0.0, S, rel_tol, 1e-15, panels, 40000);
    return {r.value[0], r.value[1], r.error, r.evaluations};
}

cplx kernel_K_velocity(ProfileG const &G, double k, cplx lambda, double rel_tol)
{
    if (!(lambda.real() > 0.0))
        throw Error("kernel_K_velocity: requires Re lambda > 0");
    if (k == 0.0)
        throw Error("kernel_K_velocity: k must be nonzero");
    if (!G.mixture) {
        auto const w = G.vgrid.weights();
        cplx s{};
        for (int i = 0; i < G.vgrid.nv; ++i) {
            cplx const d = lambda + cplx(0.0, k * G.vgrid.v(i));
            s += w[i] * G.values[i] / (d * d);
        }
        return s;
    }
    auto const &mix = *G.mixture;
    double lo = mix.front().center, hi = lo;
    for (auto const &c : mix) {
        lo = std::min(lo, c.center - 14.0 * c.width);
        hi = std::max(hi, c.center + 14.0 * c.width);
    }
    auto f = [&](double v) { return mixture_velocity_integrand(mix, v, k, lambda); };
    // Split at the near-pole v = -Im lambda / k.
    double const pole = -lambda.imag() / k;
    std::vector<double> cuts{lo};
    if (pole > lo && pole < hi)
        cuts.push_back(pole);
    cuts.push_back(hi);
    cplx total{};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += quad::integrate<cplx>(f, cuts[i], cuts[i + 1], rel_tol, 1e-16, 32, 40000).value;
    return total;
}

cplx dispersion_function(ProfileG const &G, double k, cplx lambda, double rel_tol)
{
    return 1.0 + kernel_K(G, k, lambda, rel_tol).value;
}

WindingResult winding_number(ProfileG const &G, double k, Rect const &rect, double rel_tol)
{
    if (!(rect.re_hi > rect.re_lo && rect.im_hi > rect.im_lo))
        throw Error("winding_number: empty rectangle");
    WindingResult out;
    out.min_modulus = std::numeric_limits<double>::infinity();
    Evaluator const kernel(G, k, rel_tol);
    auto eval = [&](cplx z) {
        ++out.evaluations;
        cplx const d = 1.0 + kernel(z).value;
        out.min_modulus = std::min(out.min_modulus, std::abs(d));
        return d;
    };
    std::array<cplx, 5> const corners{cplx(rect.re_lo, rect.im_lo), cplx(rect.re_hi, rect.im_lo),
                                      cplx(rect.re_hi, rect.im_hi), cplx(rect.re_lo, rect.im_hi),
                                      cplx(rect.re_lo, rect.im_lo)};
    double const scale = std::max(rect.re_hi - rect.re_lo, rect.im_hi - rect.im_lo);

    // Phase accumulated along [a, b], bisecting until each step is < pi/8.
    auto segment = [&](auto &&self, cplx a, cplx fa, cplx b, cplx fb, int depth) -> double {
        double const dphi = std::arg(fb / fa);
        if (std::abs(dphi) < pi / 8.0 || depth > 40 || std::abs(b - a) < 1e-13 * scale)
            return dphi;
        cplx const m = 0.5 * (a + b);
        cplx const fm = eval(m);
        return self(self, a, fa, m, fm, depth + 1) + self(self, m, fm, b, fb, depth + 1);
    };

    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        constexpr int n = 16;
        cplx prev = corners[e];
        cplx fprev = eval(prev);
        for (int i = 1; i <= n; ++i) {
            cplx const z = corners[e] + (corners[e + 1] - corners[e]) * (double(i) / n);
            cplx const fz = eval(z);
            total += segment(segment, prev, fprev, z, fz, 0);
            prev = z;
            fprev = fz;
        }
    }
    out.total_phase = total;
    out.count = static_cast<int>(std::lround(total / (2.0 * pi)));
    return out;
}

NewtonResult newton_root(ProfileG const &G, double k, cplx seed, double tol, double rel_tol,
                         int max_iter, std::optional<double> min_re)
{
    NewtonResult res;
    res.root.k = k;
    auto project = [&](cplx z) {
        if (min_re && z.real() < *min_re)
            z.real(*min_re);
        return z;
    };
    double const floor_re = analyticity_bound(G, k);
    Evaluator const kernel(G, k, rel_tol);
    cplx lam = project(seed);
    auto kv = kernel(lam);
    cplx D = 1.0 + kv.value;
    for (int it = 0; it < max_iter; ++it) {
        res.root.iterations = it;
        if (std::abs(D) <= tol) {
            res.converged = true;
            break;
        }
        if (kv.derivative == 0.0) {
            res.diagnostic = "zero derivative";
            break;
        }
        cplx const full = -D / kv.derivative;
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
            cplx const trial = project(lam + t * full);
            if (trial == lam)
                break;
            if (!(trial.real() > floor_re))
                continue;
            auto const kt = kernel(trial);
            cplx const Dt = 1.0 + kt.value;
            if (std::abs(Dt) < std::abs(D)) {
                lam = trial;
                kv = kt;
                D = Dt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.diagnostic = min_re && lam.real() <= *min_re ? "pinned at the Re lambda floor"
                                                             : "no descent step";
            break;
        }
    }
    if (!res.converged && std::abs(D) <= tol)
        res.converged = true;
    if (!res.converged && res.diagnostic.empty())
        res.diagnostic = "iteration limit";
    res.root.lambda = lam;
    res.root.residual = std::abs(D);
    return res;
}

RootSearch find_roots(ProfileG const &G, double k, Rect const &rect, double rel_tol)
{
    RootSearch out;
    double const wind_tol = std::max(rel_tol, 1e-8);
    out.winding = winding_number(G, k, rect, wind_tol).count;

    auto inside = [](Rect const &r, cplx z) {
        double const sx = 1e-9 * (r.re_hi - r.re_lo), sy = 1e-9 * (r.im_hi - r.im_lo);
        return z.real() >= r.re_lo - sx && z.real() <= r.re_hi + sx && z.imag() >= r.im_lo - sy &&
               z.imag() <= r.im_hi + sy;
    };
    auto add_root = [&](DispersionRoot const &r) {
        for (auto const &q : out.roots)
            if (std::abs(q.lambda - r.lambda) < 1e-7 * (1.0 + std::abs(r.lambda)))
                return;
        out.roots.push_back(r);
    };

    auto search = [&](auto &&self, Rect const &r, int count, int depth) -> void {
        if (count <= 0)
            return;
        if (count == 1) {
            cplx const c(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
            auto nr = newton_root(G, k, c, 1e-9, rel_tol);
            if (nr.converged && inside(r, nr.root.lambda)) {
                add_root(nr.root);
                return;
            }
        }
        if (depth > 14) {
            out.flagged = true;
            out.diagnostic = "subdivision depth exhausted";
            return;
        }
        bool const split_re = (r.re_hi - r.re_lo) >= (r.im_hi - r.im_lo);
        for (double frac : {0.5173, 0.4611, 0.5529}) {
            Rect a = r, b = r;
            if (split_re) {
                double const m = r.re_lo + frac * (r.re_hi - r.re_lo);
                a.re_hi = m;
                b.re_lo = m;
            } else {
                double const m = r.im_lo + frac * (r.im_hi - r.im_lo);
                a.im_hi = m;
                b.im_lo = m;
            }
            auto const wa = winding_number(G, k, a, wind_tol);
            auto const wb = winding_number(G, k, b, wind_tol);
            if (wa.count + wb.count != count)
                continue; // a root close to the cut: move the cut
            self(self, a, wa.count, depth + 1);
            self(self, b, wb.count, depth + 1);
            return;
        }
        out.flagged = true;
        out.diagnostic = "child winding counts do not add up";
    };
    search(search, rect, out.winding, 0);

    std::sort(out.roots.begin(), out.roots.end(),
              [](auto const &a, auto const &b) { return a.lambda.real() > b.lambda.real(); });
    if (static_cast<int>(out.roots.size()) != out.winding) {
        out.flagged = true;
        std::ostringstream msg;
        msg << "winding count " << out.winding << " but " << out.roots.size()
            << " converged roots";
        out.diagnostic = msg.str();
    }
    return out;
}

double mirror_residual(ProfileG const &G, DispersionRoot const &root, double rel_tol)
{
    return std::abs(dispersion_function(G, -root.k, std::conj(root.lambda), rel_tol));
}

StabilityMargin stability_margin(ProfileG const &G, int k_max, double x_length)
{
    if (!G.mixture)
        throw Error("stability_margin: needs a closed-form profile");
    if (k_max < 1)
        throw Error("stability_margin: k_max must be >= 1");
    StabilityMargin out;
    out.kappa = 1.0;
    double reach = 0.0;
    for (auto const &c : *G.mixture)
        reach = std::max(reach, std::abs(c.center) + 10.0 * c.width);
    constexpr double rel_tol = 1e-9;

    for (int m = 1; m <= k_max; ++m) {
        double const k = 2.0 * pi * m / x_length;
        // |K| <= 1/R^2 for Re lambda >= R, and |K| is small for
        // |Im lambda| beyond the resonant band, so this box holds every
        // zero with Re lambda >= 0.
        double const Y = std::abs(k) * reach + 4.0;
        Rect const box{0.0, 4.0, -Y, Y};
        auto const w = winding_number(G, k, box, 1e-8);
        if (w.count > 0) {
            auto rs = find_roots(G, k, box, rel_tol);
            out.kappa = 0.0;
            out.k_at_min = k;
            out.per_k.push_back(0.0);
            if (!rs.roots.empty()) {
                out.unstable_root = rs.roots.front();
                out.y_at_min = rs.roots.front().lambda.imag();
            }
            return out;
        }

        auto mod = [&](double y) { return std::abs(dispersion_function(G, k, cplx(0.0, y), rel_tol)); };
        double best = std::numeric_limits<double>::infinity(), best_y = 0.0, prev = 0.0;
        for (int n = 400;; n *= 2) {
            double const h = 2.0 * Y / n;
            for (int i = 0; i <= n; ++i) {
                double const y = -Y + i * h;
                double const v = mod(y);
                if (v < best) {
                    best = v;
                    best_y = y;
                }
            }
            // Golden-section polish around the best sample.
            double a = best_y - h, b = best_y + h;
            double const g = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - g * (b - a), d = a + g * (b - a);
            double fc = mod(c), fd = mod(d);
            for (int it = 0; it < 60 && b - a > 1e-10 * (1.0 + std::abs(best_y)); ++it) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = mod(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = mod(d);
                }
            }
            if (std::min(fc, fd) < best) {
                best = std::min(fc, fd);
                best_y = fc < fd ? c : d;
            }
            if (n > 400 && std::abs(best - prev) <= 1e-2 * best)
                break;
            prev = best;
            if (n >= 6400)
                break;
        }
        double const km = std::min(1.0, best);
        out.per_k.push_back(km);
        if (km < out.kappa) {
            out.kappa = km;
            out.k_at_min = k;
            out.y_at_min = best_y;
        }
    }
    return out;
}

DecayFit landau_decay_fit(std::vector<double> const &t, std::vector<double> const &W)
{
    if (t.size() != W.size())
        throw Error("landau_decay_fit: t and W differ in length");
    if (t.size() < 20)
        throw Error("landau_decay_fit: needs at least 20 samples");
    for (double w : W)
        if (!(w > 0.0) || !std::isfinite(w))
            throw Error("landau_decay_fit: series must be positive and finite");

    std::size_t const n = t.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::log(W[i]);

    // Oscillating series: fit the envelope through the local maxima.
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1])
            idx.push_back(i);
    DecayFit fit;
    if (idx.size() >= 4) {
        fit.envelope = true;
    } else {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    }

    std::size_t const m = idx.size();
    std::vector<double> slope(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i)
        slope[i] = (y[idx[i + 1]] - y[idx[i]]) / (t[idx[i + 1]] - t[idx[i]]);

    // Longest run of slopes within 20% of the run mean.
    std::size_t best_lo = 0, best_len = 0;
    for (std::size_t lo = 0; lo < slope.size(); ++lo) {
        double mn = slope[lo], mx = slope[lo], sum = 0.0;
        for (std::size_t hi = lo; hi < slope.size(); ++hi) {
            mn = std::min(mn, slope[hi]);
            mx = std::max(mx, slope[hi]);
            sum += slope[hi];
            double const mean = sum / double(hi - lo + 1);
            double const lim = 0.2 * std::abs(mean);
            if (!(std::abs(mean) > 1e-12) || mx - mean > lim || mean - mn > lim)
                break;
            std::size_t const len = hi - lo + 1;
            if (len > best_len) {
                best_len = len;
                best_lo = lo;
            }
        }
    }
    if (best_len < 2)
        throw Error("landau_decay_fit: no window with a steady exponential rate");

    std::size_t const p0 = best_lo, p1 = best_lo + best_len; // points idx[p0..p1]
    double st = 0.0, sy = 0.0;
    std::size_t const np = p1 - p0 + 1;
    for (std::size_t i = p0; i <= p1; ++i) {
        st += t[idx[i]];
        sy += y[idx[i]];
    }
    double const tm = st / np, ym = sy / np;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = p0; i <= p1; ++i) {
        double const a = t[idx[i]] - tm, b = y[idx[i]] - ym;
        stt += a * a;
        sty += a * b;
        syy += b * b;
    }
    fit.rate = sty / stt;
    fit.intercept = ym - fit.rate * tm;
    double ss_res = 0.0;
    for (std::size_t i = p0; i <= p1; ++i) {
        double const r = y[idx[i]] - (fit.intercept + fit.rate * t[idx[i]]);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.t_begin = t[idx[p0]];
    fit.t_end = t[idx[p1]];
    fit.points = static_cast<int>(np);
    return fit;
}

} // namespace qlkit
