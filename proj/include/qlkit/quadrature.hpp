#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for real, complex or small
// array-valued integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

namespace qlkit::quad {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(std::complex<double> z) { return std::abs(z); }
template <class T, std::size_t N>
double magnitude(std::array<T, N> const &a)
{
    double m = 0.0;
    for (auto const &x : a)
        m = std::max(m, magnitude(x));
    return m;
}

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
void add_scaled(T &acc, double w, T const &v)
{
    if constexpr (requires { acc.size(); }) {
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc[i] += w * v[i];
    } else {
        acc += w * v;
    }
}

template <class T>
T difference(T const &a, T const &b)
{
    if constexpr (requires { a.size(); }) {
        T d = a;
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = a[i] - b[i];
        return d;
    } else {
        return a - b;
    }
}

template <class T, class F>
std::pair<T, T> gk15(F &f, double a, double b)
{
    double const c = 0.5 * (a + b), h = 0.5 * (b - a);
    T kron{}, gauss{};
    T const fc = f(c);
    add_scaled<T, F>(kron, wgk[7], fc);
    add_scaled<T, F>(gauss, wg[3], fc);
    for (int j = 0; j < 7; ++j) {
        double const dx = h * xgk[j];
        T const f1 = f(c - dx), f2 = f(c + dx);
        add_scaled<T, F>(kron, wgk[j], f1);
        add_scaled<T, F>(kron, wgk[j], f2);
        if (j % 2 == 1) {
            add_scaled<T, F>(gauss, wg[j / 2], f1);
            add_scaled<T, F>(gauss, wg[j / 2], f2);
        }
    }
    T k{}, g{};
    add_scaled<T, F>(k, h, kron);
    add_scaled<T, F>(g, h, gauss);
    return {k, difference(k, g)};
}

} // namespace detail

/// Integrates f over [a, b] to max(abs_tol, rel_tol * |I|). The first
/// pass splits [a, b] into `initial_panels` equal pieces, which helps
/// oscillatory integrands.
template <class T, class F>
Result<T> integrate(F &&f, double a, double b, double rel_tol, double abs_tol = 0.0,
                    int initial_panels = 1, int max_intervals = 4000)
{
    struct Interval {
        double a, b;
        T value;
        double error;
        bool operator<(Interval const &o) const { return error < o.error; }
    };
    std::priority_queue<Interval> heap;
    Result<T> res;
    T total{};
    double total_err = 0.0;
    for (int p = 0; p < initial_panels; ++p) {
        double const lo = a + (b - a) * p / initial_panels;
        double const hi = a + (b - a) * (p + 1) / initial_panels;
        auto [v, e] = detail::gk15<T>(f, lo, hi);
        res.evaluations += 15;
        double const err = magnitude(e);
        detail::add_scaled<T, F>(total, 1.0, v);
        total_err += err;
        heap.push({lo, hi, v, err});
    }
    while (static_cast<int>(heap.size()) < max_intervals) {
        double const tol = std::max(abs_tol, rel_tol * magnitude(total));
        if (total_err <= tol) {
            res.converged = true;
            break;
        }
        Interval worst = heap.top();
        heap.pop();
        double const mid = 0.5 * (worst.a + worst.b);
        auto [v1, e1] = detail::gk15<T>(f, worst.a, mid);
        auto [v2, e2] = detail::gk15<T>(f, mid, worst.b);
        res.evaluations += 30;
        detail::add_scaled<T, F>(total, -1.0, worst.value);
        detail::add_scaled<T, F>(total, 1.0, v1);
        detail::add_scaled<T, F>(total, 1.0, v2);
        total_err += magnitude(e1) + magnitude(e2) - worst.error;
        heap.push({worst.a, mid, v1, magnitude(e1)});
        heap.push({mid, worst.b, v2, magnitude(e2)});
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    T sum{};
    double err = 0.0;
    while (!heap.empty()) {
        detail::add_scaled<T, F>(sum, 1.0, heap.top().value);
        err += heap.top().error;
        heap.pop();
    }
    res.value = sum;
    res.error = err;
    if (!res.converged)
        res.converged = err <= std::max(abs_tol, rel_tol * magnitude(sum));
    return res;
}

} // namespace qlkit::quad
