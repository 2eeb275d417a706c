#include "qlkit/spline.hpp"

#include <cmath>

namespace qlkit::spline {

std::vector<double> periodic_coefficients(std::span<double const> values)
{
    int const n = static_cast<int>(values.size());
    double const z = std::sqrt(3.0) - 2.0;
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i)
        c[i] = 6.0 * values[i];

    // z^n underflows quickly; the truncated sums are exact to round-off.
    double const zn = std::pow(z, n);
    int const terms = std::min(n, 40);

    double acc = 0.0, zk = 1.0;
    for (int i = 0; i < terms; ++i) {
        acc += zk * c[(n - i) % n];
        zk *= z;
    }
    std::vector<double> cp(n);
    cp[0] = acc / (1.0 - zn);
    for (int k = 1; k < n; ++k)
        cp[k] = c[k] + z * cp[k - 1];

    acc = 0.0;
    zk = 1.0;
    for (int i = 0; i < terms; ++i) {
        acc += zk * cp[(n - 1 + i) % n];
        zk *= z;
    }
    std::vector<double> cm(n);
    cm[n - 1] = -z * acc / (1.0 - zn);
    for (int k = n - 2; k >= 0; --k)
        cm[k] = z * (cm[k + 1] - cp[k]);
    return cm;
}

void shift_periodic(std::span<double> values, double displacement)
{
    int const n = static_cast<int>(values.size());
    if (displacement == 0.0 || n == 0)
        return;
    auto const c = periodic_coefficients(values);
    double const fl = std::floor(-displacement);
    double const t = -displacement - fl;
    long const offset = static_cast<long>(fl);
    double const t2 = t * t, t3 = t2 * t;
    double const w0 = (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0;
    double const w1 = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    double const w2 = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    double const w3 = t3 / 6.0;
    auto wrap = [n](long k) {
        long r = k % n;
        return static_cast<int>(r < 0 ? r + n : r);
    };
    for (int i = 0; i < n; ++i) {
        long const b = i + offset;
        values[i] = w0 * c[wrap(b - 1)] + w1 * c[wrap(b)] + w2 * c[wrap(b + 1)] +
                    w3 * c[wrap(b + 2)];
    }
}

} // namespace qlkit::spline
