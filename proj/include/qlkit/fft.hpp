#pragma once

// Thin FFTW wrappers. Plans are cached per shape and executed with the
// new-array interface, so concurrent callers can share them.

#include <complex>
#include <span>

namespace qlkit::fft {

using cplx = std::complex<double>;

/// Forward transform along x of an nx-by-nv row-major array, one transform
/// per v column. out has (nx/2 + 1) * nv entries, out[m * nv + i], and is
/// normalized by 1/nx.
void forward_x(int nx, int nv, std::span<double const> in, std::span<cplx> out);

/// Inverse of forward_x (no normalization). in is not modified.
void backward_x(int nx, int nv, std::span<cplx const> in, std::span<double> out);

/// Unnormalized 1D complex transform; sign = -1 forward, +1 backward.
void c2c(std::span<cplx const> in, std::span<cplx> out, int sign);

/// Unnormalized 1D real-to-complex transform, out.size() == in.size()/2 + 1.
void r2c(std::span<double const> in, std::span<cplx> out);

/// Unnormalized 1D complex-to-real inverse; n is the real length.
void c2r(std::span<cplx const> in, std::span<double> out);

} // namespace qlkit::fft
