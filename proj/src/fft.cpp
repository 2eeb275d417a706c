#include "qlkit/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace qlkit::fft {
namespace {

enum class Kind { r2c_x, c2r_x, c2c_fwd, c2c_bwd, r2c_1d, c2r_1d };

std::mutex plan_mutex;
std::map<std::tuple<Kind, int, int>, fftw_plan> plan_cache;

fftw_plan make_plan(Kind kind, int n, int howmany)
{
    unsigned const flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::vector<double> rbuf(static_cast<std::size_t>(n) * howmany + 2);
    std::vector<cplx> cbuf(static_cast<std::size_t>(n) * howmany + 2);
    auto *r = rbuf.data();
    auto *c = reinterpret_cast<fftw_complex *>(cbuf.data());
    switch (kind) {
    case Kind::r2c_x:
        return fftw_plan_many_dft_r2c(1, &n, howmany, r, nullptr, howmany, 1, c, nullptr,
                                      howmany, 1, flags);
    case Kind::c2r_x:
        return fftw_plan_many_dft_c2r(1, &n, howmany, c, nullptr, howmany, 1, r, nullptr,
                                      howmany, 1, flags | FFTW_DESTROY_INPUT);
    case Kind::c2c_fwd:
        return fftw_plan_dft_1d(n, c, c + 0, FFTW_FORWARD, flags);
    case Kind::c2c_bwd:
        return fftw_plan_dft_1d(n, c, c + 0, FFTW_BACKWARD, flags);
    case Kind::r2c_1d:
        return fftw_plan_dft_r2c_1d(n, r, c, flags);
    case Kind::c2r_1d:
        return fftw_plan_dft_c2r_1d(n, c, r, flags | FFTW_DESTROY_INPUT);
    }
    return nullptr;
}

fftw_plan plan_for(Kind kind, int n, int howmany)
{
    std::lock_guard lock(plan_mutex);
    auto key = std::make_tuple(kind, n, howmany);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end())
        return it->second;
    auto p = make_plan(kind, n, howmany);
    plan_cache.emplace(key, p);
    return p;
}

fftw_complex *as_fftw(cplx *p) { return reinterpret_cast<fftw_complex *>(p); }

} // namespace

void forward_x(int nx, int nv, std::span<double const> in, std::span<cplx> out)
{
    auto plan = plan_for(Kind::r2c_x, nx, nv);
    // FFTW does not write to the input of an r2c transform.
    fftw_execute_dft_r2c(plan, const_cast<double *>(in.data()), as_fftw(out.data()));
    double const scale = 1.0 / nx;
    for (auto &z : out)
        z *= scale;
}

void backward_x(int nx, int nv, std::span<cplx const> in, std::span<double> out)
{
    auto plan = plan_for(Kind::c2r_x, nx, nv);
    std::vector<cplx> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(plan, as_fftw(scratch.data()), out.data());
}

void c2c(std::span<cplx const> in, std::span<cplx> out, int sign)
{
    int const n = static_cast<int>(in.size());
    auto plan = plan_for(sign < 0 ? Kind::c2c_fwd : Kind::c2c_bwd, n, 1);
    if (in.data() != out.data())
        std::memcpy(static_cast<void *>(out.data()), in.data(), sizeof(cplx) * n);
    fftw_execute_dft(plan, as_fftw(out.data()), as_fftw(out.data()));
}

void r2c(std::span<double const> in, std::span<cplx> out)
{
    int const n = static_cast<int>(in.size());
    auto plan = plan_for(Kind::r2c_1d, n, 1);
    fftw_execute_dft_r2c(plan, const_cast<double *>(in.data()), as_fftw(out.data()));
}

void c2r(std::span<cplx const> in, std::span<double> out)
{
    int const n = static_cast<int>(out.size());
    auto plan = plan_for(Kind::c2r_1d, n, 1);
    std::vector<cplx> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(plan, as_fftw(scratch.data()), out.data());
}

} // namespace qlkit::fft
