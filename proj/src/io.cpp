#include "qlkit/io.hpp"

#include "qlkit/config.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace qlkit::io {
namespace {

using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

std::vector<std::string> split(std::string const &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

double to_double(std::string const &s)
{
    try {
        std::size_t pos = 0;
        double const x = std::stod(s, &pos);
        if (pos != s.size() && s.find_first_not_of(" \r", pos) != std::string::npos)
            throw Error("");
        return x;
    } catch (...) {
        throw Error("csv: not a number: '" + s + "'");
    }
}

template <class T>
void put(std::ostream &os, T x)
{
    os.write(reinterpret_cast<char const *>(&x), sizeof(T));
}

template <class T>
T take(std::istream &is)
{
    T x{};
    if (!is.read(reinterpret_cast<char *>(&x), sizeof(T)))
        throw Error("checkpoint: truncated input");
    return x;
}

// Recovers (nv, v_max) from equally spaced nodes -v_max..v_max.
VelocityGrid grid_from_nodes(std::vector<double> const &v)
{
    if (v.size() < 2)
        throw Error("csv: need at least two velocity nodes");
    double const vmax = v.back();
    if (std::abs(v.front() + vmax) > 1e-9 * std::max(1.0, vmax))
        throw Error("csv: velocity nodes are not symmetric");
    auto const vg = make_vgrid(static_cast<int>(v.size()), vmax);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - vg.v(static_cast<int>(i))) > 1e-9 * std::max(1.0, vmax))
            throw Error("csv: velocity nodes are not uniform");
    return vg;
}

} // namespace

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_distribution_csv(std::ostream &os, Distribution const &f)
{
    auto const &g = f.grid;
    os << "v\\x";
    for (int j = 0; j < g.nx(); ++j)
        os << ',' << fmt(g.x(j));
    os << '\n';
    for (int i = 0; i < g.nv(); ++i) {
        os << fmt(g.v(i));
        for (int j = 0; j < g.nx(); ++j)
            os << ',' << fmt(f.at(j, i));
        os << '\n';
    }
}

Distribution read_distribution_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw Error("csv: empty distribution file");
    auto head = split(line);
    if (head.size() < 3 || head[0].rfind("v\\x", 0) != 0)
        throw Error("csv: distribution header must start with v\\x");
    int const nx = static_cast<int>(head.size()) - 1;
    double const dx = to_double(head[2]) - to_double(head[1]);
    std::vector<double> v;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r")
            continue;
        auto cells = split(line);
        if (static_cast<int>(cells.size()) != nx + 1)
            throw Error("csv: ragged distribution row");
        v.push_back(to_double(cells[0]));
        std::vector<double> r(nx);
        for (int j = 0; j < nx; ++j)
            r[j] = to_double(cells[j + 1]);
        rows.push_back(std::move(r));
    }
    auto const vg = grid_from_nodes(v);
    Distribution f(make_grid(nx, vg.nv, vg.v_max, dx * nx));
    for (int i = 0; i < vg.nv; ++i)
        for (int j = 0; j < nx; ++j)
            f.at(j, i) = rows[i][j];
    return f;
}

void write_checkpoint(std::ostream &os, Distribution const &f)
{
    put<std::int64_t>(os, f.grid.nx());
    put<std::int64_t>(os, f.grid.nv());
    put<double>(os, f.grid.v_max());
    os.write(reinterpret_cast<char const *>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

Distribution read_checkpoint(std::istream &is, double x_length)
{
    auto const nx = take<std::int64_t>(is);
    auto const nv = take<std::int64_t>(is);
    double const vmax = take<double>(is);
    if (nx <= 0 || nv <= 0 || nx > (1 << 24) || nv > (1 << 24))
        throw Error("checkpoint: implausible header");
    Distribution f(make_grid(static_cast<int>(nx), static_cast<int>(nv), vmax, x_length));
    if (!is.read(reinterpret_cast<char *>(f.values.data()),
                 static_cast<std::streamsize>(f.values.size() * sizeof(double))))
        throw Error("checkpoint: truncated payload");
    return f;
}

void write_profile_csv(std::ostream &os, VelocityGrid const &vg, std::vector<double> const &values,
                       std::string const &name)
{
    os << "v," << name << '\n';
    for (int i = 0; i < vg.nv; ++i)
        os << fmt(vg.v(i)) << ',' << fmt(values[i]) << '\n';
}

VelocityProfile read_profile_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw Error("csv: empty profile file");
    std::vector<double> v, y;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r")
            continue;
        auto cells = split(line);
        if (cells.size() != 2)
            throw Error("csv: profile rows have two columns");
        v.push_back(to_double(cells[0]));
        y.push_back(to_double(cells[1]));
    }
    return {grid_from_nodes(v), std::move(y)};
}

void write_realization_csv(std::ostream &os, FieldRealization const &r)
{
    os << "tau";
    for (auto k : r.k)
        os << ",re_" << k << ",im_" << k;
    os << '\n';
    for (int n = 0; n < r.time.samples; ++n) {
        double const tau = n * r.time.dtau;
        os << fmt(tau);
        for (std::size_t m = 0; m < r.mode_count(); ++m) {
            auto const z = r.potential_at(m, tau);
            os << ',' << fmt(z.real()) << ',' << fmt(z.imag());
        }
        os << '\n';
    }
}

void write_trajectory_csv(std::ostream &os, TrajectoryRecord const &rec)
{
    os << "t,mass,l2,kinetic,field_energy,total_energy,max_grad_field,min_f,max_f\n";
    for (std::size_t n = 0; n < rec.t.size(); ++n)
        os << fmt(rec.t[n]) << ',' << fmt(rec.mass[n]) << ',' << fmt(rec.l2[n]) << ','
           << fmt(rec.kinetic[n]) << ',' << fmt(rec.field_energy[n]) << ','
           << fmt(rec.total_energy[n]) << ',' << fmt(rec.max_grad_field[n]) << ','
           << fmt(rec.min_f[n]) << ',' << fmt(rec.max_f[n]) << '\n';
}

void write_profile_series_csv(std::ostream &os, VelocityGrid const &vg,
                              std::vector<double> const &times,
                              std::vector<std::vector<double>> const &profiles)
{
    os << "t,v,value\n";
    for (std::size_t n = 0; n < profiles.size(); ++n)
        for (int i = 0; i < vg.nv; ++i)
            os << fmt(times[n]) << ',' << fmt(vg.v(i)) << ',' << fmt(profiles[n][i]) << '\n';
}

void write_roots_csv(std::ostream &os, std::vector<DispersionRoot> const &roots)
{
    os << "k,re_lambda,im_lambda,residual,simple,iterations\n";
    for (auto const &r : roots)
        os << fmt(r.k) << ',' << fmt(r.lambda.real()) << ',' << fmt(r.lambda.imag()) << ','
           << fmt(r.residual) << ',' << (r.simple ? 1 : 0) << ',' << r.iterations << '\n';
}

std::string roots_json(std::vector<RootSearch> const &searches,
                       std::optional<StabilityMargin> const &margin)
{
    json j;
    j["searches"] = json::array();
    for (auto const &s : searches) {
        json roots = json::array();
        for (auto const &r : s.roots)
            roots.push_back({{"k", r.k},
                             {"lambda", {r.lambda.real(), r.lambda.imag()}},
                             {"residual", r.residual},
                             {"simple", r.simple}});
        j["searches"].push_back({{"winding", s.winding},
                                 {"flagged", s.flagged},
                                 {"diagnostic", s.diagnostic},
                                 {"roots", roots}});
    }
    if (margin) {
        json m{{"kappa", margin->kappa},
               {"k_at_min", margin->k_at_min},
               {"y_at_min", margin->y_at_min},
               {"per_k", margin->per_k}};
        if (margin->unstable_root)
            m["unstable_root"] = {{"k", margin->unstable_root->k},
                                  {"lambda",
                                   {margin->unstable_root->lambda.real(),
                                    margin->unstable_root->lambda.imag()}}};
        j["stability_margin"] = m;
    }
    return j.dump(2) + "\n";
}

void write_lambda_csv(std::ostream &os, QLRecord const &rec)
{
    os << "t,mode,k,re_lambda,im_lambda\n";
    auto const &modes = rec.final_state.modes;
    for (std::size_t n = 0; n < rec.t.size(); ++n)
        for (std::size_t m = 0; m < rec.lambda[n].size(); ++m)
            os << fmt(rec.t[n]) << ',' << m << ',' << fmt(modes[m].k) << ','
               << fmt(rec.lambda[n][m].real()) << ',' << fmt(rec.lambda[n][m].imag()) << '\n';
}

void write_stats_csv(std::ostream &os, std::vector<EnsembleStats> const &stats)
{
    os << "epsilon,t,v,mean,stderr\n";
    for (auto const &s : stats)
        for (std::size_t n = 0; n < s.times.size(); ++n)
            for (int i = 0; i < s.vgrid.nv; ++i)
                os << fmt(s.epsilon) << ',' << fmt(s.times[n]) << ',' << fmt(s.vgrid.v(i)) << ','
                   << fmt(s.mean[n][i]) << ',' << fmt(s.stderr_[n][i]) << '\n';
}

void write_errors_csv(std::ostream &os, ConvergenceReport const &rep)
{
    os << "epsilon,l2_error,sup_l2_error,mc_stderr,slope,slope_stderr,intercept\n";
    for (std::size_t i = 0; i < rep.stats.size(); ++i)
        os << fmt(rep.epsilons[i]) << ',' << fmt(rep.errors[i]) << ','
           << fmt(rep.stats[i].sup_l2_error) << ',' << fmt(rep.stats[i].mc_stderr_l2) << ','
           << fmt(rep.fit.slope) << ',' << fmt(rep.fit.slope_stderr) << ','
           << fmt(rep.fit.intercept) << '\n';
}

std::string manifest_json(EnsembleConfig const &cfg, std::vector<EnsembleStats> const &stats,
                          ConvergenceReport const *report, double wall_seconds)
{
    json j;
    j["tool"] = "qlkit";
    j["version"] = QLKIT_VERSION;
    j["schema_version"] = config_schema_version;
    j["compiler"] = __VERSION__;
    j["grid"] = {{"nx", cfg.nx}, {"nv", cfg.nv}, {"v_max", cfg.v_max}};
    j["master_seed"] = cfg.seed;
    j["members"] = cfg.members;
    j["T"] = cfg.T;
    j["wall_seconds"] = wall_seconds;
    json runs = json::array();
    for (auto const &s : stats)
        runs.push_back({{"epsilon", s.epsilon},
                        {"dt", s.dt},
                        {"final_l2_error", s.final_l2_error},
                        {"sup_l2_error", s.sup_l2_error},
                        {"mc_stderr_l2", s.mc_stderr_l2},
                        {"flux_relative_error", s.flux_relative_error},
                        {"max_step_mass_change", s.max_step_mass_change},
                        {"weak_pairings_mean", s.weak_pairings_mean},
                        {"weak_pairings_diffusion", s.weak_pairings_diff},
                        {"wall_seconds", s.wall_seconds}});
    j["runs"] = runs;
    if (!stats.empty())
        j["seeds"] = stats.front().seeds;
    if (report) {
        auto fit = [](LogLogFit const &f) {
            return json{{"slope", f.slope},
                        {"slope_stderr", f.slope_stderr},
                        {"intercept", f.intercept},
                        {"degenerate", f.degenerate},
                        {"note", f.note}};
        };
        j["error_fit"] = fit(report->fit);
        j["strictly_decreasing"] = report->strictly_decreasing;
        json ob = json::array();
        for (auto const &p : report->obstruction)
            ob.push_back({{"epsilon", p.epsilon}, {"flux_l2", p.flux_l2}});
        j["obstruction"] = {{"points", ob},
                            {"fit", fit(report->obstruction_fit)},
                            {"decreasing", report->obstruction_decreasing}};
        j["discretization_budget"] = {{"diffusion_dt", report->budget.diffusion_dt},
                                      {"vlasov", report->budget.vlasov},
                                      {"total", report->budget.total}};
    }
    return j.dump(2) + "\n";
}

} // namespace qlkit::io
