#include "qlkit/config.hpp"

#include "qlkit/io.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace qlkit {
namespace {

using json = nlohmann::ordered_json;

void check_keys(json const &obj, std::string const &where, std::initializer_list<char const *> keys)
{
    if (!obj.is_object())
        throw Error("config: '" + where + "' must be an object");
    for (auto const &[key, value] : obj.items()) {
        bool known = false;
        for (auto const *k : keys)
            known = known || key == k;
        if (!known)
            throw Error("config: unknown key '" + key + "' in '" + where + "'");
    }
}

template <class T>
void get(json const &obj, char const *key, T &out)
{
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->template get<T>();
        } catch (json::exception const &e) {
            throw Error(std::string("config: bad value for '") + key + "': " + e.what());
        }
    }
}

cplx get_complex(json const &v)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2)
        return {v[0].get<double>(), v[1].get<double>()};
    throw Error("config: complex values are a number or [re, im]");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

GridConfig parse_grid(json const &j)
{
    check_keys(j, "grid", {"nx", "nv", "v_max", "x_length"});
    GridConfig g;
    get(j, "nx", g.nx);
    get(j, "nv", g.nv);
    get(j, "v_max", g.v_max);
    get(j, "x_length", g.x_length);
    return g;
}

CorrelationSpec parse_correlation(json const &j)
{
    check_keys(j, "correlation", {"add_conjugates", "modes"});
    bool conj = true;
    get(j, "add_conjugates", conj);
    CorrelationSpec spec;
    if (auto it = j.find("modes"); it != j.end())
        for (auto const &m : *it) {
            check_keys(m, "correlation.modes", {"k", "omega", "family", "amplitude", "tau"});
            CorrelationMode mode;
            get(m, "k", mode.k);
            get(m, "omega", mode.omega);
            get(m, "amplitude", mode.amplitude);
            get(m, "tau", mode.tau);
            std::string family = "triangular";
            get(m, "family", family);
            mode.family = parse_family(family);
            spec.modes.push_back(mode);
            if (conj)
                spec.modes.push_back({-mode.k, -mode.omega, mode.family, mode.amplitude, mode.tau});
        }
    validate(spec);
    return spec;
}

AnsatzSpec parse_ansatz(json const &j)
{
    check_keys(j, "ansatz", {"add_conjugates", "modes"});
    bool conj = true;
    get(j, "add_conjugates", conj);
    AnsatzSpec spec;
    if (auto it = j.find("modes"); it != j.end())
        for (auto const &m : *it) {
            check_keys(m, "ansatz.modes", {"k", "omega", "beta", "amplitude"});
            AnsatzMode mode;
            get(m, "k", mode.k);
            get(m, "omega", mode.omega);
            get(m, "beta", mode.beta);
            if (auto a = m.find("amplitude"); a != m.end())
                mode.amplitude = get_complex(*a);
            spec.modes.push_back(mode);
            if (conj)
                spec.modes.push_back({-mode.k, -mode.omega, mode.beta, std::conj(mode.amplitude)});
        }
    validate(spec);
    return spec;
}

InitialData parse_initial(json const &j)
{
    check_keys(j, "initial", {"sigma", "drift", "amplitude", "mode"});
    InitialData d;
    get(j, "sigma", d.sigma);
    get(j, "drift", d.drift);
    get(j, "amplitude", d.amplitude);
    get(j, "mode", d.mode);
    return d;
}

SolverConfig parse_solver(json const &j, SolverConfig s)
{
    check_keys(j, "solver", {"support_floor", "clip_tolerance", "enforce_dt", "clip_negative",
                             "overshoot_tolerance"});
    get(j, "support_floor", s.support_floor);
    get(j, "clip_tolerance", s.clip_tolerance);
    get(j, "enforce_dt", s.enforce_dt);
    get(j, "clip_negative", s.clip_negative);
    get(j, "overshoot_tolerance", s.overshoot_tolerance);
    return s;
}

json solver_json(SolverConfig const &s)
{
    return {{"support_floor", s.support_floor},
            {"clip_tolerance", s.clip_tolerance},
            {"enforce_dt", s.enforce_dt},
            {"clip_negative", s.clip_negative},
            {"overshoot_tolerance", s.overshoot_tolerance}};
}

ProfileConfig parse_profile(json const &j)
{
    check_keys(j, "profile", {"kind", "sigma", "components", "file"});
    ProfileConfig p;
    get(j, "kind", p.kind);
    get(j, "sigma", p.sigma);
    get(j, "file", p.file);
    if (auto it = j.find("components"); it != j.end())
        for (auto const &c : *it) {
            check_keys(c, "profile.components", {"weight", "center", "width"});
            GaussianComponent g;
            get(c, "weight", g.weight);
            get(c, "center", g.center);
            get(c, "width", g.width);
            p.components.push_back(g);
        }
    return p;
}

json profile_json(ProfileConfig const &p)
{
    json j{{"kind", p.kind}, {"sigma", p.sigma}};
    json comps = json::array();
    for (auto const &c : p.components)
        comps.push_back({{"weight", c.weight}, {"center", c.center}, {"width", c.width}});
    j["components"] = comps;
    if (!p.file.empty())
        j["file"] = p.file;
    return j;
}

} // namespace

ProfileG build_profile(ProfileConfig const &cfg, VelocityGrid const &vg)
{
    if (cfg.kind == "maxwellian")
        return maxwellian_profile(vg, cfg.sigma);
    if (cfg.kind == "mixture")
        return mixture_profile(vg, cfg.components);
    if (cfg.kind == "bump_on_tail")
        return bump_on_tail_profile(vg);
    if (cfg.kind == "csv") {
        std::ifstream in(cfg.file);
        if (!in)
            throw Error("profile: cannot open '" + cfg.file + "'");
        auto const p = io::read_profile_csv(in);
        if (!(p.vgrid == vg))
            throw Error("profile: grid in '" + cfg.file + "' differs from the configured grid");
        return gridded_profile(p.vgrid, p.values);
    }
    throw Error("profile: unknown kind '" + cfg.kind + "'");
}

PhaseSpaceGrid make_grid(GridConfig const &g) { return make_grid(g.nx, g.nv, g.v_max, g.x_length); }

RunConfig default_config()
{
    RunConfig c;
    c.ensemble = default_benchmark();
    c.correlation = c.ensemble.spec;
    c.ansatz = c.ensemble.obstruction.field;
    c.grid.nx = c.ensemble.nx;
    c.grid.nv = c.ensemble.nv;
    c.grid.v_max = c.ensemble.v_max;
    c.initial = c.ensemble.initial;
    return c;
}

RunConfig parse_config(std::string const &json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (json::parse_error const &e) {
        throw Error(std::string("config: ") + e.what());
    }
    check_keys(j, "root",
               {"schema_version", "grid", "correlation", "ansatz", "initial", "solver", "simulate",
                "diffusion", "dispersion", "quasilinear", "ensemble"});
    RunConfig c = default_config();
    if (!j.contains("schema_version"))
        throw Error("config: missing schema_version");
    get(j, "schema_version", c.schema_version);
    if (c.schema_version != config_schema_version)
        throw Error("config: unsupported schema_version " + std::to_string(c.schema_version) +
                    " (this build reads " + std::to_string(config_schema_version) + ")");

    if (j.contains("grid"))
        c.grid = parse_grid(j["grid"]);
    make_grid(c.grid);
    if (j.contains("correlation"))
        c.correlation = parse_correlation(j["correlation"]);
    if (j.contains("ansatz"))
        c.ansatz = parse_ansatz(j["ansatz"]);
    if (j.contains("initial"))
        c.initial = parse_initial(j["initial"]);
    if (j.contains("solver"))
        c.solver = parse_solver(j["solver"], c.solver);

    if (auto it = j.find("simulate"); it != j.end()) {
        check_keys(*it, "simulate",
                   {"source", "epsilon", "T", "dt", "seed", "backend", "every", "snapshot_every"});
        auto &s = c.simulate;
        get(*it, "source", s.source);
        get(*it, "epsilon", s.epsilon);
        get(*it, "T", s.T);
        get(*it, "dt", s.dt);
        get(*it, "seed", s.seed);
        get(*it, "backend", s.backend);
        get(*it, "every", s.every);
        get(*it, "snapshot_every", s.snapshot_every);
    }
    if (auto it = j.find("diffusion"); it != j.end()) {
        check_keys(*it, "diffusion",
                   {"source", "epsilon", "t", "seed", "field", "T", "dt", "theta", "outputs"});
        auto &d = c.diffusion;
        get(*it, "source", d.source);
        get(*it, "epsilon", d.epsilon);
        get(*it, "t", d.t);
        get(*it, "seed", d.seed);
        get(*it, "field", d.field);
        get(*it, "T", d.T);
        get(*it, "dt", d.dt);
        get(*it, "theta", d.theta);
        get(*it, "outputs", d.outputs);
    }
    if (auto it = j.find("dispersion"); it != j.end()) {
        check_keys(*it, "dispersion", {"profile", "k", "rect", "k_max", "rel_tol"});
        auto &d = c.dispersion;
        if (it->contains("profile"))
            d.profile = parse_profile((*it)["profile"]);
        get(*it, "k", d.k);
        get(*it, "k_max", d.k_max);
        get(*it, "rel_tol", d.rel_tol);
        if (auto r = it->find("rect"); r != it->end()) {
            if (!r->is_array() || r->size() != 4)
                throw Error("config: dispersion.rect is [re_lo, re_hi, im_lo, im_hi]");
            d.rect = Rect{(*r)[0].get<double>(), (*r)[1].get<double>(), (*r)[2].get<double>(),
                          (*r)[3].get<double>()};
        }
    }
    if (auto it = j.find("quasilinear"); it != j.end()) {
        check_keys(*it, "quasilinear",
                   {"profile", "nv", "v_max", "modes", "add_conjugates", "epsilon", "T", "dt",
                    "snapshot_every", "theta", "re_floor", "audit_every", "newton_tol",
                    "kernel_tol"});
        auto &q = c.quasilinear;
        if (it->contains("profile"))
            q.profile = parse_profile((*it)["profile"]);
        get(*it, "nv", q.nv);
        get(*it, "v_max", q.v_max);
        get(*it, "add_conjugates", q.add_conjugates);
        get(*it, "epsilon", q.epsilon);
        get(*it, "T", q.T);
        get(*it, "dt", q.dt);
        get(*it, "snapshot_every", q.snapshot_every);
        get(*it, "theta", q.ql.theta);
        get(*it, "re_floor", q.ql.re_floor);
        get(*it, "audit_every", q.ql.audit_every);
        get(*it, "newton_tol", q.ql.newton_tol);
        get(*it, "kernel_tol", q.ql.kernel_tol);
        if (auto m = it->find("modes"); m != it->end()) {
            q.modes.clear();
            for (auto const &e : *m) {
                check_keys(e, "quasilinear.modes", {"k", "lambda", "e0_sq"});
                QLModeConfig mc;
                get(e, "k", mc.k);
                get(e, "e0_sq", mc.e0_sq);
                if (auto l = e.find("lambda"); l != e.end())
                    mc.lambda = get_complex(*l);
                q.modes.push_back(mc);
            }
        }
    }

    auto &e = c.ensemble;
    e.spec = c.correlation;
    e.nx = c.grid.nx;
    e.nv = c.grid.nv;
    e.v_max = c.grid.v_max;
    e.initial = c.initial;
    if (!c.ansatz.modes.empty())
        e.obstruction.field = c.ansatz;
    if (auto it = j.find("ensemble"); it != j.end()) {
        check_keys(*it, "ensemble",
                   {"epsilons", "members", "seed", "T", "outputs", "dt_factor", "threads",
                    "diffusion_dt", "solver", "obstruction", "budget_members"});
        get(*it, "epsilons", e.epsilons);
        get(*it, "members", e.members);
        get(*it, "seed", e.seed);
        get(*it, "T", e.T);
        get(*it, "outputs", e.outputs);
        get(*it, "dt_factor", e.dt_factor);
        get(*it, "threads", e.threads);
        get(*it, "diffusion_dt", e.diffusion_dt);
        get(*it, "budget_members", c.budget_members);
        if (it->contains("solver"))
            e.solver = parse_solver((*it)["solver"], e.solver);
        if (auto o = it->find("obstruction"); o != it->end()) {
            check_keys(*o, "ensemble.obstruction", {"T", "dt_factor"});
            get(*o, "T", e.obstruction.T);
            get(*o, "dt_factor", e.obstruction.dt_factor);
        }
    }
    return c;
}

RunConfig load_config(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("config: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(RunConfig const &c)
{
    json j;
    j["schema_version"] = c.schema_version;
    j["grid"] = {{"nx", c.grid.nx}, {"nv", c.grid.nv}, {"v_max", c.grid.v_max},
                 {"x_length", c.grid.x_length}};
    json modes = json::array();
    for (auto const &m : c.correlation.modes)
        modes.push_back({{"k", m.k},
                         {"omega", m.omega},
                         {"family", std::string(to_string(m.family))},
                         {"amplitude", m.amplitude},
                         {"tau", m.tau}});
    j["correlation"] = {{"add_conjugates", false}, {"modes", modes}};
    json amodes = json::array();
    for (auto const &m : c.ansatz.modes)
        amodes.push_back({{"k", m.k},
                          {"omega", m.omega},
                          {"beta", m.beta},
                          {"amplitude", complex_json(m.amplitude)}});
    j["ansatz"] = {{"add_conjugates", false}, {"modes", amodes}};
    j["initial"] = {{"sigma", c.initial.sigma},
                    {"drift", c.initial.drift},
                    {"amplitude", c.initial.amplitude},
                    {"mode", c.initial.mode}};
    j["solver"] = solver_json(c.solver);
    auto const &s = c.simulate;
    j["simulate"] = {{"source", s.source}, {"epsilon", s.epsilon}, {"T", s.T},
                     {"dt", s.dt},         {"seed", s.seed},       {"backend", s.backend},
                     {"every", s.every},   {"snapshot_every", s.snapshot_every}};
    auto const &d = c.diffusion;
    j["diffusion"] = {{"source", d.source}, {"epsilon", d.epsilon}, {"t", d.t},
                      {"seed", d.seed},     {"field", d.field},     {"T", d.T},
                      {"dt", d.dt},         {"theta", d.theta},     {"outputs", d.outputs}};
    auto const &p = c.dispersion;
    j["dispersion"] = {{"profile", profile_json(p.profile)},
                       {"k", p.k},
                       {"k_max", p.k_max},
                       {"rel_tol", p.rel_tol}};
    if (p.rect)
        j["dispersion"]["rect"] = {p.rect->re_lo, p.rect->re_hi, p.rect->im_lo, p.rect->im_hi};
    auto const &q = c.quasilinear;
    json qmodes = json::array();
    for (auto const &m : q.modes)
        qmodes.push_back({{"k", m.k}, {"lambda", complex_json(m.lambda)}, {"e0_sq", m.e0_sq}});
    j["quasilinear"] = {{"profile", profile_json(q.profile)},
                        {"nv", q.nv},
                        {"v_max", q.v_max},
                        {"modes", qmodes},
                        {"add_conjugates", q.add_conjugates},
                        {"epsilon", q.epsilon},
                        {"T", q.T},
                        {"dt", q.dt},
                        {"snapshot_every", q.snapshot_every},
                        {"theta", q.ql.theta},
                        {"re_floor", q.ql.re_floor},
                        {"audit_every", q.ql.audit_every},
                        {"newton_tol", q.ql.newton_tol},
                        {"kernel_tol", q.ql.kernel_tol}};
    auto const &e = c.ensemble;
    j["ensemble"] = {{"epsilons", e.epsilons},
                     {"members", e.members},
                     {"seed", e.seed},
                     {"T", e.T},
                     {"outputs", e.outputs},
                     {"dt_factor", e.dt_factor},
                     {"threads", e.threads},
                     {"diffusion_dt", e.diffusion_dt},
                     {"budget_members", c.budget_members},
                     {"solver", solver_json(e.solver)},
                     {"obstruction", {{"T", e.obstruction.T}, {"dt_factor", e.obstruction.dt_factor}}}};
    return j.dump(2) + "\n";
}

} // namespace qlkit
