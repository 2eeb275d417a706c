#include "qlkit/config.hpp"
#include "qlkit/io.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace qlkit;
using Catch::Approx;

namespace {

Distribution noisy(PhaseSpaceGrid const &g)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Distribution f(g);
    for (double &x : f.values)
        x = u(rng) / 3.0;
    return f;
}

std::string minimal() { return R"({"schema_version": 1})"; }

} // namespace

TEST_CASE("distribution round trips")
{
    auto const g = make_grid(8, 17, 2.5);
    auto const f = noisy(g);

    std::stringstream csv;
    io::write_distribution_csv(csv, f);
    auto const c = io::read_distribution_csv(csv);
    CHECK(c.grid.nx() == 8);
    CHECK(c.grid.nv() == 17);
    CHECK(c.grid.v_max() == 2.5);
    CHECK(c.values == f.values);

    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    io::write_checkpoint(bin, f);
    CHECK(bin.str().size() == 2 * 8 + 8 + 8 * g.size());
    auto const b = io::read_checkpoint(bin);
    CHECK(b.grid == g);
    CHECK(b.values == f.values);

    std::stringstream truncated(bin.str().substr(0, 40));
    CHECK_THROWS_AS(io::read_checkpoint(truncated), Error);
    std::stringstream ragged("v\\x,x0,x1\n-1,0.5\n");
    CHECK_THROWS_AS(io::read_distribution_csv(ragged), Error);
}

TEST_CASE("profile round trip")
{
    auto const vg = make_vgrid(33, 4.0);
    std::vector<double> vals(33);
    for (int i = 0; i < 33; ++i)
        vals[i] = std::exp(-vg.v(i) * vg.v(i)) / 7.0;
    std::stringstream ss;
    io::write_profile_csv(ss, vg, vals, "G");
    CHECK(ss.str().rfind("v,G\n", 0) == 0);
    auto const p = io::read_profile_csv(ss);
    CHECK(p.vgrid == vg);
    CHECK(p.values == vals);
    CHECK(io::fmt(0.1) == "0.10000000000000001");
}

TEST_CASE("config parsing")
{
    auto const d = parse_config(minimal());
    CHECK(d.schema_version == 1);
    CHECK(d.grid.nx == default_config().grid.nx);
    CHECK(d.ensemble.spec.modes.size() == default_benchmark().spec.modes.size());

    CHECK_THROWS_AS(parse_config("{}"), Error);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "gird": {}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "grid": {"nx": 15}})"), Error);
    CHECK_THROWS_AS(parse_config("not json"), Error);

    auto const c = parse_config(R"({
      "schema_version": 1,
      "grid": {"nx": 16, "nv": 65},
      "correlation": {"add_conjugates": true,
                      "modes": [{"k": 2, "omega": 0.5, "family": "bohman", "amplitude": 0.2, "tau": 1.5}]},
      "ensemble": {"epsilons": [0.3, 0.2, 0.1], "members": 10}
    })");
    REQUIRE(c.correlation.modes.size() == 2);
    CHECK(c.correlation.modes[1].k == -2);
    CHECK(c.correlation.modes[1].omega == -0.5);
    CHECK(c.ensemble.nx == 16);
    CHECK(c.ensemble.members == 10);
    CHECK(c.ensemble.spec.modes.size() == 2);
    CHECK_FALSE(c.ensemble.solver.clip_negative);
}

TEST_CASE("config dump round trip")
{
    auto cfg = default_config();
    cfg.grid.nx = 48;
    cfg.simulate.epsilon = 0.25;
    cfg.dispersion.rect = Rect{-1.0, 1.0, 0.0, 3.0};
    auto const text = dump_config(cfg);
    auto const back = parse_config(text);
    CHECK(dump_config(back) == text);
    CHECK(back.grid.nx == 48);
    CHECK(back.simulate.epsilon == 0.25);
    REQUIRE(back.dispersion.rect.has_value());
    CHECK(back.dispersion.rect->im_hi == 3.0);
    auto const j = nlohmann::json::parse(text);
    CHECK(j.at("schema_version") == 1);
}

TEST_CASE("shipped configs parse")
{
    for (char const *name : {"smoke.json", "landau.json", "bump_on_tail.json", "benchmark.json"}) {
        INFO(name);
        CHECK_NOTHROW(load_config(std::filesystem::path(QLKIT_CONFIG_DIR) / name));
    }
    auto const b = load_config(std::filesystem::path(QLKIT_CONFIG_DIR) / "benchmark.json");
    CHECK(dump_config(b) == dump_config(default_config()));
}

TEST_CASE("ensemble exports")
{
    auto cfg = default_benchmark();
    cfg.nx = 16;
    cfg.nv = 33;
    cfg.members = 2;
    cfg.T = 0.1;
    cfg.outputs = 1;
    cfg.threads = 1;
    auto const st = run_ensemble(cfg, 0.4);
    std::stringstream ss;
    io::write_stats_csv(ss, {st});
    std::string line;
    std::getline(ss, line);
    CHECK(line == "epsilon,t,v,mean,stderr");
    int rows = 0;
    while (std::getline(ss, line))
        ++rows;
    CHECK(rows == 2 * 33);

    auto const man = nlohmann::json::parse(io::manifest_json(cfg, {st}, nullptr, 1.0));
    CHECK(man.contains("seeds"));
    CHECK(man.at("grid").at("nv") == 33);
}
