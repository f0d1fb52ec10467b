// SPDX-License-Identifier: Apache-2.0
// Command-line front end: run, compare, bench, gen-scenario.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 solver domain
// error, 1 anything else (I/O failures).

#include "qot/io.hpp"
#include "qot/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
    std::string config;
    std::string scheme;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool faithful = false;
};

void add_common(CLI::App* sub, Options& opt, bool with_scheme) {
    sub->add_option("--config", opt.config, "JSON configuration file")->required();
    if (with_scheme) sub->add_option("--scheme", opt.scheme, "equal, throughput, qot-power, qot-static or proposed");
    sub->add_option("--seed", opt.seed, "scenario seed (replaces run.seeds)");
    sub->add_option("--out", opt.out, "output directory (replaces run.output_dir)");
    sub->add_flag("--faithful-paper", opt.faithful, "fixed steps, no restarts, plain subgradient multiplier");
}

qot::Config prepare(const Options& opt) {
    qot::Config cfg = qot::load_config(opt.config);
    if (!opt.scheme.empty()) {
        const auto id = qot::parse_scheme(opt.scheme);
        if (!id) throw qot::SchemaError(0, "--scheme", "unknown scheme '" + opt.scheme + "'");
        cfg.run.scheme = *id;
    }
    if (opt.seed) cfg.run.seeds = {*opt.seed};
    if (!opt.out.empty()) cfg.run.output_dir = opt.out;
    if (opt.faithful) qot::make_faithful(cfg);
    return cfg;
}

void print_record(const qot::RunRecord& rec, const qot::Scenario& s) {
    std::printf("%-10s seed=%llu K=%zu N=%zu objective=%s rounds=%zu time=%.3fs\n",
                std::string(qot::scheme_name(rec.scheme)).c_str(), static_cast<unsigned long long>(rec.seed),
                s.num_cavs(), s.num_slots, qot::format_double(rec.result.objective).c_str(),
                rec.result.ao_trace.size(), rec.result.wall_time_s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QoT-oriented bandwidth and power allocation for vehicle uplinks"};
    app.require_subcommand(1);
    Options opt;
    CLI::App* run = app.add_subcommand("run", "solve one scenario with one scheme");
    CLI::App* compare = app.add_subcommand("compare", "all schemes on every configured seed");
    CLI::App* bench = app.add_subcommand("bench", "solver time against the number of slots");
    CLI::App* gen = app.add_subcommand("gen-scenario", "write a scenario with its gains inline");
    add_common(run, opt, true);
    add_common(compare, opt, false);
    add_common(bench, opt, false);
    add_common(gen, opt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const qot::Config cfg = prepare(opt);
        const std::filesystem::path out = cfg.run.output_dir;
        if (run->parsed()) {
            const std::uint64_t seed = cfg.run.seeds.front();
            const qot::RunRecord rec = qot::run(cfg, seed, out);
            print_record(rec, qot::build_scenario(cfg, seed));
            if (!rec.feasibility.feasible) std::fprintf(stderr, "warning: allocation violates a constraint by more than 1e-6\n");
        } else if (compare->parsed()) {
            const auto records = qot::compare_schemes(cfg, out);
            for (const auto& rec : records) print_record(rec, qot::build_scenario(cfg, rec.seed));
            std::printf("wrote %s\n", (out / "compare.csv").string().c_str());
        } else if (bench->parsed()) {
            for (const auto& row : qot::bench_scaling(cfg, out))
                std::printf("N=%-6zu %-9s %s time=%.4fs agp_iters=%zu per_iter=%.3gs\n", row.num_slots,
                            row.scheme.c_str(), row.skipped ? "skipped" : "ok", row.wall_time_s, row.agp_iterations,
                            row.agp_time_per_iter_s);
            std::printf("wrote %s\n", (out / "bench.csv").string().c_str());
        } else if (gen->parsed()) {
            const qot::Scenario s = qot::generate_scenario(cfg, cfg.run.seeds.front(), out);
            std::printf("wrote %s (hash %s)\n", (out / "scenario.json").string().c_str(),
                        qot::hash_hex(qot::scenario_hash(s)).c_str());
        }
    } catch (const qot::SchemaError& e) {
        std::fprintf(stderr, "%s: %s\n", opt.config.c_str(), e.what());
        return 2;
    } catch (const qot::DomainError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
