// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/baselines.hpp"
#include "qot/io.hpp"
#include "qot/reference.hpp"
#include "qot/solver.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qot {

/// Worker count from QOT_THREADS, else the hardware concurrency; at least 1.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("QOT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0) .. fn(count - 1) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    pool.clear();
    if (error) std::rethrow_exception(error);
}

inline Json solver_params_to_json(const SolverParams& p) {
    auto slack = [](SlackSearch s) {
        switch (s) {
        case SlackSearch::Stationarity: return "stationarity";
        case SlackSearch::Golden: return "golden";
        case SlackSearch::FiniteDifferenceBisection: return "fd-bisection";
        }
        return "unknown";
    };
    Json agp = {{"step_size", p.agp.step_size}, {"max_iters", p.agp.max_iters}, {"rel_tol", p.agp.rel_tol},
                {"restart", p.agp.restart}, {"adaptive_step", p.agp.adaptive_step}};
    if (p.agp.min_bandwidth_floor) agp["min_bandwidth_floor"] = *p.agp.min_bandwidth_floor;
    return {{"agp", std::move(agp)},
            {"dual",
             {{"xi", p.dual.xi}, {"max_iters", p.dual.max_iters}, {"tol_power", p.dual.tol_power},
              {"safeguarded", p.dual.safeguarded}, {"slack_search", slack(p.dual.slack_search)},
              {"slack_tol", p.dual.slack_tol}}},
            {"ao_max_iters", p.ao_max_iters},
            {"ao_rel_tol", p.ao_rel_tol},
            {"faithful_paper_mode", p.faithful_paper_mode}};
}

inline Json channel_to_json(const ChannelConfig& c) {
    return {{"num_bs", c.num_bs},
            {"distance_range_m", {c.min_distance_m, c.max_distance_m}},
            {"pathloss_ref_db", c.pathloss_ref_db},
            {"pathloss_exponent", c.pathloss_exponent},
            {"fading", c.fading == Fading::None ? "none" : "rayleigh"},
            {"hold_distance_slots", c.hold_distance_slots},
            {"seed", c.seed}};
}

struct RunRecord {
    SchemeId scheme = SchemeId::Proposed;
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    SolveResult result;
    FeasibilityReport feasibility;
};

inline Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

/// Everything except "timing" is a deterministic function of config and seed.
inline Json record_to_json(const RunRecord& rec, const Config& cfg, const Scenario& s) {
    const SolveResult& r = rec.result;
    Json scenario = scenario_to_json(s);
    scenario.erase("reduced_gains");
    Json config = {{"scenario", std::move(scenario)}, {"solver", solver_params_to_json(cfg.solver)}};
    if (!cfg.inline_gains) {
        ChannelConfig ch = cfg.channel;
        ch.seed = rec.seed;
        config["channel"] = channel_to_json(ch);
    }
    return {{"scheme", scheme_name(rec.scheme)},
            {"seed", rec.seed},
            {"scenario_hash", hash_hex(rec.scenario_hash)},
            {"num_cavs", s.num_cavs()},
            {"num_slots", s.num_slots},
            {"config", std::move(config)},
            {"objective", r.objective},
            {"initial_objective", r.initial_objective},
            {"samples", vector_json(r.per_cav_samples)},
            {"errors", vector_json(r.per_cav_errors)},
            {"ao_rounds", r.ao_trace.size()},
            {"agp_iterations", r.agp_iterations},
            {"dual_iterations", r.dual_iterations},
            {"converged", r.converged},
            {"feasibility",
             {{"feasible", rec.feasibility.feasible},
              {"total_power_violation_w", rec.feasibility.total_power_violation},
              {"per_cav_power_violation_w", vector_json(rec.feasibility.per_cav_power_violation)},
              {"max_bandwidth_violation_hz", rec.feasibility.per_slot_bandwidth_violation.cwiseAbs().maxCoeff()},
              {"max_negativity", rec.feasibility.max_negativity}}},
            {"timing", {{"wall_time_s", r.wall_time_s}, {"agp_time_s", r.agp_time_s}, {"dual_time_s", r.dual_time_s}}}};
}

inline std::string samples_csv(const SolveResult& r) {
    std::string out = "cav,samples,error\n";
    for (Eigen::Index k = 0; k < r.per_cav_samples.size(); ++k)
        out += std::to_string(k) + ',' + format_double(r.per_cav_samples(k)) + ',' +
               format_double(r.per_cav_errors(k)) + '\n';
    return out;
}

inline std::string ao_trace_csv(const SolveResult& r) {
    std::string out = "round,objective\n";
    for (std::size_t i = 0; i < r.ao_trace.size(); ++i)
        out += std::to_string(i + 1) + ',' + format_double(r.ao_trace[i]) + '\n';
    return out;
}

inline std::string agp_trace_csv(const SolveResult& r) {
    std::string out = "round,iteration,objective\n";
    for (std::size_t i = 0; i < r.inner_traces.size(); ++i)
        for (std::size_t j = 0; j < r.inner_traces[i].agp.size(); ++j)
            out += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' +
                   format_double(r.inner_traces[i].agp[j]) + '\n';
    return out;
}

inline std::string dual_trace_csv(const SolveResult& r) {
    std::string out = "round,iteration,lambda,violation_w\n";
    for (std::size_t i = 0; i < r.inner_traces.size(); ++i)
        for (std::size_t j = 0; j < r.inner_traces[i].dual.size(); ++j)
            out += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' +
                   format_double(r.inner_traces[i].dual[j].lambda) + ',' +
                   format_double(r.inner_traces[i].dual[j].violation) + '\n';
    return out;
}

inline RunRecord execute(const Config& cfg, const Scenario& s, SchemeId scheme, std::uint64_t seed) {
    RunRecord rec;
    rec.scheme = scheme;
    rec.seed = seed;
    rec.scenario_hash = scenario_hash(s);
    rec.result = run_scheme(scheme, s, cfg.solver).result;
    rec.feasibility = check_feasibility(rec.result.allocation, s, 1e-6);
    return rec;
}

/// Solves one scenario and writes result.json, ao_trace.csv,
/// allocation_u.csv, allocation_p.csv, samples.csv and the inner traces.
inline RunRecord run(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const Scenario s = build_scenario(cfg, seed);
    RunRecord rec = execute(cfg, s, cfg.run.scheme, seed);
    std::filesystem::create_directories(out_dir);
    write_file((out_dir / "result.json").string(), record_to_json(rec, cfg, s).dump(2) + '\n');
    write_file((out_dir / "ao_trace.csv").string(), ao_trace_csv(rec.result));
    write_file((out_dir / "agp_trace.csv").string(), agp_trace_csv(rec.result));
    write_file((out_dir / "dual_trace.csv").string(), dual_trace_csv(rec.result));
    write_file((out_dir / "allocation_u.csv").string(), matrix_csv(rec.result.allocation.bandwidth));
    write_file((out_dir / "allocation_p.csv").string(), matrix_csv(rec.result.allocation.power));
    write_file((out_dir / "samples.csv").string(), samples_csv(rec.result));
    return rec;
}

/// Every scheme on every configured seed, fanned out over the worker pool.
/// Writes compare.csv: one row per (seed, scheme), then one mean row per
/// scheme.
inline std::vector<RunRecord> compare_schemes(const Config& cfg, const std::filesystem::path& out_dir,
                                              std::size_t workers = worker_count()) {
    const auto& seeds = cfg.run.seeds;
    const std::size_t ns = kAllSchemes.size();
    std::vector<Scenario> scenarios(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) { scenarios[i] = build_scenario(cfg, seeds[i]); });
    std::vector<RunRecord> records(seeds.size() * ns);
    parallel_for(records.size(), workers, [&](std::size_t i) {
        records[i] = execute(cfg, scenarios[i / ns], kAllSchemes[i % ns], seeds[i / ns]);
    });

    const std::size_t nk = cfg.scenario.num_cavs();
    std::string out = "seed,scheme,objective";
    for (std::size_t k = 0; k < nk; ++k) out += ",v_" + std::to_string(k + 1);
    for (std::size_t k = 0; k < nk; ++k) out += ",psi_" + std::to_string(k + 1);
    out += ",wall_time_s\n";
    auto row = [&](const std::string& seed, SchemeId id, double obj, const Vector& v, const Vector& e, double t) {
        out += seed + ',' + std::string(scheme_name(id)) + ',' + format_double(obj);
        for (Eigen::Index k = 0; k < v.size(); ++k) out += ',' + format_double(v(k));
        for (Eigen::Index k = 0; k < e.size(); ++k) out += ',' + format_double(e(k));
        out += ',' + format_double(t) + '\n';
    };
    for (const auto& rec : records)
        row(std::to_string(rec.seed), rec.scheme, rec.result.objective, rec.result.per_cav_samples,
            rec.result.per_cav_errors, rec.result.wall_time_s);
    for (std::size_t j = 0; j < ns; ++j) {
        double obj = 0.0, t = 0.0;
        Vector v = Vector::Zero(static_cast<Eigen::Index>(nk)), e = v;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const SolveResult& r = records[i * ns + j].result;
            obj += r.objective;
            t += r.wall_time_s;
            v += r.per_cav_samples;
            e += r.per_cav_errors;
        }
        const double m = static_cast<double>(seeds.size());
        row("mean", kAllSchemes[j], obj / m, v / m, e / m, t / m);
    }
    std::filesystem::create_directories(out_dir);
    write_file((out_dir / "compare.csv").string(), out);
    return records;
}

struct BenchRow {
    std::size_t num_slots = 0;
    std::string scheme;
    bool skipped = false;
    double wall_time_s = 0.0;
    std::size_t ao_rounds = 0;
    std::size_t agp_iterations = 0;
    std::size_t dual_iterations = 0;
    double agp_time_per_iter_s = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line y = slope * x + intercept with its R^2.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix a(n, 2);
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = x[static_cast<std::size_t>(i)];
        a(i, 1) = 1.0;
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Vector coef = a.colPivHouseholderQr().solve(b);
    const double ss_res = (a * coef - b).squaredNorm();
    const double ss_tot = (b.array() - b.mean()).square().sum();
    return {coef(0), coef(1), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

/// Times the proposed solver (and the reference solver where K * N <= 64)
/// at each slot count, sequentially so timings do not interfere. Writes
/// bench.csv and bench_fit.json (per-AGP-iteration time against N).
inline std::vector<BenchRow> bench_scaling(const Config& cfg, const std::filesystem::path& out_dir) {
    std::vector<BenchRow> rows;
    std::vector<double> xs, ys;
    for (std::size_t n : cfg.run.bench_slot_counts) {
        Config c = cfg;
        c.scenario.num_slots = n;
        if (c.inline_gains) {
            if (n != cfg.scenario.num_slots)
                throw DomainError("inline gains fix the slot count; bench needs a generated scenario");
        }
        const Scenario s = build_scenario(c, cfg.run.seeds.front());
        const SolveResult r = solve(s, cfg.solver);
        BenchRow row{n, "proposed", false, r.wall_time_s, r.ao_trace.size(), r.agp_iterations, r.dual_iterations,
                     r.agp_iterations ? r.agp_time_s / static_cast<double>(r.agp_iterations) : 0.0};
        rows.push_back(row);
        xs.push_back(static_cast<double>(n));
        ys.push_back(row.agp_time_per_iter_s);

        BenchRow ref{n, "reference", true};
        if (s.num_cavs() * n <= 64) {
            const SolveResult rr = reference_solve(s);
            ref.skipped = false;
            ref.wall_time_s = rr.wall_time_s;
            ref.agp_iterations = rr.agp_iterations;
        }
        rows.push_back(ref);
    }

    std::string out = "num_slots,scheme,status,wall_time_s,ao_rounds,agp_iters,dual_iters,agp_time_per_iter_s\n";
    for (const auto& r : rows)
        out += std::to_string(r.num_slots) + ',' + r.scheme + ',' + (r.skipped ? "skipped" : "ok") + ',' +
               format_double(r.wall_time_s) + ',' + std::to_string(r.ao_rounds) + ',' +
               std::to_string(r.agp_iterations) + ',' + std::to_string(r.dual_iterations) + ',' +
               format_double(r.agp_time_per_iter_s) + '\n';
    std::filesystem::create_directories(out_dir);
    write_file((out_dir / "bench.csv").string(), out);
    if (xs.size() >= 2) {
        const LinearFit fit = fit_line(xs, ys);
        const Json j = {{"slope_s_per_slot", fit.slope}, {"intercept_s", fit.intercept}, {"r_squared", fit.r_squared}};
        write_file((out_dir / "bench_fit.json").string(), j.dump(2) + '\n');
    }
    return rows;
}

/// Writes a configuration whose scenario carries the generated gains inline,
/// so it can be run again without the channel section.
inline Scenario generate_scenario(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const Scenario s = build_scenario(cfg, seed);
    const Json doc = {{"scenario", scenario_to_json(s)},
                      {"solver", solver_params_to_json(cfg.solver)},
                      {"run",
                       {{"scheme", scheme_name(cfg.run.scheme)},
                        {"seeds", {seed}},
                        {"output_dir", cfg.run.output_dir}}}};
    std::filesystem::create_directories(out_dir);
    write_file((out_dir / "scenario.json").string(), doc.dump(2) + '\n');
    return s;
}

}  // namespace qot
