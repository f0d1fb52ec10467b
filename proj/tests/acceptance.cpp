// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

#include "fixtures.hpp"

#include "qot/run.hpp"
#include "qot/simplex_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace qot;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Config demo_config() { return load_config((std::filesystem::path(QOT_SOURCE_DIR) / "configs" / "demo.json").string()); }

Matrix random_bandwidth(const Scenario& s, Rng& rng) {
    Matrix u(static_cast<Eigen::Index>(s.num_cavs()), static_cast<Eigen::Index>(s.num_slots));
    for (Eigen::Index n = 0; n < u.cols(); ++n) {
        for (Eigen::Index k = 0; k < u.rows(); ++k) u(k, n) = rng.uniform(0.05, 1.0);
        u.col(n) *= s.total_bandwidth_hz / u.col(n).sum();
    }
    return u;
}

void criterion1() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    const std::size_t ks[] = {1, 2, 3}, ns[] = {2, 4}, ls[] = {1, 2};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t i = seed - 1;
        const Scenario s = fixtures::demo_scenario(ns[i % 2], seed, ks[i % 3], ls[(i / 6) % 2]);
        const double ours = solve(s).objective;
        const double ref = reference_solve(s).objective;
        worst = std::max(worst, std::abs(ours - ref) / ref);
    }
    const double t = since(t0);
    report(1, worst <= 1e-3 && t < 120.0, fmt("max relative gap to reference %.3g over 20 seeds in %.2f s", worst, t));
}

void criterion2() {
    Rng rng(31);
    double worst = 0.0;
    for (int point = 0; point < 50; ++point) {
        const std::size_t k = 1 + static_cast<std::size_t>(point % 3);
        const Scenario s = fixtures::demo_scenario(3, static_cast<std::uint64_t>(point + 1), k, 2);
        const Matrix u = random_bandwidth(s, rng);
        Matrix p(u.rows(), u.cols());
        for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(0.05, 1.0);
        const Matrix g = gradient_bandwidth(u, p, s);
        const double scale = g.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            double best = kInfinity;
            for (double rel : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
                Matrix up = u, down = u;
                const double h = rel * u(i);
                up(i) += h;
                down(i) -= h;
                const double fd =
                    (fixtures::direct_objective(up, p, s) - fixtures::direct_objective(down, p, s)) / (2 * h);
                best = std::min(best, std::abs(fd - g(i)) / std::max(std::abs(g(i)), 1e-6 * scale));
            }
            worst = std::max(worst, best);
        }
    }
    report(2, worst <= 1e-5, fmt("max relative gradient error %.3g at 50 points", worst));
}

void criterion3() {
    Rng rng(2024);
    double worst = 0.0;
    for (Eigen::Index k = 1; k <= 8; ++k)
        for (int draw = 0; draw < 1000; ++draw) {
            const double budget = rng.uniform(0.1, 10.0);
            const double scale = rng.uniform(0.1, 20.0);
            Vector x(k);
            for (Eigen::Index i = 0; i < k; ++i) x(i) = rng.uniform(-scale, scale);
            worst = std::max(worst, (project_column(x, budget) - qp_projection_oracle(x, budget)).cwiseAbs().maxCoeff());
        }
    report(3, worst <= 1e-9, fmt("max inf-norm distance to QP oracle %.3g over K=1..8 x 1000 draws", worst));
}

void criterion4() {
    double kkt = 0.0, budget = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t nk = 1 + seed % 3;
        const Scenario s = fixtures::demo_scenario(50, seed, nk, 3);
        Rng rng(seed);
        const Matrix u = random_bandwidth(s, rng);
        const DualResult r = dual_solve(u, s);
        const double nn = static_cast<double>(s.num_slots);
        for (std::size_t k = 0; k < nk; ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            const double mu = r.water_level(row);
            const double expect = nn * std::min(s.cavs[k].power_cap_watts, r.slack(row));
            budget = std::max(budget, std::abs(r.power.row(row).sum() - expect) / std::max(expect, 1e-300));
            for (Eigen::Index n = 0; n < u.cols(); ++n) {
                const double g = s.reduced_gains(row, n), p = r.power(row, n);
                const double level = s.slot_duration_s * u(row, n) * g /
                                     (nn * s.cavs[k].sample_size_bits * std::log(2.0) *
                                      (s.noise_density_w_per_hz * u(row, n) + p * g));
                const double res = p > 0.0 ? std::abs(level - mu) / mu : std::max(0.0, level - mu) / mu;
                kkt = std::max(kkt, res);
            }
        }
    }
    report(4, kkt <= 1e-6 && budget <= 1e-9,
           fmt("max KKT residual %.3g, max relative power-sum error %.3g over 20 scenarios", kkt, budget));
}

void criterion5() {
    const Config cfg = demo_config();
    const Scenario s = build_scenario(cfg, cfg.run.seeds.front());
    const auto t0 = Clock::now();
    const SolveResult r = solve(s, cfg.solver);
    const double t = since(t0);
    const double final_value = r.ao_trace.back();
    std::size_t within = 0;
    while (std::abs(r.ao_trace[within] - final_value) > 1e-3 * final_value) ++within;
    double worst_rise = 0.0, last = r.initial_objective;
    for (double v : r.ao_trace) {
        worst_rise = std::max(worst_rise, (v - last) / std::abs(last));
        last = v;
    }
    report(5, within + 1 <= 10 && worst_rise <= 1e-9 && t < 30.0,
           fmt("within 0.1%% of final after round %.0f, max relative rise %.3g, %.2f s", double(within + 1),
               worst_rise, t));
}

void criterion6() {
    Config cfg = demo_config();
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) seeds.push_back(seed);
    cfg.run.seeds = seeds;
    const auto dir = std::filesystem::temp_directory_path() / "qot_acceptance_compare";
    const auto records = compare_schemes(cfg, dir, worker_count());
    const std::size_t ns = kAllSchemes.size();
    const auto proposed_at = static_cast<std::size_t>(
        std::find(kAllSchemes.begin(), kAllSchemes.end(), SchemeId::Proposed) - kAllSchemes.begin());
    const auto scheme2_at = static_cast<std::size_t>(
        std::find(kAllSchemes.begin(), kAllSchemes.end(), SchemeId::ThroughputMax) - kAllSchemes.begin());
    bool dominates = true;
    std::size_t strictly = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const SolveResult& p = records[i * ns + proposed_at].result;
        for (std::size_t j = 0; j < ns; ++j)
            if (p.objective > records[i * ns + j].result.objective + 1e-9) dominates = false;
        const SolveResult& t = records[i * ns + scheme2_at].result;
        if (p.objective < t.objective) ++strictly;
    }

    // Sample ratio v1/v2 against the reference solver on the same seeds at a
    // slot count it can handle.
    auto ratio = [](const SolveResult& r) { return r.per_cav_samples(0) / r.per_cav_samples(1); };
    Config small = cfg;
    small.scenario.num_slots = 32;
    double dev_p = 0.0, dev_2 = 0.0;
    for (std::uint64_t seed : seeds) {
        const Scenario s = build_scenario(small, seed);
        const double oracle = ratio(reference_solve(s, 2000, 1));
        dev_p += std::abs(ratio(run_scheme(SchemeId::Proposed, s, cfg.solver).result) - oracle) / oracle;
        dev_2 += std::abs(ratio(run_scheme(SchemeId::ThroughputMax, s, cfg.solver).result) - oracle) / oracle;
    }
    dev_p /= static_cast<double>(seeds.size());
    dev_2 /= static_cast<double>(seeds.size());
    const double share = static_cast<double>(strictly) / static_cast<double>(seeds.size());
    report(6, dominates && share >= 0.95 && dev_p < dev_2,
           std::string(dominates ? "proposed <= every scheme on all seeds" : "proposed beaten on some seed") +
               fmt(", strictly better than throughput on %.0f%%, mean relative v1/v2 deviation from reference at "
                   "N=32: proposed %.3g vs throughput %.3g",
                   100 * share, dev_p, dev_2));
}

void criterion7() {
    const Config cfg = demo_config();
    std::vector<double> xs, ys;
    double solve_time = 0.0;
    for (std::size_t n : {250, 500, 1000}) {
        Config c = cfg;
        c.scenario.num_slots = n;
        const Scenario s = build_scenario(c, cfg.run.seeds.front());
        double best = kInfinity;
        for (int rep = 0; rep < 3; ++rep) {
            const SolveResult r = solve(s, cfg.solver);
            best = std::min(best, r.agp_time_s / static_cast<double>(std::max<std::size_t>(r.agp_iterations, 1)));
            if (n == 1000) solve_time = rep == 0 ? r.wall_time_s : std::min(solve_time, r.wall_time_s);
        }
        xs.push_back(static_cast<double>(n));
        ys.push_back(best);
    }
    const LinearFit fit = fit_line(xs, ys);
    report(7, fit.r_squared >= 0.95 && solve_time < 5.0,
           fmt("per-iteration time fit R^2 %.4f (slope %.3g s/slot), K=2 N=1000 solve %.2f s", fit.r_squared,
               fit.slope, solve_time));
}

void criterion8() {
    const Config cfg = demo_config();
    const auto base = std::filesystem::temp_directory_path() / "qot_acceptance_det";
    std::vector<Json> docs;
    for (const char* sub : {"a", "b"}) {
        run(cfg, cfg.run.seeds.front(), base / sub);
        Json j = Json::parse(read_file((base / sub / "result.json").string()));
        j.erase("timing");
        docs.push_back(std::move(j));
    }
    report(8, docs[0] == docs[1], docs[0] == docs[1] ? "result.json identical across runs apart from timing"
                                                     : "result.json differs between runs");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    return failures == 0 ? 0 : 1;
}
