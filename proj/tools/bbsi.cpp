// Command-line front end: problem generation, solver runs with optional
// oracle validation, scaling studies, kernel microbenchmarks and plan tuning.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbsi/cost_model.hpp"
#include "bbsi/ddrgf.hpp"
#include "bbsi/io.hpp"
#include "bbsi/microbench.hpp"
#include "bbsi/rgf.hpp"

using namespace bbsi;
using cd = std::complex<double>;
using nlohmann::json;

namespace {

struct CommonOpts {
    int layers = 12;
    int block_size = 8;
    int bandwidth = 1;
    std::string solver = "rgf";
    std::string plan_str;
    int threads = 1;
    int terminal_threads = 1;
    int reps = 30;
    std::uint64_t seed = 12345;
    double dominance = 2.0;
    bool validate = false;
    int oracle_cap = 4096;
    double tolerance = 1e-10;
    std::string out;
    std::string matrix_path;
};

void add_common_flags(CLI::App* app, CommonOpts& o) {
    app->add_option("--layers", o.layers, "number of principal layers")->envname("BBSI_LAYERS");
    app->add_option("--block-size", o.block_size, "uniform block size")->envname("BBSI_BLOCK_SIZE");
    app->add_option("--bandwidth", o.bandwidth, "block bandwidth w")->envname("BBSI_BANDWIDTH");
    app->add_option("--solver", o.solver, "rgf | nrgf | fused | ddrgf")->envname("BBSI_SOLVER");
    app->add_option("--plan", o.plan_str, "ddrgf plan, e.g. \"s2:4,1,1\"")->envname("BBSI_PLAN");
    app->add_option("--threads", o.threads, "thread budget")->envname("BBSI_THREADS");
    app->add_option("--terminal-threads", o.terminal_threads,
                    "kernel threads for the deepest sequential solve")
        ->envname("BBSI_TERMINAL_THREADS");
    app->add_option("--reps", o.reps, "timing repetitions")->envname("BBSI_REPS");
    app->add_option("--seed", o.seed, "random seed")->envname("BBSI_SEED");
    app->add_option("--dominance", o.dominance, "diagonal dominance factor")
        ->envname("BBSI_DOMINANCE");
    app->add_flag("--validate", o.validate, "compare against the dense oracle");
    app->add_option("--oracle-cap", o.oracle_cap, "max total dimension for oracle validation")
        ->envname("BBSI_ORACLE_CAP");
    app->add_option("--tolerance", o.tolerance, "validation tolerance (relative, per block)");
    app->add_option("--out", o.out, "write result to this path instead of stdout");
    app->add_option("--matrix", o.matrix_path, "read the input matrix from a .bbm file");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) vals.push_back(std::stoi(tok));
    return vals;
}

DomainPlan parse_plan(const CommonOpts& o) {
    DomainPlan p;
    std::string body = o.plan_str;
    if (body.rfind("s2:", 0) == 0) body = body.substr(3);
    p.s2_levels = parse_int_list(body);
    if (p.s2_levels.empty()) p.s2_levels = {1};
    p.n_threads = o.threads;
    p.terminal_threads = o.terminal_threads;
    return p;
}

BlockBandedMatrix<cd> load_or_generate(const CommonOpts& o) {
    if (!o.matrix_path.empty()) return read_bbm(o.matrix_path);
    return random_spd_like<cd>(make_layout(o.layers, o.block_size, o.bandwidth), o.seed,
                               o.dominance);
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw invalid_argument_error("cannot open output path " + o.out);
    f << text;
}

struct SolveOutcome {
    BlockBandedMatrix<cd> result;
    KernelCounters counters;
    double mean_ms = 0, min_ms = 0, max_ms = 0;
};

SolveOutcome run_solver(const BlockBandedMatrix<cd>& m, const CommonOpts& o) {
    const DomainPlan plan = parse_plan(o);
    SolveOutcome out;
    out.min_ms = 1e300;
    for (int rep = 0; rep < std::max(1, o.reps); ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        std::pair<BlockBandedMatrix<cd>, KernelCounters> r;
        if (o.solver == "rgf") {
            KernelThreadGuard guard(o.threads);
            r = rgf_tridiag(m);
        } else if (o.solver == "nrgf") {
            KernelThreadGuard guard(o.threads);
            r = rgf_ndiag(m);
        } else if (o.solver == "fused") {
            KernelThreadGuard guard(o.threads);
            r = rgf_fused(m);
        } else if (o.solver == "ddrgf") {
            r = ddrgf(m, plan);
        } else {
            throw invalid_argument_error("unknown solver: " + o.solver);
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        out.mean_ms += ms;
        out.min_ms = std::min(out.min_ms, ms);
        out.max_ms = std::max(out.max_ms, ms);
        out.result = std::move(r.first);
        out.counters = r.second;
    }
    out.mean_ms /= std::max(1, o.reps);
    return out;
}

/// Largest per-block relative error vs. the oracle; fills `worst` with the
/// offending (row layer, column layer).
double oracle_error(const BlockBandedMatrix<cd>& got, const BlockBandedMatrix<cd>& m,
                    std::pair<int, int>& worst) {
    auto ref = oracle_selected_inverse(m);
    double e = 0;
    for (int a = 0; a < m.num_layers(); ++a)
        for (int off = -m.bandwidth(); off <= m.bandwidth(); ++off) {
            if (!m.in_band(a, off)) continue;
            const double blk_err = rel_frobenius_error(got.block(a, off), ref.block(a, off));
            if (blk_err > e) {
                e = blk_err;
                worst = {a, a + off};
            }
        }
    return e;
}

json run_record(const BlockBandedMatrix<cd>& m, const CommonOpts& o, const SolveOutcome& s) {
    json rec{{"solver", o.solver},
             {"layers", m.num_layers()},
             {"block_size", m.layout().block_sizes.front()},
             {"bandwidth", m.bandwidth()},
             {"threads", o.threads},
             {"repetitions", std::max(1, o.reps)},
             {"wall_time_ms", s.mean_ms},
             {"wall_time_ms_min", s.min_ms},
             {"wall_time_ms_max", s.max_ms},
             {"seed", o.seed},
             {"counters",
              {{"gemm", s.counters.n_gemm}, {"lu", s.counters.n_lu}, {"getrs", s.counters.n_getrs}}}};
    if (o.solver == "ddrgf") rec["plan"] = parse_plan(o).s2_levels;
    return rec;
}

int validate_into(json& rec, const BlockBandedMatrix<cd>& m, const CommonOpts& o,
                  const SolveOutcome& s) {
    if (m.layout().total_dim() > o.oracle_cap) {
        std::cerr << "error: oracle validation requested above --oracle-cap ("
                  << m.layout().total_dim() << " > " << o.oracle_cap << ")\n";
        return 2;
    }
    std::pair<int, int> worst{-1, -1};
    const double err = oracle_error(s.result, m, worst);
    rec["max_block_error"] = err;
    if (err > o.tolerance) {
        std::cerr << "validation FAILED: block (" << worst.first << ", " << worst.second
                  << ") relative error " << err << " > " << o.tolerance << "\n";
        return 1;
    }
    return 0;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json ratios_to_json(const KernelRatios& r) {
    return {{"block_size", r.block_size},
            {"t_gemm_us", r.t_gemm * 1e6},
            {"r_lu", r.r_lu},
            {"r_getrs", r.r_getrs},
            {"samples", r.sample_count}};
}

KernelRatios ratios_from_json(const json& j) {
    KernelRatios r;
    r.block_size = j.at("block_size").get<int>();
    r.t_gemm = j.at("t_gemm_us").get<double>() * 1e-6;
    r.r_lu = j.at("r_lu").get<double>();
    r.r_getrs = j.at("r_getrs").get<double>();
    r.sample_count = j.value("samples", 0);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selected inversion of block banded matrices"};
    app.require_subcommand(1);
    CommonOpts o;

    auto* cmd_bench = app.add_subcommand("bench-kernels", "time GEMM/LU/solve kernels, emit CSV");
    std::string sizes_str = "16,32,64,128,256";
    int samples = 0;
    cmd_bench->add_option("--sizes", sizes_str, "comma-separated matrix dimensions");
    cmd_bench->add_option("--samples", samples, "timed iterations per kernel (0 = per-size default)");
    add_common_flags(cmd_bench, o);

    auto* cmd_solve = app.add_subcommand("solve", "run a solver, report a timing record");
    add_common_flags(cmd_solve, o);

    auto* cmd_scale = app.add_subcommand("scale", "sweep one axis, emit CSV and a log-log slope");
    std::string axis = "layers", grid_str = "20,40,80,160";
    cmd_scale->add_option("--axis", axis, "layers | blocksize | bandwidth | threads");
    cmd_scale->add_option("--grid", grid_str, "comma-separated grid values");
    add_common_flags(cmd_scale, o);

    auto* cmd_tune = app.add_subcommand("tune", "pick the cheapest solver plan from the cost model");
    int max_levels = 5, s2_max = 4;
    bool execute = false;
    std::string ratios_file;
    cmd_tune->add_option("--max-levels", max_levels, "max recursion depth searched");
    cmd_tune->add_option("--s2-max", s2_max, "max interior group size searched");
    cmd_tune->add_flag("--execute", execute, "also time the chosen plan and the sequential baseline");
    cmd_tune->add_option("--ratios-file", ratios_file, "reuse measured kernel ratios (JSON)");
    cmd_tune->add_option("--samples", samples, "timed iterations when measuring ratios");
    add_common_flags(cmd_tune, o);

    auto* cmd_validate = app.add_subcommand("validate", "run a solver and compare to the oracle");
    add_common_flags(cmd_validate, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_bench->parsed()) {
            std::ostringstream csv;
            csv << "block_size,t_gemm_us,r_lu,r_getrs,samples\n";
            for (int n : parse_int_list(sizes_str)) {
                const int s = samples > 0 ? samples : default_samples(n);
                const KernelRatios r = benchmark_kernels(n, s);
                csv << r.block_size << "," << r.t_gemm * 1e6 << "," << r.r_lu << "," << r.r_getrs
                    << "," << r.sample_count << "\n";
            }
            emit(o, csv.str());
        } else if (cmd_solve->parsed() || cmd_validate->parsed()) {
            if (cmd_validate->parsed()) o.validate = true;
            const auto m = load_or_generate(o);
            const auto s = run_solver(m, o);
            json rec = run_record(m, o, s);
            int rc = 0;
            if (o.validate) rc = validate_into(rec, m, o, s);
            emit(o, rec.dump(2) + "\n");
            return rc;
        } else if (cmd_scale->parsed()) {
            std::ostringstream csv;
            csv << "axis,value,mean_ms,min_ms,max_ms,gemm,lu,getrs\n";
            std::vector<double> xs, ys;
            for (int v : parse_int_list(grid_str)) {
                CommonOpts run = o;
                if (axis == "layers")
                    run.layers = v;
                else if (axis == "blocksize")
                    run.block_size = v;
                else if (axis == "bandwidth")
                    run.bandwidth = v;
                else if (axis == "threads")
                    run.threads = v;
                else
                    throw invalid_argument_error("unknown axis: " + axis);
                const auto m = load_or_generate(run);
                const auto s = run_solver(m, run);
                csv << axis << "," << v << "," << s.mean_ms << "," << s.min_ms << "," << s.max_ms
                    << "," << s.counters.n_gemm << "," << s.counters.n_lu << ","
                    << s.counters.n_getrs << "\n";
                xs.push_back(v);
                ys.push_back(s.mean_ms);
            }
            if ((axis == "layers" || axis == "blocksize") && xs.size() >= 2)
                csv << "# loglog_slope," << fit_loglog_slope(xs, ys) << "\n";
            emit(o, csv.str());
        } else if (cmd_tune->parsed()) {
            KernelRatios ratios;
            if (!ratios_file.empty()) {
                std::ifstream f(ratios_file);
                if (!f) throw invalid_argument_error("cannot open " + ratios_file);
                json j;
                f >> j;
                ratios = ratios_from_json(j);
            } else {
                const int s = samples > 0 ? samples : default_samples(o.block_size);
                ratios = benchmark_kernels(o.block_size, s);
            }
            const TuneResult t = autotune(o.layers, o.threads, ratios, max_levels, s2_max);
            json out{{"ratios", ratios_to_json(ratios)},
                     {"choice", t.use_rgf ? "rgf" : "ddrgf"},
                     {"rgf_gemm_equivalents", t.rgf_cost.gemm_equivalents},
                     {"rgf_predicted_seconds", t.rgf_cost.predicted_seconds}};
            if (t.ddrgf_valid) {
                json levels = json::array();
                for (size_t k = 0; k < t.plan.s2_levels.size(); ++k)
                    levels.push_back({{"level", k + 1},
                                      {"s2", t.plan.s2_levels[k]},
                                      {"threads", t.plan.n_threads}});
                levels.push_back({{"level", t.plan.s2_levels.size() + 1},
                                  {"terminal", true},
                                  {"threads", t.plan.terminal_threads}});
                out["plan"] = levels;
                out["ddrgf_gemm_equivalents"] = t.ddrgf_cost.gemm_equivalents;
                out["ddrgf_predicted_seconds"] = t.ddrgf_cost.predicted_seconds;
                out["ddrgf_breakdown"] = t.ddrgf_cost.breakdown;
            }
            if (execute) {
                const auto m = load_or_generate(o);
                CommonOpts orun = o;
                orun.solver = "rgf";
                out["measured_rgf_ms"] = run_solver(m, orun).mean_ms;
                if (t.ddrgf_valid) {
                    orun.solver = "ddrgf";
                    std::ostringstream plan_str;
                    plan_str << "s2:";
                    for (size_t k = 0; k < t.plan.s2_levels.size(); ++k)
                        plan_str << (k ? "," : "") << t.plan.s2_levels[k];
                    orun.plan_str = plan_str.str();
                    orun.terminal_threads = t.plan.terminal_threads;
                    out["measured_ddrgf_ms"] = run_solver(m, orun).mean_ms;
                }
            }
            emit(o, out.dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
