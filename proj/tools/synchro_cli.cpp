#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "synchro/alns.hpp"
#include "synchro/baseline.hpp"
#include "synchro/construction.hpp"
#include "synchro/exact.hpp"
#include "synchro/instance.hpp"
#include "synchro/milp.hpp"

using namespace synchro;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(double v, const char *spec = "%.6f")
{
    if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_text(const fs::path &path, const std::string &text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct ParamFlags {
    std::optional<double> Qs, Qt, xi, gamma, tMax, speed;

    void add(CLI::App *app)
    {
        app->add_option("--qs", Qs, "sprayer tank capacity");
        app->add_option("--qt", Qt, "tanker capacity");
        app->add_option("--xi", xi, "sprayer refill duration");
        app->add_option("--gamma", gamma, "tanker depot refill duration");
        app->add_option("--tmax", tMax, "working horizon");
        app->add_option("--speed", speed, "travel speed");
    }

    void apply(InstanceParams &p) const
    {
        if (Qs) p.Qs = *Qs;
        if (Qt) p.Qt = *Qt;
        if (xi) p.xi = *xi;
        if (gamma) p.gamma = *gamma;
        if (tMax) p.tMax = *tMax;
        if (speed) p.speed = *speed;
    }
};

struct AlnsFlags {
    int iters = -1;
    double rlMin = 5.0, rlMax = 10.0;
    int segment = 100;
    double lambda = 0.8, rho = 0.05, cooling = 0.9995;
    int maxNoImprove = 500;
    double lsBudget = 60.0;

    void add(CLI::App *app)
    {
        app->add_option("--iters", iters, "ALNS iterations (default 100 n)");
        app->add_option("--rl-min", rlMin, "smallest removal size, percent of n");
        app->add_option("--rl-max", rlMax, "largest removal size, percent of n");
        app->add_option("--segment", segment, "iterations per weight segment");
        app->add_option("--lambda", lambda, "weight reaction factor");
        app->add_option("--rho", rho, "initial temperature factor");
        app->add_option("--cooling", cooling, "temperature decay per iteration");
        app->add_option("--max-no-improve", maxNoImprove, "iterations without a new best before restarting from it");
        app->add_option("--ls-budget", lsBudget, "seconds per intensification");
    }

    AlnsConfig config(std::uint64_t seed) const
    {
        AlnsConfig cfg;
        cfg.iterMax = iters;
        cfg.pMin = rlMin / 100.0;
        cfg.pMax = rlMax / 100.0;
        cfg.segmentLength = segment;
        cfg.lambda = lambda;
        cfg.rho = rho;
        cfg.cooling = cooling;
        cfg.maxNoImprove = maxNoImprove;
        cfg.localSearchBudget = lsBudget;
        cfg.seed = seed;
        return cfg;
    }
};

const char *kSummaryHeader = "method,objective,routing,waiting,refills,time_s,improvement_pct";

std::string summary_row(const std::string &method, const Instance &inst, const Solution &sol, Model model, double seconds,
                        std::optional<double> start)
{
    const double f = evaluate(inst, sol, model);
    std::string improvement;
    if (start && *start > 0) improvement = fmt(100.0 * (*start - f) / *start, "%.4f");
    return method + "," + fmt(f) + "," + fmt(sol.objective.routing) + "," + fmt(sol.objective.waiting) + "," +
           std::to_string(sol.refill_count()) + "," + fmt(seconds, "%.3f") + "," + improvement;
}

int cmd_gen(int n, int sprayers, std::uint64_t seed, const ParamFlags &pf, double field, const std::string &out)
{
    GeneratorOptions opt;
    opt.fieldSize = field;
    pf.apply(opt.params);
    const Instance inst = generate_instance(n, sprayers, seed, opt);
    if (out.empty() || out == "-") {
        std::cout << instance_to_json(inst);
    }
    else {
        write_instance(inst, out);
    }
    return 0;
}

struct SolveFlags {
    std::string instance;
    int model = 1;
    std::uint64_t seed = 1;
    std::string exportLp, out, trace;
    bool baseline = false;
    bool oracle = false;
};

int cmd_solve(const SolveFlags &sf, const AlnsFlags &af)
{
    const Instance inst = read_instance(sf.instance);
    const Model model = parse_model(sf.model);

    if (!sf.exportLp.empty()) {
        const ConstraintSystem cs = build_model(inst, model);
        export_lp(cs, sf.exportLp);
        write_text(sf.exportLp + ".deviations.json", deviations_json(cs));
    }

    std::cout << kSummaryHeader << "\n";
    std::optional<Solution> base;
    if (sf.baseline) {
        const auto t0 = Clock::now();
        try {
            base = run_baseline(inst);
            std::cout << summary_row("baseline", inst, *base, model, seconds_since(t0), std::nullopt) << "\n";
        }
        catch (const InfeasibleInstance &e) {
            std::cerr << "baseline: " << e.what() << "\n";
        }
    }

    const auto t0 = Clock::now();
    const Solution s0 = build_initial(inst, sf.seed);
    const double f0 = evaluate(inst, s0, model);
    const AlnsResult result = run_alns(inst, s0, af.config(sf.seed), model);
    const double elapsed = seconds_since(t0);
    std::cout << summary_row("alns", inst, result.best, model, elapsed, f0) << "\n";

    if (sf.oracle) {
        const auto t1 = Clock::now();
        const Solution opt = brute_force_optimum(inst, model);
        const double fo = evaluate(inst, opt, model);
        std::cout << summary_row("optimum", inst, opt, model, seconds_since(t1), f0) << "\n";
        std::cout << "gap_to_optimum_pct," << fmt(fo > 0 ? 100.0 * (result.best_objective - fo) / fo : 0.0, "%.4f") << "\n";
    }
    if (base) {
        const double fb = evaluate(inst, *base, Model::Model1);
        const double fa = evaluate(inst, result.best, Model::Model1);
        std::cout << "savings_pct," << fmt(savings_pct(fb, fa), "%.4f") << "\n";
    }

    if (!sf.out.empty()) write_text(sf.out, solution_to_json(result.best));
    if (!sf.trace.empty()) write_text(sf.trace, trace_csv(result.trace));
    return is_feasible(inst, result.best) ? 0 : 1;
}

struct BenchFlags {
    std::vector<int> sizes{30};
    std::vector<int> sprayers{2};
    int instances = 1;
    int seeds = 3;
    std::uint64_t instanceSeed = 1;
    std::string design = "default";
    int model = 1;
    bool baseline = false;
    std::string out, traceDir, operators;
    std::vector<std::string> files;
};

struct BenchConfig {
    std::string name;
    AlnsConfig cfg;
    int iterFactor = 0;  // 0: take iterMax as given
};

struct BenchTask {
    std::string instance;
    const Instance *inst = nullptr;
    const BenchConfig *config = nullptr;
    std::uint64_t seed = 0;
};

struct BenchResult {
    bool ok = false;
    std::string error;
    double objective = 0, gap = 0, time = 0, waiting = 0, routing = 0;
    std::optional<double> savings;
    OperatorBank bank;
};

std::vector<BenchConfig> bench_configs(const std::string &design, const AlnsFlags &af)
{
    std::vector<BenchConfig> configs;
    auto base = [&](const std::string &name) {
        BenchConfig c;
        c.name = name;
        c.cfg = af.config(1);
        return c;
    };
    if (design == "default") {
        configs.push_back(base("default"));
    }
    else if (design == "rl") {
        const std::vector<std::tuple<std::string, double, double>> ranges{
            {"RL1", 0.05, 0.10}, {"RL2", 0.07, 0.15}, {"RL3", 0.075, 0.125}};
        for (const auto &[name, lo, hi] : ranges) {
            BenchConfig c = base(name);
            c.cfg.pMin = lo;
            c.cfg.pMax = hi;
            configs.push_back(c);
        }
    }
    else if (design == "iters") {
        for (int factor : {50, 100, 150, 200}) {
            BenchConfig c = base("I" + std::to_string(factor) + "n");
            c.iterFactor = factor;
            configs.push_back(c);
        }
    }
    else {
        throw CLI::ValidationError("--design", "unknown design " + design);
    }
    return configs;
}

BenchResult run_task(const BenchTask &task, Model model, bool baseline, const std::string &traceDir)
{
    BenchResult r;
    const Instance &inst = *task.inst;
    try {
        AlnsConfig cfg = task.config->cfg;
        cfg.seed = task.seed;
        if (task.config->iterFactor > 0) cfg.iterMax = task.config->iterFactor * inst.size();
        const auto t0 = Clock::now();
        const Solution s0 = build_initial(inst, task.seed);
        const double f0 = evaluate(inst, s0, model);
        const AlnsResult res = run_alns(inst, s0, cfg, model);
        r.time = seconds_since(t0);
        r.objective = res.best_objective;
        r.gap = f0 > 0 ? 100.0 * (f0 - res.best_objective) / f0 : 0.0;
        r.waiting = res.best.objective.waiting;
        r.routing = res.best.objective.routing;
        r.bank = res.bank;
        r.ok = is_feasible(inst, res.best);
        if (baseline) {
            const Solution b = run_baseline(inst);
            r.savings = savings_pct(evaluate(inst, b, Model::Model1), evaluate(inst, res.best, Model::Model1));
        }
        if (!traceDir.empty()) {
            const std::string stem = task.instance + "_" + task.config->name + "_s" + std::to_string(task.seed);
            write_text(fs::path(traceDir) / (stem + ".trace.csv"), trace_csv(res.trace));
            write_text(fs::path(traceDir) / (stem + ".solution.json"), solution_to_json(res.best));
        }
    }
    catch (const std::exception &e) {
        r.ok = false;
        r.error = e.what();
    }
    return r;
}

int thread_cap()
{
    if (const char *env = std::getenv("SYNCHRO_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_bench(const BenchFlags &bf, const AlnsFlags &af)
{
    const Model model = parse_model(bf.model);
    const std::vector<BenchConfig> configs = bench_configs(bf.design, af);

    std::vector<std::pair<std::string, Instance>> instances;
    if (!bf.files.empty()) {
        for (const std::string &f : bf.files) instances.emplace_back(fs::path(f).stem().string(), read_instance(f));
    }
    else {
        for (int n : bf.sizes) {
            for (int sp : bf.sprayers) {
                for (int k = 0; k < bf.instances; ++k) {
                    const std::uint64_t seed = bf.instanceSeed + static_cast<std::uint64_t>(k);
                    const std::string name = "n" + std::to_string(n) + "_sp" + std::to_string(sp) + "_i" + std::to_string(seed);
                    instances.emplace_back(name, generate_instance(n, sp, seed));
                }
            }
        }
    }

    std::vector<BenchTask> tasks;
    for (const BenchConfig &c : configs) {
        for (const auto &[name, inst] : instances) {
            for (int s = 1; s <= bf.seeds; ++s) tasks.push_back({name, &inst, &c, static_cast<std::uint64_t>(s)});
        }
    }

    std::vector<BenchResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) results[k] = run_task(tasks[k], model, bf.baseline, bf.traceDir);
    };
    const int threads = std::min<int>(thread_cap(), static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread &t : pool) t.join();

    std::ostringstream csv;
    csv << "instance,n,sprayers,seed,config,objective,gap_pct,time_s,waiting,routing,savings_pct\n";
    bool all_ok = true;
    auto opt = [](const std::optional<double> &v) { return v ? fmt(*v, "%.4f") : std::string(); };
    for (const BenchConfig &c : configs) {
        std::vector<const BenchResult *> rows;
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (tasks[k].config != &c) continue;
            const BenchResult &r = results[k];
            if (!r.ok) {
                all_ok = false;
                std::cerr << tasks[k].instance << " seed " << tasks[k].seed << " " << c.name << ": "
                          << (r.error.empty() ? "infeasible result" : r.error) << "\n";
                continue;
            }
            rows.push_back(&r);
            csv << tasks[k].instance << "," << tasks[k].inst->size() << "," << tasks[k].inst->numSp() << "," << tasks[k].seed
                << "," << c.name << "," << fmt(r.objective) << "," << fmt(r.gap, "%.4f") << "," << fmt(r.time, "%.3f") << ","
                << fmt(r.waiting) << "," << fmt(r.routing) << "," << opt(r.savings) << "\n";
        }
        if (rows.empty()) continue;
        auto column = [&](auto get) {
            std::vector<double> v;
            for (const BenchResult *r : rows) v.push_back(get(*r));
            return v;
        };
        const std::vector<std::vector<double>> cols{
            column([](const BenchResult &r) { return r.objective; }), column([](const BenchResult &r) { return r.gap; }),
            column([](const BenchResult &r) { return r.time; }), column([](const BenchResult &r) { return r.waiting; }),
            column([](const BenchResult &r) { return r.routing; })};
        std::vector<double> sav;
        for (const BenchResult *r : rows) {
            if (r->savings) sav.push_back(*r->savings);
        }
        for (const char *agg : {"Avg", "Min", "Max"}) {
            auto reduce = [&](const std::vector<double> &v) {
                if (std::string(agg) == "Min") return *std::min_element(v.begin(), v.end());
                if (std::string(agg) == "Max") return *std::max_element(v.begin(), v.end());
                double s = 0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            csv << agg << ",,,," << c.name << "," << fmt(reduce(cols[0])) << "," << fmt(reduce(cols[1]), "%.4f") << ","
                << fmt(reduce(cols[2]), "%.3f") << "," << fmt(reduce(cols[3])) << "," << fmt(reduce(cols[4])) << ","
                << (sav.empty() ? std::string() : fmt(reduce(sav), "%.4f")) << "\n";
        }
    }
    if (bf.out.empty() || bf.out == "-") {
        std::cout << csv.str();
    }
    else {
        write_text(bf.out, csv.str());
    }

    if (!bf.operators.empty()) {
        std::ostringstream ops;
        ops << "config,operator,uses,new_best,performance_pct\n";
        for (const BenchConfig &c : configs) {
            std::array<long, kDestroyCount> uses{}, best{};
            for (std::size_t k = 0; k < tasks.size(); ++k) {
                if (tasks[k].config != &c || !results[k].ok) continue;
                for (int o = 0; o < kDestroyCount; ++o) {
                    uses[static_cast<std::size_t>(o)] += results[k].bank.total_uses[static_cast<std::size_t>(o)];
                    best[static_cast<std::size_t>(o)] += results[k].bank.total_new_best[static_cast<std::size_t>(o)];
                }
            }
            for (int o = 0; o < kDestroyCount; ++o) {
                const auto u = uses[static_cast<std::size_t>(o)];
                const auto b = best[static_cast<std::size_t>(o)];
                ops << c.name << "," << destroy_name(kAllDestroyOps[static_cast<std::size_t>(o)]) << "," << u << "," << b << ","
                    << fmt(u > 0 ? 100.0 * static_cast<double>(b) / static_cast<double>(u) : 0.0, "%.4f") << "\n";
            }
        }
        write_text(bf.operators, ops.str());
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Sprayer and tender-tanker routing solver"};
    app.require_subcommand(1);

    int genN = 0, genSp = 1;
    std::uint64_t genSeed = 1;
    double genField = 3.0;
    std::string genOut;
    ParamFlags genParams;
    CLI::App *gen = app.add_subcommand("gen", "generate a random instance");
    gen->add_option("--n", genN, "number of spray nodes")->required()->check(CLI::PositiveNumber);
    gen->add_option("--sprayers", genSp, "number of sprayers")->check(CLI::PositiveNumber);
    gen->add_option("--seed", genSeed, "generator seed");
    gen->add_option("--field", genField, "side of the square field")->check(CLI::PositiveNumber);
    gen->add_option("--out", genOut, "output file (stdout when omitted)");
    genParams.add(gen);

    SolveFlags sf;
    AlnsFlags solveAlns;
    CLI::App *solve = app.add_subcommand("solve", "solve one instance with ALNS");
    solve->add_option("--instance", sf.instance, "instance JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--model", sf.model, "objective: 1 total time, 2 makespan, 3 routing")->check(CLI::Range(1, 3));
    solve->add_option("--seed", sf.seed, "random seed");
    solveAlns.add(solve);
    solve->add_option("--export-lp", sf.exportLp, "also write the MILP as an LP file");
    solve->add_flag("--baseline", sf.baseline, "also run the route-first practice baseline");
    solve->add_flag("--oracle", sf.oracle, "also compute the exact optimum (n <= 9, at most 2 sprayers)");
    solve->add_option("--out", sf.out, "write the best solution as JSON");
    solve->add_option("--trace", sf.trace, "write the iteration trace as CSV");

    BenchFlags bf;
    AlnsFlags benchAlns;
    CLI::App *bench = app.add_subcommand("bench", "run an experiment grid and report CSV");
    bench->add_option("--sizes", bf.sizes, "spray node counts")->delimiter(',');
    bench->add_option("--sprayers", bf.sprayers, "sprayer counts")->delimiter(',');
    bench->add_option("--instances", bf.instances, "instances per (size, sprayers)")->check(CLI::PositiveNumber);
    bench->add_option("--instance-seed", bf.instanceSeed, "seed of the first generated instance");
    bench->add_option("--instance-files", bf.files, "instance JSON files instead of generated ones")->check(CLI::ExistingFile);
    bench->add_option("--seeds", bf.seeds, "ALNS seeds per instance")->check(CLI::PositiveNumber);
    bench->add_option("--design", bf.design, "default, rl (removal size sweep) or iters (iteration sweep)")
        ->check(CLI::IsMember({"default", "rl", "iters"}));
    bench->add_option("--model", bf.model, "objective")->check(CLI::Range(1, 3));
    bench->add_flag("--baseline", bf.baseline, "fill savings_pct against the practice baseline");
    bench->add_option("--out", bf.out, "CSV report (stdout when omitted)");
    bench->add_option("--trace-dir", bf.traceDir, "directory for per-run traces and solutions");
    bench->add_option("--operators", bf.operators, "write the operator contribution report");
    benchAlns.add(bench);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(genN, genSp, genSeed, genParams, genField, genOut);
        if (solve->parsed()) return cmd_solve(sf, solveAlns);
        if (bench->parsed()) return cmd_bench(bf, benchAlns);
    }
    catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
