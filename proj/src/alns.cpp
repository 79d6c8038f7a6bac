#include "synchro/alns.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "synchro/exact.hpp"

namespace synchro {

namespace {

constexpr double kTol = 1e-9;

std::size_t slot(DestroyOp op) { return static_cast<std::size_t>(op); }

}  // namespace

std::string destroy_name(DestroyOp op)
{
    switch (op) {
    case DestroyOp::Random: return "random";
    case DestroyOp::WaitingTime: return "waiting_time";
    case DestroyOp::LongDistance: return "long_distance";
    case DestroyOp::WorstOrder: return "worst_order";
    case DestroyOp::HistoricalKnowledge: return "historical_knowledge";
    case DestroyOp::Route: return "route";
    case DestroyOp::Zone: return "zone";
    case DestroyOp::Proximity: return "proximity";
    case DestroyOp::RefillPosition: return "refill_position";
    }
    return "unknown";
}

std::string repair_name(RepairOp op) { return op == RepairOp::Greedy ? "greedy" : "regret"; }

std::string outcome_name(Outcome outcome)
{
    switch (outcome) {
    case Outcome::NewBest: return "new_best";
    case Outcome::Better: return "better";
    case Outcome::Accepted: return "accepted";
    case Outcome::Rejected: return "rejected";
    }
    return "unknown";
}

bool uses_removal_size(DestroyOp op)
{
    return op != DestroyOp::Route && op != DestroyOp::Zone && op != DestroyOp::Proximity && op != DestroyOp::RefillPosition;
}

void AlnsConfig::validate() const
{
    auto fail = [](const std::string &field, const std::string &why) { throw std::invalid_argument(field + ": " + why); };
    if (!(pMin > 0.0 && pMin <= pMax && pMax < 1.0)) fail("pMin/pMax", "need 0 < pMin <= pMax < 1");
    if (!(cooling > 0.0 && cooling < 1.0)) fail("cooling", "need 0 < cooling < 1");
    if (!(lambda > 0.0 && lambda < 1.0)) fail("lambda", "need 0 < lambda < 1");
    if (!(psi[0] >= psi[1] && psi[1] >= psi[2] && psi[2] >= psi[3] && psi[3] > 0.0)) fail("psi", "need psi1 >= psi2 >= psi3 >= psi4 > 0");
    if (segmentLength < 1) fail("segmentLength", "must be positive");
    if (rho < 0.0) fail("rho", "must be non-negative");
    if (maxNoImprove < 1) fail("maxNoImprove", "must be positive");
    if (zoneRadius < 0.0) fail("zoneRadius", "must be non-negative");
}

int AlnsConfig::iterations(int n) const { return iterMax < 0 ? 100 * n : iterMax; }

int AlnsConfig::proximity(int n) const
{
    return proximityRepeats < 0 ? static_cast<int>(std::ceil(0.05 * n - 1e-9)) : proximityRepeats;
}

std::pair<int, int> removal_range(const AlnsConfig &cfg, int n)
{
    const int lo = std::max(1, static_cast<int>(std::ceil(cfg.pMin * n - 1e-9)));
    const int hi = std::max(lo, static_cast<int>(std::floor(cfg.pMax * n + 1e-9)));
    return {std::min(lo, n), std::min(hi, n)};
}

std::array<double, kDestroyCount> OperatorBank::probabilities() const
{
    double total = 0.0;
    for (double w : weight) total += w;
    std::array<double, kDestroyCount> out{};
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = weight[d] / total;
    return out;
}

DestroyOp select_destroy(const OperatorBank &bank, Rng &rng)
{
    double total = 0.0;
    for (double w : bank.weight) total += w;
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t d = 0; d < kAllDestroyOps.size(); ++d) {
        acc += bank.weight[d];
        if (u < acc) return kAllDestroyOps[d];
    }
    return kAllDestroyOps.back();
}

RepairOp select_repair(Rng &rng) { return uniform_int(rng, 0, 1) == 0 ? RepairOp::Greedy : RepairOp::Regret; }

double acceptance_probability(double fNew, double fCurrent, double temp)
{
    const double delta = fNew - fCurrent;
    if (delta <= 0.0) return 1.0;
    if (temp <= 0.0) return 0.0;
    return std::exp(-delta / temp);
}

Outcome accept(double fNew, double fCurrent, double fBest, double temp, Rng &rng)
{
    if (fNew < fBest - kTol) return Outcome::NewBest;
    if (fNew < fCurrent - kTol) return Outcome::Better;
    return uniform01(rng) < acceptance_probability(fNew, fCurrent, temp) ? Outcome::Accepted : Outcome::Rejected;
}

double outcome_score(const AlnsConfig &cfg, Outcome outcome) { return cfg.psi[static_cast<std::size_t>(outcome)]; }

void credit(OperatorBank &bank, DestroyOp op, double psi)
{
    bank.score[slot(op)] += psi;
    ++bank.uses[slot(op)];
    ++bank.total_uses[slot(op)];
}

void update_weights(OperatorBank &bank, double lambda)
{
    for (std::size_t d = 0; d < bank.weight.size(); ++d) {
        if (bank.uses[d] > 0) bank.weight[d] = lambda * bank.weight[d] + (1.0 - lambda) * bank.score[d] / bank.uses[d];
        bank.score[d] = 0.0;
        bank.uses[d] = 0;
    }
}

AlnsResult run_alns(const Instance &inst, const Solution &s0, const AlnsConfig &cfg, Model model, const AlnsHooks &hooks)
{
    cfg.validate();
    const auto violations = check_feasible(inst, s0);
    if (!violations.empty()) throw std::invalid_argument("initial solution infeasible: " + violations.front().message);

    const auto started = std::chrono::steady_clock::now();
    const int n = inst.size();
    const int iterations = cfg.iterations(n);
    const auto [lo, hi] = removal_range(cfg, n);
    Rng rng(cfg.seed);

    AlnsResult result;
    Solution current = s0;
    result.best = s0;
    double f_current = evaluate(inst, s0, model);
    result.best_objective = f_current;
    double temp = cfg.rho * f_current;
    History history;
    history.observe(inst, s0);
    const DestroyContext ctx{&cfg, &history};
    int no_improve = 0;

    for (int iter = 1; iter <= iterations; ++iter) {
        TraceRow row;
        row.iter = iter;
        row.destroy = select_destroy(result.bank, rng);
        row.repair = select_repair(rng);
        row.p = uniform_int(rng, lo, hi);
        row.temp = temp;

        const Removal removal = destroy(row.destroy, inst, current, row.p, rng, ctx);
        row.removed = static_cast<int>(removal.removed.size());
        std::optional<Solution> candidate = repair(row.repair, inst, removal, model);

        if (!candidate) {
            row.outcome = Outcome::Rejected;
        }
        else {
            const double f = evaluate(inst, *candidate, model);
            row.objective = f;
            history.observe(inst, *candidate);
            row.outcome = accept(f, f_current, result.best_objective, temp, rng);
            if (row.outcome != Outcome::Rejected) {
                current = std::move(*candidate);
                f_current = f;
            }
            if (row.outcome == Outcome::NewBest) {
                result.best = current;
                result.best_objective = f;
                Solution improved = optimize_fixed_routes(inst, result.best, cfg.localSearchBudget, model);
                const double fi = evaluate(inst, improved, model);
                if (fi < result.best_objective - kTol) {
                    ++result.intensifications;
                    result.best = improved;
                    result.best_objective = fi;
                    current = std::move(improved);
                    f_current = fi;
                }
                ++result.bank.total_new_best[slot(row.destroy)];
            }
            if (row.outcome != Outcome::Rejected && hooks.on_accept) hooks.on_accept(iter, current, row.outcome);
        }

        credit(result.bank, row.destroy, outcome_score(cfg, row.outcome));
        if (iter % cfg.segmentLength == 0) {
            update_weights(result.bank, cfg.lambda);
            result.segment_probabilities.push_back(result.bank.probabilities());
        }

        no_improve = row.outcome == Outcome::NewBest ? 0 : no_improve + 1;
        if (no_improve >= cfg.maxNoImprove) {
            current = result.best;
            f_current = result.best_objective;
            no_improve = 0;
        }
        temp *= cfg.cooling;
        row.best = result.best_objective;
        result.trace.push_back(row);
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::string trace_csv(const std::vector<TraceRow> &trace)
{
    std::string out = "iter,operator,repair,objective,best,temp,outcome\n";
    char buf[256];
    for (const TraceRow &row : trace) {
        char obj[64];
        if (row.objective) {
            std::snprintf(obj, sizeof obj, "%.9f", *row.objective);
        }
        else {
            std::snprintf(obj, sizeof obj, "inf");
        }
        std::snprintf(buf, sizeof buf, "%d,%s,%s,%s,%.9f,%.9g,%s\n", row.iter, destroy_name(row.destroy).c_str(),
                      repair_name(row.repair).c_str(), obj, row.best, row.temp, outcome_name(row.outcome).c_str());
        out += buf;
    }
    return out;
}

}  // namespace synchro
