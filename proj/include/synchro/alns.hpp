#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synchro/instance.hpp"
#include "synchro/random.hpp"
#include "synchro/schedule.hpp"

namespace synchro {

enum class DestroyOp {
    Random,
    WaitingTime,
    LongDistance,
    WorstOrder,
    HistoricalKnowledge,
    Route,
    Zone,
    Proximity,
    RefillPosition,
};
inline constexpr int kDestroyCount = 9;
inline constexpr std::array<DestroyOp, kDestroyCount> kAllDestroyOps{
    DestroyOp::Random,       DestroyOp::WaitingTime, DestroyOp::LongDistance,
    DestroyOp::WorstOrder,   DestroyOp::HistoricalKnowledge, DestroyOp::Route,
    DestroyOp::Zone,         DestroyOp::Proximity,   DestroyOp::RefillPosition,
};

enum class RepairOp { Greedy, Regret };

enum class Outcome { NewBest, Better, Accepted, Rejected };

std::string destroy_name(DestroyOp op);
std::string repair_name(RepairOp op);
std::string outcome_name(Outcome outcome);

/// Route, zone, proximity and refill-position removals ignore the drawn size p.
bool uses_removal_size(DestroyOp op);

struct AlnsConfig {
    int iterMax = -1;  // negative: 100 * n
    double pMin = 0.05;
    double pMax = 0.10;
    int segmentLength = 100;
    double lambda = 0.8;
    std::array<double, 4> psi{7.0, 4.0, 2.0, 1.0};  // new best, better, accepted worse, rejected
    double rho = 0.05;
    double cooling = 0.9995;
    int maxNoImprove = 500;
    double zoneRadius = 0.25;
    int proximityRepeats = -1;  // negative: ceil(0.05 * n)
    double localSearchBudget = 60.0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    int iterations(int n) const;
    int proximity(int n) const;
};

/// Removal-size range for n spray nodes: [ceil(pMin n), floor(pMax n)], widened to at least one node.
std::pair<int, int> removal_range(const AlnsConfig &cfg, int n);

struct OperatorBank {
    std::array<double, kDestroyCount> weight;
    std::array<double, kDestroyCount> score{};  // Psi over the current segment
    std::array<int, kDestroyCount> uses{};      // u over the current segment
    std::array<long, kDestroyCount> total_uses{};
    std::array<long, kDestroyCount> total_new_best{};

    OperatorBank() { weight.fill(1.0); }
    std::array<double, kDestroyCount> probabilities() const;
};

DestroyOp select_destroy(const OperatorBank &bank, Rng &rng);
RepairOp select_repair(Rng &rng);

/// exp(-(fNew - fCurrent) / temp) for a worse candidate, 1 otherwise.
double acceptance_probability(double fNew, double fCurrent, double temp);
Outcome accept(double fNew, double fCurrent, double fBest, double temp, Rng &rng);
double outcome_score(const AlnsConfig &cfg, Outcome outcome);

/// Adds one use of op with score psi to the current segment.
void credit(OperatorBank &bank, DestroyOp op, double psi);
void update_weights(OperatorBank &bank, double lambda);

/// Running minimum of each node's position cost (t_ji + t_ie + m_i).
struct History {
    std::vector<double> best_cost;
    void observe(const Instance &inst, const Solution &sol);
};

/// Position cost of a routed node: t(pred, i) + t(i, succ), depot included.
double detour_cost(const Instance &inst, const Routes &routes, int node);

/// Routed nodes within the closed ball of radius around (x, y), by id.
std::vector<int> nodes_within(const Instance &inst, const Routes &routes, double x, double y, double radius);

struct Removal {
    Routes routes;             // partial routes; may contain empty routes
    std::vector<int> removed;  // removal list in insertion order
};

struct DestroyContext {
    const AlnsConfig *cfg = nullptr;
    History *history = nullptr;
};

Removal destroy(DestroyOp op, const Instance &inst, const Solution &sol, int p, Rng &rng, const DestroyContext &ctx);

/// Inserts every removed node; nullopt when some node has no feasible position.
std::optional<Solution> repair(RepairOp op, const Instance &inst, const Removal &partial, Model model);
std::optional<Solution> repair_greedy(const Instance &inst, const Removal &partial, Model model);
std::optional<Solution> repair_regret(const Instance &inst, const Removal &partial, Model model);

struct TraceRow {
    int iter = 0;
    DestroyOp destroy = DestroyOp::Random;
    RepairOp repair = RepairOp::Greedy;
    int p = 0;
    int removed = 0;
    std::optional<double> objective;  // empty when repair aborted
    double best = 0.0;
    double temp = 0.0;
    Outcome outcome = Outcome::Rejected;
};

struct AlnsResult {
    Solution best;
    double best_objective = 0.0;
    std::vector<TraceRow> trace;
    std::vector<std::array<double, kDestroyCount>> segment_probabilities;
    OperatorBank bank;
    int intensifications = 0;
    double seconds = 0.0;
};

struct AlnsHooks {
    // Called for every complete candidate that the acceptance step keeps.
    std::function<void(int iter, const Solution &, Outcome)> on_accept;
};

/// Throws std::invalid_argument if s0 is infeasible or the config is invalid.
AlnsResult run_alns(const Instance &inst, const Solution &s0, const AlnsConfig &cfg, Model model,
                    const AlnsHooks &hooks = {});

/// CSV with header iter,operator,repair,objective,best,temp,outcome.
std::string trace_csv(const std::vector<TraceRow> &trace);

}  // namespace synchro
