#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synchro/alns.hpp"

namespace synchro {

namespace {

std::size_t idx(int id) { return static_cast<std::size_t>(id); }

// k draws without replacement from pool, in draw order.
std::vector<int> sample(std::vector<int> pool, int k, Rng &rng)
{
    k = std::min<int>(k, static_cast<int>(pool.size()));
    for (int i = 0; i < k; ++i) {
        const int j = uniform_int(rng, i, static_cast<int>(pool.size()) - 1);
        std::swap(pool[idx(i)], pool[idx(j)]);
    }
    pool.resize(idx(k));
    return pool;
}

std::vector<int> routed_nodes(const Routes &routes)
{
    std::vector<int> out;
    for (const Route &r : routes) out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end());
    return out;
}

// Top k nodes by score, ties to the lower id.
std::vector<int> top_by_score(const std::vector<int> &nodes, const std::vector<double> &score, int k)
{
    std::vector<int> order = nodes;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[idx(a)] > score[idx(b)]; });
    order.resize(std::min(order.size(), idx(std::max(k, 0))));
    return order;
}

Routes without(const Routes &routes, const std::vector<int> &removed)
{
    Routes out = routes;
    for (Route &r : out) {
        r.erase(std::remove_if(r.begin(), r.end(),
                               [&](int i) { return std::find(removed.begin(), removed.end(), i) != removed.end(); }),
                r.end());
    }
    return out;
}

std::pair<int, int> neighbours_of(const Routes &routes, int node)
{
    for (const Route &r : routes) {
        const auto it = std::find(r.begin(), r.end(), node);
        if (it == r.end()) continue;
        const int pred = it == r.begin() ? 0 : *(it - 1);
        const int succ = it + 1 == r.end() ? 0 : *(it + 1);
        return {pred, succ};
    }
    return {0, 0};
}

std::vector<int> destroy_random(const Routes &routes, int p, Rng &rng) { return sample(routed_nodes(routes), p, rng); }

std::vector<int> destroy_waiting_time(const Instance &inst, const Solution &sol, int p, Rng &rng)
{
    const std::vector<int> nodes = routed_nodes(sol.routes);
    std::vector<double> wait(sol.timeline.size(), 0.0);
    for (int i : nodes) wait[idx(i)] = sol.timeline[idx(i)].wait;
    const int eligible = std::max(1, static_cast<int>(std::ceil(0.2 * inst.size() - 1e-9)));
    std::vector<int> ranked = top_by_score(nodes, wait, static_cast<int>(nodes.size()));
    std::vector<int> top(ranked.begin(), ranked.begin() + std::min<long>(eligible, static_cast<long>(ranked.size())));
    std::vector<int> rest(ranked.begin() + static_cast<long>(top.size()), ranked.end());
    std::vector<int> out = sample(top, p, rng);
    if (static_cast<int>(out.size()) < p) {
        const auto extra = sample(rest, p - static_cast<int>(out.size()), rng);
        out.insert(out.end(), extra.begin(), extra.end());
    }
    return out;
}

std::vector<int> destroy_long_distance(const Instance &inst, const Routes &routes, int p)
{
    const std::vector<int> nodes = routed_nodes(routes);
    std::vector<double> score(inst.nodes().size(), 0.0);
    for (int i : nodes) score[idx(i)] = detour_cost(inst, routes, i);
    return top_by_score(nodes, score, p);
}

std::vector<int> destroy_worst_order(const Instance &inst, const Solution &sol, int p)
{
    std::vector<int> out;
    Routes routes = sol.routes;
    Solution current = sol;
    for (int k = 0; k < p; ++k) {
        const std::vector<int> nodes = routed_nodes(routes);
        if (nodes.empty()) break;
        int pick = -1;
        double worst = -std::numeric_limits<double>::infinity();
        for (int i : nodes) {
            const auto [pred, succ] = neighbours_of(routes, i);
            const double m_next = succ == 0 ? 0.0 : current.timeline[idx(succ)].wait;
            const double score = m_next + inst.t(pred, i) + inst.t(i, succ);
            if (score > worst) {
                worst = score;
                pick = i;
            }
        }
        out.push_back(pick);
        routes = without(routes, {pick});
        current = schedule_routes(inst, routes);
    }
    return out;
}

std::vector<int> destroy_historical(const Instance &inst, const Solution &sol, int p, History &history)
{
    history.observe(inst, sol);
    const std::vector<int> nodes = routed_nodes(sol.routes);
    std::vector<double> gap(inst.nodes().size(), 0.0);
    for (int i : nodes) {
        const double cost = detour_cost(inst, sol.routes, i) + sol.timeline[idx(i)].wait;
        gap[idx(i)] = cost - history.best_cost[idx(i)];
    }
    return top_by_score(nodes, gap, p);
}

std::vector<int> destroy_route(const Routes &routes, Rng &rng)
{
    return routes[idx(uniform_int(rng, 0, static_cast<int>(routes.size()) - 1))];
}

std::vector<int> destroy_zone(const Instance &inst, const Routes &routes, int p, double radius, Rng &rng)
{
    double lox = 0.0, hix = 0.0, loy = 0.0, hiy = 0.0;
    for (const Node &node : inst.nodes()) {
        lox = std::min(lox, node.x);
        hix = std::max(hix, node.x);
        loy = std::min(loy, node.y);
        hiy = std::max(hiy, node.y);
    }
    // One draw plus ten resamples before falling back to random removal.
    for (int attempt = 0; attempt <= 10; ++attempt) {
        const double x = uniform_real(rng, lox, hix);
        const double y = uniform_real(rng, loy, hiy);
        std::vector<int> out = nodes_within(inst, routes, x, y, radius);
        if (!out.empty()) return out;
    }
    return destroy_random(routes, p, rng);
}

std::vector<int> destroy_proximity(const Routes &routes, int repeats, Rng &rng)
{
    std::vector<int> out;
    for (int k = 0; k < repeats; ++k) {
        std::vector<int> pool;
        for (int i : routed_nodes(routes)) {
            if (std::find(out.begin(), out.end(), i) == out.end()) pool.push_back(i);
        }
        if (pool.empty()) break;
        const int pick = pool[idx(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))];
        for (const Route &r : routes) {
            const auto it = std::find(r.begin(), r.end(), pick);
            if (it == r.end()) continue;
            const long at = it - r.begin();
            for (long pos = std::max(0L, at - 2); pos <= std::min(static_cast<long>(r.size()) - 1, at + 2); ++pos) {
                const int node = r[static_cast<std::size_t>(pos)];
                if (std::find(out.begin(), out.end(), node) == out.end()) out.push_back(node);
            }
        }
    }
    return out;
}

std::vector<int> destroy_refill_position(const Solution &sol)
{
    std::vector<int> out;
    for (int i : routed_nodes(sol.routes)) {
        if (sol.timeline[idx(i)].refill) out.push_back(i);
    }
    return out;
}

struct Slot {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t route = 0;
    std::size_t pos = 0;
};

struct SlotScan {
    Slot best;
    double second = std::numeric_limits<double>::infinity();
    int feasible = 0;
};

// Every feasible insertion of node, costed by the full objective of the re-synchronized partial
// solution. When the remaining nodes are just enough to fill the empty routes, only empty routes
// may take the node.
SlotScan scan_slots(const Instance &inst, const Routes &routes, int node, int unplaced, Model model)
{
    const int empty = static_cast<int>(std::count_if(routes.begin(), routes.end(), [](const Route &r) { return r.empty(); }));
    const bool must_fill = unplaced <= empty;
    SlotScan scan;
    Routes trial = routes;
    const FeasibilityOptions partial{false};
    for (std::size_t r = 0; r < routes.size(); ++r) {
        if (must_fill && !routes[r].empty()) continue;
        for (std::size_t pos = 0; pos <= routes[r].size(); ++pos) {
            trial[r].insert(trial[r].begin() + static_cast<long>(pos), node);
            const Solution sol = schedule_routes(inst, trial);
            trial[r].erase(trial[r].begin() + static_cast<long>(pos));
            if (!check_feasible(inst, sol, partial).empty()) continue;
            const double cost = evaluate(inst, sol, model);
            ++scan.feasible;
            if (cost < scan.best.cost) {
                scan.second = scan.best.cost;
                scan.best = {cost, r, pos};
            }
            else if (cost < scan.second) {
                scan.second = cost;
            }
        }
    }
    return scan;
}

}  // namespace

std::vector<int> nodes_within(const Instance &inst, const Routes &routes, double x, double y, double radius)
{
    std::vector<int> out;
    for (int i : routed_nodes(routes)) {
        if (std::hypot(inst.node(i).x - x, inst.node(i).y - y) <= radius) out.push_back(i);
    }
    return out;
}

double detour_cost(const Instance &inst, const Routes &routes, int node)
{
    const auto [pred, succ] = neighbours_of(routes, node);
    return inst.t(pred, node) + inst.t(node, succ);
}

void History::observe(const Instance &inst, const Solution &sol)
{
    if (best_cost.size() != inst.nodes().size()) best_cost.assign(inst.nodes().size(), std::numeric_limits<double>::infinity());
    for (const Route &r : sol.routes) {
        for (int i : r) {
            const double cost = detour_cost(inst, sol.routes, i) + sol.timeline[idx(i)].wait;
            best_cost[idx(i)] = std::min(best_cost[idx(i)], cost);
        }
    }
}

Removal destroy(DestroyOp op, const Instance &inst, const Solution &sol, int p, Rng &rng, const DestroyContext &ctx)
{
    std::vector<int> removed;
    switch (op) {
    case DestroyOp::Random: removed = destroy_random(sol.routes, p, rng); break;
    case DestroyOp::WaitingTime: removed = destroy_waiting_time(inst, sol, p, rng); break;
    case DestroyOp::LongDistance: removed = destroy_long_distance(inst, sol.routes, p); break;
    case DestroyOp::WorstOrder: removed = destroy_worst_order(inst, sol, p); break;
    case DestroyOp::HistoricalKnowledge: {
        History scratch;
        removed = destroy_historical(inst, sol, p, ctx.history ? *ctx.history : scratch);
        break;
    }
    case DestroyOp::Route: removed = destroy_route(sol.routes, rng); break;
    case DestroyOp::Zone: {
        const double radius = ctx.cfg ? ctx.cfg->zoneRadius : AlnsConfig{}.zoneRadius;
        removed = destroy_zone(inst, sol.routes, p, radius, rng);
        break;
    }
    case DestroyOp::Proximity: {
        const int repeats = (ctx.cfg ? *ctx.cfg : AlnsConfig{}).proximity(inst.size());
        removed = destroy_proximity(sol.routes, repeats, rng);
        break;
    }
    case DestroyOp::RefillPosition: removed = destroy_refill_position(sol); break;
    }
    return {without(sol.routes, removed), removed};
}

std::optional<Solution> repair_greedy(const Instance &inst, const Removal &partial, Model model)
{
    Routes routes = partial.routes;
    int unplaced = static_cast<int>(partial.removed.size());
    for (int node : partial.removed) {
        const SlotScan scan = scan_slots(inst, routes, node, unplaced, model);
        if (scan.feasible == 0) return std::nullopt;
        Route &r = routes[scan.best.route];
        r.insert(r.begin() + static_cast<long>(scan.best.pos), node);
        --unplaced;
    }
    return schedule_routes(inst, routes);
}

std::optional<Solution> repair_regret(const Instance &inst, const Removal &partial, Model model)
{
    Routes routes = partial.routes;
    std::vector<int> left = partial.removed;
    while (!left.empty()) {
        const int unplaced = static_cast<int>(left.size());
        std::size_t pick = 0;
        double pick_regret = -1.0;
        Slot pick_slot;
        for (std::size_t k = 0; k < left.size(); ++k) {
            const SlotScan scan = scan_slots(inst, routes, left[k], unplaced, model);
            if (scan.feasible == 0) return std::nullopt;
            const double regret = scan.feasible == 1 ? std::numeric_limits<double>::infinity() : scan.second - scan.best.cost;
            const bool wins = regret > pick_regret || (regret == pick_regret && left[k] < left[pick]);
            if (k == 0 || wins) {
                pick = k;
                pick_regret = regret;
                pick_slot = scan.best;
            }
        }
        Route &r = routes[pick_slot.route];
        r.insert(r.begin() + static_cast<long>(pick_slot.pos), left[pick]);
        left.erase(left.begin() + static_cast<long>(pick));
    }
    return schedule_routes(inst, routes);
}

std::optional<Solution> repair(RepairOp op, const Instance &inst, const Removal &partial, Model model)
{
    return op == RepairOp::Greedy ? repair_greedy(inst, partial, model) : repair_regret(inst, partial, model);
}

}  // namespace synchro
