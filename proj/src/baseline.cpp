#include "synchro/baseline.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "synchro/construction.hpp"

namespace synchro {

int ChainedRoutes::refill_count() const { return static_cast<int>(std::count(refill.begin(), refill.end(), 1)); }

Routes cvrp_routes(const Instance &inst)
{
    const int n = inst.size();
    const double cap = inst.Qs() + 1e-9;

    std::vector<Route> routes;
    std::vector<double> load;
    std::vector<int> owner(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i) {
        owner[static_cast<std::size_t>(i)] = i - 1;
        routes.push_back({i});
        load.push_back(inst.q(i));
    }

    struct Saving {
        double value;
        int i, j;
    };
    std::vector<Saving> savings;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) savings.push_back({inst.t(0, i) + inst.t(0, j) - inst.t(i, j), i, j});
    }
    std::stable_sort(savings.begin(), savings.end(), [](const Saving &a, const Saving &b) { return a.value > b.value; });

    for (const Saving &s : savings) {
        const int ri = owner[static_cast<std::size_t>(s.i)];
        const int rj = owner[static_cast<std::size_t>(s.j)];
        if (ri == rj || load[static_cast<std::size_t>(ri)] + load[static_cast<std::size_t>(rj)] > cap) continue;
        Route &a = routes[static_cast<std::size_t>(ri)];
        Route &b = routes[static_cast<std::size_t>(rj)];
        // Both nodes must sit at a route end; orient so that a ends with i and b starts with j.
        if (a.back() != s.i && a.front() == s.i) std::reverse(a.begin(), a.end());
        if (b.front() != s.j && b.back() == s.j) std::reverse(b.begin(), b.end());
        if (a.back() != s.i || b.front() != s.j) continue;
        a.insert(a.end(), b.begin(), b.end());
        load[static_cast<std::size_t>(ri)] += load[static_cast<std::size_t>(rj)];
        for (int node : b) owner[static_cast<std::size_t>(node)] = ri;
        b.clear();
    }

    Routes out;
    for (Route &r : routes) {
        if (r.empty()) continue;
        two_opt(inst, r);
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const Route &a, const Route &b) {
        return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
    });
    return out;
}

ChainedRoutes chain_routes(const Instance &inst, const Routes &routes, int numSp)
{
    if (numSp < 1) throw std::invalid_argument("numSp must be positive");
    std::size_t total = 0;
    for (const Route &r : routes) total += r.size();
    if (total < static_cast<std::size_t>(numSp)) throw std::invalid_argument("fewer spray nodes than sprayers");

    Routes pool;
    for (const Route &r : routes) {
        if (!r.empty()) pool.push_back(r);
    }
    while (static_cast<int>(pool.size()) < numSp) {
        const auto longest = std::max_element(pool.begin(), pool.end(),
                                              [](const Route &a, const Route &b) { return a.size() < b.size(); });
        const auto half = static_cast<std::ptrdiff_t>(longest->size() / 2);
        Route tail(longest->begin() + half, longest->end());
        longest->erase(longest->begin() + half, longest->end());
        pool.push_back(std::move(tail));
    }

    ChainedRoutes out;
    out.tours.assign(static_cast<std::size_t>(numSp), {});
    out.segments.assign(static_cast<std::size_t>(numSp), {});
    out.refill.assign(static_cast<std::size_t>(inst.size()) + 1, 0);
    std::vector<char> taken(pool.size(), 0);

    for (std::size_t left = pool.size(), turn = 0; left > 0; --left, turn = (turn + 1) % static_cast<std::size_t>(numSp)) {
        Route &tour = out.tours[turn];
        const int from = tour.empty() ? 0 : tour.back();
        std::size_t pick = pool.size();
        bool reversed = false;
        double bestDist = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < pool.size(); ++r) {
            if (taken[r]) continue;
            const double head = inst.t(from, pool[r].front());
            const double tail = inst.t(from, pool[r].back());
            if (head < bestDist) {
                bestDist = head;
                pick = r;
                reversed = false;
            }
            if (tail < bestDist) {
                bestDist = tail;
                pick = r;
                reversed = true;
            }
        }
        taken[pick] = 1;
        Route seg = pool[pick];
        if (reversed) std::reverse(seg.begin(), seg.end());
        if (!tour.empty()) out.refill[static_cast<std::size_t>(tour.back())] = 1;
        tour.insert(tour.end(), seg.begin(), seg.end());
        out.segments[turn].push_back(static_cast<int>(seg.size()));
    }
    return out;
}

Solution run_baseline(const Instance &inst)
{
    const ChainedRoutes chained = chain_routes(inst, cvrp_routes(inst), inst.numSp());
    const auto refills = apply_refills(inst, chained.tours, chained.refill);
    if (!refills) throw InfeasibleInstance("baseline tour runs out of fertilizer between junctions");
    const std::vector<int> rf = order_refill_list(inst, chained.tours, *refills);
    const Solution sol = synchronize(inst, chained.tours, *refills, build_tanker_plan(inst, rf, *refills));
    const auto violations = check_feasible(inst, sol);
    if (!violations.empty()) {
        throw InfeasibleInstance("baseline plan is infeasible: " + violations.front().field + ": " + violations.front().message);
    }
    return sol;
}

double savings_pct(double baseline, double optimized)
{
    if (baseline <= 0.0) return 0.0;
    return 100.0 * (baseline - optimized) / baseline;
}

}  // namespace synchro
