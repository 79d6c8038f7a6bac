#pragma once

#include <vector>

#include "synchro/instance.hpp"
#include "synchro/schedule.hpp"

namespace synchro {

/// Clarke-Wright savings with vehicle capacity Qs, then 2-opt per route. Routes come out
/// sorted by their smallest node id.
Routes cvrp_routes(const Instance &inst);

struct ChainedRoutes {
    Routes tours;                        // one per sprayer
    std::vector<std::vector<int>> segments;  // per tour: segment sizes in chaining order
    std::vector<char> refill;            // by node id; set at every junction
    int refill_count() const;
};

/// Sprayers take turns claiming the unassigned route whose nearer endpoint is closest to the end
/// of their tour so far; the claimed route is appended starting from that endpoint. When there
/// are fewer routes than sprayers, the longest routes are split in half first.
ChainedRoutes chain_routes(const Instance &inst, const Routes &routes, int numSp);

/// Route-first cluster-second practice plan, scheduled by the engine. Throws InfeasibleInstance
/// if the result violates a constraint (typically the horizon).
Solution run_baseline(const Instance &inst);

/// 100 * (baseline - optimized) / baseline.
double savings_pct(double baseline, double optimized);

}  // namespace synchro
