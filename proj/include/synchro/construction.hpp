#pragma once

#include <stdexcept>
#include <vector>

#include "synchro/instance.hpp"
#include "synchro/random.hpp"
#include "synchro/schedule.hpp"

namespace synchro {

class InfeasibleInstance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Clustering {
    std::vector<int> assignment;  // node id -> cluster; entry 0 (depot) is -1
    std::vector<Point> centroids;
    std::vector<double> objective_history;  // within-cluster squared distance after each update
    int iterations = 0;
};

/// Lloyd's k-means on spray-node coordinates with farthest-point seeding. No cluster is left empty.
Clustering kmeans(const Instance &inst, int k, Rng &rng, int maxIter = 100);

/// Nearest neighbour from the depot followed by first-improvement 2-opt.
Route tsp_route(const Instance &inst, const std::vector<int> &nodes);

/// First-improvement 2-opt sweeps (depot fixed at both ends) until no move improves.
void two_opt(const Instance &inst, Route &route);
bool is_two_opt_local_optimum(const Instance &inst, const Route &route);

/// Moves nodes out of routes whose estimated duration exceeds tMax; at most 10n moves.
/// Throws InfeasibleInstance when no receiving route exists or the budget runs out.
Routes fix_feasibility(const Instance &inst, Routes routes);

/// Cheapest travel-time insertion position of node into route.
std::size_t cheapest_insertion(const Instance &inst, const Route &route, int node);

Point route_centroid(const Instance &inst, const Route &route);

/// Cluster-first route-second initial solution. Throws InfeasibleInstance.
Solution build_initial(const Instance &inst, Rng &rng);
Solution build_initial(const Instance &inst, std::uint64_t seed);

}  // namespace synchro
