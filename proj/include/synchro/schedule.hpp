#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synchro/instance.hpp"

namespace synchro {

/// Objective variants: travel + waiting + refill time; latest depot return; travel only.
enum class Model { Model1 = 1, Model2 = 2, Model3 = 3 };

/// Ordered spray-node ids of one sprayer; the depot at both ends is implicit.
using Route = std::vector<int>;
using Routes = std::vector<Route>;

/// Per-node refill decisions, indexed by node id (entry 0 is unused).
struct RefillAssignment {
    std::vector<char> refill;      // delta_i
    std::vector<double> quantity;  // v_i
    std::vector<double> level;     // l_i, tank level on arrival

    int count() const;
};

/// Untimed tanker plan: each trip is an ordered list of refill stops.
struct TankerPlan {
    std::vector<std::vector<int>> trips;

    std::size_t stop_count() const;
};

struct NodeRecord {
    int sprayer = -1;
    int position = -1;
    double arrival = 0.0;  // y_i (spraying starts on arrival)
    double wait = 0.0;     // m_i
    bool refill = false;   // delta_i
    double quantity = 0.0; // v_i
    double level = 0.0;    // l_i
};

struct TankerStop {
    int node = 0;
    double arrival = 0.0;      // theta
    double refill_start = 0.0; // w
    double level = 0.0;        // h, tanker level on arrival
};

struct TankerTrip {
    int index = 0;
    double departure = 0.0;
    double return_time = 0.0;
    std::vector<TankerStop> stops;
};

struct ObjectiveParts {
    double routing = 0.0;   // sum of sprayer travel times
    double waiting = 0.0;   // sum of m_i
    double refill = 0.0;    // xi * number of refills
    double makespan = 0.0;  // latest sprayer depot return
};

struct Solution {
    Routes routes;
    std::vector<NodeRecord> timeline;  // indexed by node id
    std::vector<double> route_return;  // depot return time per sprayer
    std::vector<TankerTrip> trips;
    ObjectiveParts objective;

    int refill_count() const;
};

/// Walks each route from a full tank and refills (fill-to-full, after service) wherever the
/// leftover cannot cover the next node. Throws std::domain_error if some q exceeds Qs.
RefillAssignment derive_refills(const Instance &inst, const Routes &routes);

/// Fill-to-full refills at the flagged nodes. nullopt when the tank would run short.
std::optional<RefillAssignment> apply_refills(const Instance &inst, const Routes &routes,
                                              const std::vector<char> &flags);

/// Refill nodes sorted by zero-wait estimated service end; ties by (sprayer, node).
std::vector<int> order_refill_list(const Instance &inst, const Routes &routes, const RefillAssignment &refills);

/// Greedy trip split along RF: a new trip starts whenever the tanker cannot cover the next stop.
TankerPlan build_tanker_plan(const Instance &inst, const std::vector<int> &rf, const RefillAssignment &refills);

struct SyncOptions {
    // Tanker legs take no time (depot refills still take gamma).
    bool instant_tanker = false;
};

/// Single forward pass over the tanker stops producing the full timetable.
/// Throws std::invalid_argument if the plan visits a route's refills out of route order or
/// leaves a refill node unserved.
Solution synchronize(const Instance &inst, const Routes &routes, const RefillAssignment &refills,
                     const TankerPlan &plan, const SyncOptions &options = {});

/// derive_refills -> order_refill_list -> build_tanker_plan -> synchronize.
Solution schedule_routes(const Instance &inst, const Routes &routes);

struct FeasibilityOptions {
    // When false, spray nodes may be missing (partial solutions during repair).
    bool require_complete = true;
};

std::vector<Violation> check_feasible(const Instance &inst, const Solution &sol, const FeasibilityOptions &options = {});
inline bool is_feasible(const Instance &inst, const Solution &sol, const FeasibilityOptions &options = {})
{
    return check_feasible(inst, sol, options).empty();
}

double evaluate(const Instance &inst, const Solution &sol, Model model);
double objective_value(const ObjectiveParts &parts, Model model);

/// Standalone route duration with zero waits: travel + service + xi per refill.
double estimated_route_duration(const Instance &inst, const Route &route);

/// Route travel time including both depot legs.
double route_length(const Instance &inst, const Route &route);

std::string model_name(Model model);
Model parse_model(int value);

std::string solution_to_json(const Solution &sol);

}  // namespace synchro
