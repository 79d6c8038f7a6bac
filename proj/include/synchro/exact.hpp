#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "synchro/instance.hpp"
#include "synchro/schedule.hpp"

namespace synchro {

/// Global optimum by enumeration of routes, refill placements, tanker orders and trip splits.
/// Guarded to n <= 9 and numSp <= 2 (std::invalid_argument). Among equal objectives the
/// lexicographically smallest route sequence wins. Throws InfeasibleInstance if nothing is feasible.
Solution brute_force_optimum(const Instance &inst, Model model);

/// Best schedule for fixed routes over all refill placements, tanker orders and trip splits.
/// Only schedules with objective <= bound (+1e-9) are considered; nullopt if none qualifies.
std::optional<Solution> best_schedule_for_routes(const Instance &inst, const Routes &routes, Model model,
                                                 double bound = std::numeric_limits<double>::infinity());

/// Upper estimate of the fixed-routes schedule space (placements x orders x trip splits).
double schedule_space_size(const Instance &inst, const Routes &routes);

/// Intensification: keeps the routes and improves refills, tanker order and trip splits.
/// Exhaustive when the space holds at most 1e6 states, best-improvement local search otherwise.
/// Never returns anything worse than sol; budgetSeconds <= 0 returns sol unchanged.
Solution optimize_fixed_routes(const Instance &inst, const Solution &sol, double budgetSeconds, Model model);

inline constexpr double kExhaustiveLimit = 1e6;

}  // namespace synchro
