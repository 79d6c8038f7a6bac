#include "synchro/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace synchro {

namespace {

constexpr double kEps = 1e-9;

std::size_t idx(int id) { return static_cast<std::size_t>(id); }

}  // namespace

int RefillAssignment::count() const
{
    return static_cast<int>(std::count(refill.begin(), refill.end(), char{1}));
}

std::size_t TankerPlan::stop_count() const
{
    std::size_t n = 0;
    for (const auto &trip : trips) n += trip.size();
    return n;
}

int Solution::refill_count() const
{
    int n = 0;
    for (std::size_t i = 1; i < timeline.size(); ++i) n += timeline[i].refill ? 1 : 0;
    return n;
}

RefillAssignment derive_refills(const Instance &inst, const Routes &routes)
{
    const std::size_t count = inst.nodes().size();
    RefillAssignment out{std::vector<char>(count, 0), std::vector<double>(count, 0.0), std::vector<double>(count, 0.0)};
    const double Qs = inst.Qs();
    for (const Route &route : routes) {
        double tank = Qs;
        for (std::size_t k = 0; k < route.size(); ++k) {
            const int i = route[k];
            if (inst.q(i) > Qs) throw std::domain_error("demand of node " + std::to_string(i) + " exceeds sprayer capacity");
            out.level[idx(i)] = tank;
            const double left = tank - inst.q(i);
            if (k + 1 < route.size() && left < inst.q(route[k + 1])) {
                out.refill[idx(i)] = 1;
                out.quantity[idx(i)] = Qs - left;
                tank = Qs;
            }
            else {
                tank = left;
            }
        }
    }
    return out;
}

std::optional<RefillAssignment> apply_refills(const Instance &inst, const Routes &routes, const std::vector<char> &flags)
{
    const std::size_t count = inst.nodes().size();
    RefillAssignment out{std::vector<char>(count, 0), std::vector<double>(count, 0.0), std::vector<double>(count, 0.0)};
    const double Qs = inst.Qs();
    for (const Route &route : routes) {
        double tank = Qs;
        for (int i : route) {
            out.level[idx(i)] = tank;
            const double left = tank - inst.q(i);
            if (left < -kEps) return std::nullopt;
            if (flags[idx(i)]) {
                out.refill[idx(i)] = 1;
                out.quantity[idx(i)] = Qs - left;
                tank = Qs;
            }
            else {
                tank = left;
            }
        }
    }
    return out;
}

std::vector<int> order_refill_list(const Instance &inst, const Routes &routes, const RefillAssignment &refills)
{
    struct Entry {
        double end;
        int sprayer;
        int node;
    };
    std::vector<Entry> entries;
    for (std::size_t r = 0; r < routes.size(); ++r) {
        double clock = 0.0;
        int prev = 0;
        for (int i : routes[r]) {
            clock += inst.t(prev, i);
            const double end = clock + inst.s(i);
            if (refills.refill[idx(i)]) {
                entries.push_back({end, static_cast<int>(r), i});
                clock = end + inst.xi();
            }
            else {
                clock = end;
            }
            prev = i;
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
        return std::tie(a.end, a.sprayer, a.node) < std::tie(b.end, b.sprayer, b.node);
    });
    std::vector<int> rf;
    rf.reserve(entries.size());
    for (const Entry &e : entries) rf.push_back(e.node);
    return rf;
}

TankerPlan build_tanker_plan(const Instance &inst, const std::vector<int> &rf, const RefillAssignment &refills)
{
    TankerPlan plan;
    double level = 0.0;
    for (int i : rf) {
        const double v = refills.quantity[idx(i)];
        if (plan.trips.empty() || level < v) {
            plan.trips.emplace_back();
            level = inst.Qt();
        }
        plan.trips.back().push_back(i);
        level -= v;
    }
    return plan;
}

Solution synchronize(const Instance &inst, const Routes &routes, const RefillAssignment &refills, const TankerPlan &plan,
                     const SyncOptions &options)
{
    auto tanker_leg = [&](int a, int b) { return options.instant_tanker ? 0.0 : inst.t(a, b); };
    const std::size_t count = inst.nodes().size();
    const double xi = inst.xi();

    Solution sol;
    sol.routes = routes;
    sol.timeline.assign(count, NodeRecord{});
    sol.route_return.assign(routes.size(), 0.0);

    for (std::size_t r = 0; r < routes.size(); ++r) {
        for (std::size_t k = 0; k < routes[r].size(); ++k) {
            NodeRecord &rec = sol.timeline[idx(routes[r][k])];
            rec.sprayer = static_cast<int>(r);
            rec.position = static_cast<int>(k);
            rec.refill = refills.refill[idx(routes[r][k])] != 0;
            rec.quantity = refills.quantity[idx(routes[r][k])];
            rec.level = refills.level[idx(routes[r][k])];
        }
    }

    // Per-route cursor: next position to time and the departure time from the previous node.
    std::vector<std::size_t> cursor(routes.size(), 0);
    std::vector<double> clock(routes.size(), 0.0);
    std::vector<int> prev(routes.size(), 0);

    // Times route r up to and including position target; returns the service end there.
    auto advance_to = [&](std::size_t r, std::size_t target) {
        const Route &route = routes[r];
        for (std::size_t k = cursor[r]; k <= target; ++k) {
            const int i = route[k];
            NodeRecord &rec = sol.timeline[idx(i)];
            rec.arrival = clock[r] + inst.t(prev[r], i);
            if (k < target) {
                if (rec.refill) {
                    throw std::invalid_argument("tanker plan serves node " + std::to_string(route[target]) +
                                                " before the earlier refill at node " + std::to_string(i));
                }
                clock[r] = rec.arrival + inst.s(i);
                prev[r] = i;
            }
        }
        cursor[r] = target;
        return sol.timeline[idx(route[target])].arrival + inst.s(route[target]);
    };

    double tanker_free = 0.0;  // departure from the depot (first trip) or from the last stop
    int tanker_at = 0;
    sol.trips.reserve(plan.trips.size());
    for (std::size_t k = 0; k < plan.trips.size(); ++k) {
        TankerTrip trip;
        trip.index = static_cast<int>(k);
        if (k > 0) {
            const TankerTrip &last = sol.trips.back();
            trip.departure = last.return_time + inst.gamma();
        }
        tanker_free = trip.departure;
        tanker_at = 0;
        double level = inst.Qt();
        for (int i : plan.trips[k]) {
            NodeRecord &rec = sol.timeline[idx(i)];
            if (rec.sprayer < 0 || !rec.refill) {
                throw std::invalid_argument("tanker plan visits node " + std::to_string(i) + " which is not a refill node");
            }
            const std::size_t r = static_cast<std::size_t>(rec.sprayer);
            const std::size_t pos = static_cast<std::size_t>(rec.position);
            if (pos < cursor[r]) throw std::invalid_argument("tanker plan visits node " + std::to_string(i) + " twice or out of order");
            const double service_end = advance_to(r, pos);

            TankerStop stop;
            stop.node = i;
            stop.arrival = tanker_free + tanker_leg(tanker_at, i);
            stop.refill_start = std::max(stop.arrival, service_end);
            stop.level = level;
            rec.wait = std::max(0.0, stop.arrival - service_end);

            const double depart = stop.refill_start + xi;
            clock[r] = depart;
            prev[r] = i;
            cursor[r] = pos + 1;

            tanker_free = depart;
            tanker_at = i;
            level -= rec.quantity;
            trip.stops.push_back(stop);
        }
        trip.return_time = tanker_free + tanker_leg(tanker_at, 0);
        sol.trips.push_back(std::move(trip));
    }

    for (std::size_t r = 0; r < routes.size(); ++r) {
        const Route &route = routes[r];
        if (route.empty()) continue;
        if (cursor[r] < route.size()) {
            const std::size_t last = route.size() - 1;
            // Any refill still ahead of the cursor was never served.
            for (std::size_t k = cursor[r]; k < last; ++k) {
                if (sol.timeline[idx(route[k])].refill) {
                    throw std::invalid_argument("refill node " + std::to_string(route[k]) + " is not served by the tanker");
                }
            }
            if (sol.timeline[idx(route[last])].refill) {
                throw std::invalid_argument("refill node " + std::to_string(route[last]) + " is not served by the tanker");
            }
            const double end = advance_to(r, last);
            clock[r] = end;
            prev[r] = route[last];
        }
        sol.route_return[r] = clock[r] + inst.t(prev[r], 0);
    }

    ObjectiveParts &obj = sol.objective;
    for (const Route &route : routes) obj.routing += route_length(inst, route);
    int refills_done = 0;
    for (std::size_t i = 1; i < count; ++i) {
        obj.waiting += sol.timeline[i].wait;
        refills_done += sol.timeline[i].refill ? 1 : 0;
    }
    obj.refill = xi * refills_done;
    for (double ret : sol.route_return) obj.makespan = std::max(obj.makespan, ret);
    return sol;
}

Solution schedule_routes(const Instance &inst, const Routes &routes)
{
    const RefillAssignment refills = derive_refills(inst, routes);
    const std::vector<int> rf = order_refill_list(inst, routes, refills);
    const TankerPlan plan = build_tanker_plan(inst, rf, refills);
    return synchronize(inst, routes, refills, plan);
}

std::vector<Violation> check_feasible(const Instance &inst, const Solution &sol, const FeasibilityOptions &options)
{
    std::vector<Violation> out;
    const int n = inst.size();
    const double Qs = inst.Qs();
    const double tMax = inst.tMax();

    std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        for (int i : sol.routes[r]) {
            if (i < 1 || i > n) {
                out.push_back({"routes", "route " + std::to_string(r) + " contains invalid node " + std::to_string(i)});
                continue;
            }
            if (++seen[idx(i)] == 2) out.push_back({"routes", "node " + std::to_string(i) + " visited more than once"});
        }
    }
    if (options.require_complete) {
        if (static_cast<int>(sol.routes.size()) != inst.numSp()) {
            out.push_back({"routes", "expected one route per sprayer"});
        }
        for (int i = 1; i <= n; ++i) {
            if (seen[idx(i)] == 0) out.push_back({"routes", "node " + std::to_string(i) + " not visited"});
        }
        for (std::size_t r = 0; r < sol.routes.size(); ++r) {
            if (sol.routes[r].empty()) out.push_back({"routes", "route " + std::to_string(r) + " is empty"});
        }
    }

    for (std::size_t r = 0; r < sol.route_return.size(); ++r) {
        if (sol.route_return[r] > tMax + kEps) {
            out.push_back({"tMax", "sprayer exceeds tMax: sprayer " + std::to_string(r) + " returns at " +
                                       std::to_string(sol.route_return[r])});
        }
    }

    const int K = min_trips(inst).K;
    if (static_cast<int>(sol.trips.size()) > K) {
        out.push_back({"trips", "trip budget exceeded: " + std::to_string(sol.trips.size()) + " trips > K = " + std::to_string(K)});
    }
    for (const TankerTrip &trip : sol.trips) {
        if (trip.return_time > tMax + kEps) {
            out.push_back({"tMax", "tanker exceeds tMax on trip " + std::to_string(trip.index)});
        }
        for (const TankerStop &stop : trip.stops) {
            const double v = sol.timeline[idx(stop.node)].quantity;
            if (stop.level + kEps < v) out.push_back({"trips", "tanker cannot cover refill at node " + std::to_string(stop.node)});
            if (stop.level > inst.Qt() + kEps) out.push_back({"trips", "tanker level exceeds Qt"});
        }
    }

    for (const Route &route : sol.routes) {
        for (int i : route) {
            if (i < 1 || i > n) continue;
            const NodeRecord &rec = sol.timeline[idx(i)];
            if (rec.wait < -kEps) out.push_back({"timeline", "negative wait at node " + std::to_string(i)});
            if (rec.level > Qs + kEps || rec.level < -kEps) out.push_back({"timeline", "tank level out of range at node " + std::to_string(i)});
            if (rec.level - inst.q(i) < -kEps) out.push_back({"timeline", "tank runs short at node " + std::to_string(i)});
            if (rec.quantity > Qs + kEps) out.push_back({"timeline", "refill exceeds Qs at node " + std::to_string(i)});
            if ((rec.quantity > 0.0) != rec.refill) out.push_back({"timeline", "refill flag inconsistent at node " + std::to_string(i)});
        }
    }
    return out;
}

double objective_value(const ObjectiveParts &parts, Model model)
{
    switch (model) {
    case Model::Model1: return parts.routing + parts.waiting + parts.refill;
    case Model::Model2: return parts.makespan;
    case Model::Model3: return parts.routing;
    }
    throw std::invalid_argument("unknown model");
}

double evaluate(const Instance &inst, const Solution &sol, Model model)
{
    (void)inst;
    return objective_value(sol.objective, model);
}

double route_length(const Instance &inst, const Route &route)
{
    if (route.empty()) return 0.0;
    double len = inst.t(0, route.front());
    for (std::size_t k = 1; k < route.size(); ++k) len += inst.t(route[k - 1], route[k]);
    return len + inst.t(route.back(), 0);
}

double estimated_route_duration(const Instance &inst, const Route &route)
{
    if (route.empty()) return 0.0;
    double duration = route_length(inst, route);
    double tank = inst.Qs();
    for (std::size_t k = 0; k < route.size(); ++k) {
        const int i = route[k];
        duration += inst.s(i);
        const double left = tank - inst.q(i);
        if (k + 1 < route.size() && left < inst.q(route[k + 1])) {
            duration += inst.xi();
            tank = inst.Qs();
        }
        else {
            tank = left;
        }
    }
    return duration;
}

std::string model_name(Model model)
{
    return "Model" + std::to_string(static_cast<int>(model));
}

Model parse_model(int value)
{
    if (value < 1 || value > 3) throw std::invalid_argument("model must be 1, 2 or 3");
    return static_cast<Model>(value);
}

std::string solution_to_json(const Solution &sol)
{
    using nlohmann::json;
    json doc;
    doc["routes"] = sol.routes;
    json timeline = json::array();
    for (const Route &route : sol.routes) {
        for (int i : route) {
            const NodeRecord &rec = sol.timeline[idx(i)];
            timeline.push_back({{"node", i},
                                {"sprayer", rec.sprayer},
                                {"y", rec.arrival},
                                {"m", rec.wait},
                                {"v", rec.quantity},
                                {"delta", rec.refill ? 1 : 0},
                                {"l", rec.level}});
        }
    }
    doc["timeline"] = std::move(timeline);
    json trips = json::array();
    for (const TankerTrip &trip : sol.trips) {
        json stops = json::array();
        for (const TankerStop &stop : trip.stops) {
            stops.push_back({{"node", stop.node}, {"theta", stop.arrival}, {"w", stop.refill_start}, {"h", stop.level}});
        }
        trips.push_back({{"k", trip.index + 1}, {"departure", trip.departure}, {"return", trip.return_time}, {"stops", std::move(stops)}});
    }
    doc["trips"] = std::move(trips);
    doc["objective"] = {{"routing", sol.objective.routing},
                        {"waiting", sol.objective.waiting},
                        {"refill", sol.objective.refill},
                        {"makespan", sol.objective.makespan}};
    return doc.dump(2);
}

}  // namespace synchro
