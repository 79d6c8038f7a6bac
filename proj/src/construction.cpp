#include "synchro/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace synchro {

namespace {

constexpr double kImprove = 1e-10;

double sq_dist(Point a, Point b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

Point coords(const Instance &inst, int id) { return {inst.node(id).x, inst.node(id).y}; }

double clustering_cost(const Instance &inst, const std::vector<int> &assignment, const std::vector<Point> &centroids)
{
    double cost = 0.0;
    for (int i = 1; i <= inst.size(); ++i) {
        cost += sq_dist(coords(inst, i), centroids[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])]);
    }
    return cost;
}

std::vector<Point> update_centroids(const Instance &inst, const std::vector<int> &assignment, int k)
{
    std::vector<Point> sums(static_cast<std::size_t>(k));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 1; i <= inst.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)]);
        sums[c].x += inst.node(i).x;
        sums[c].y += inst.node(i).y;
        ++counts[c];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (counts[c] > 0) {
            sums[c].x /= counts[c];
            sums[c].y /= counts[c];
        }
    }
    return sums;
}

// Gives every empty cluster the point farthest from its own centroid, taken from a cluster with
// more than one member.
void repair_empty_clusters(const Instance &inst, std::vector<int> &assignment, std::vector<Point> &centroids, int k)
{
    for (int c = 0; c < k; ++c) {
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 1; i <= inst.size(); ++i) ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        int steal = -1;
        double worst = -1.0;
        for (int i = 1; i <= inst.size(); ++i) {
            const int owner = assignment[static_cast<std::size_t>(i)];
            if (counts[static_cast<std::size_t>(owner)] < 2) continue;
            const double d = sq_dist(coords(inst, i), centroids[static_cast<std::size_t>(owner)]);
            if (d > worst) {
                worst = d;
                steal = i;
            }
        }
        assignment[static_cast<std::size_t>(steal)] = c;
        centroids = update_centroids(inst, assignment, k);
    }
}

}  // namespace

Clustering kmeans(const Instance &inst, int k, Rng &rng, int maxIter)
{
    const int n = inst.size();
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must be in [1, number of spray nodes]");

    // Farthest-point seeding from a random first node.
    std::vector<int> seeds{uniform_int(rng, 1, n)};
    std::vector<double> nearest(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
    while (static_cast<int>(seeds.size()) < k) {
        const Point last = coords(inst, seeds.back());
        int pick = -1;
        double best = -1.0;
        for (int i = 1; i <= n; ++i) {
            auto &d = nearest[static_cast<std::size_t>(i)];
            d = std::min(d, sq_dist(coords(inst, i), last));
            if (std::find(seeds.begin(), seeds.end(), i) != seeds.end()) continue;
            if (d > best) {
                best = d;
                pick = i;
            }
        }
        seeds.push_back(pick);
    }

    Clustering out;
    for (int s : seeds) out.centroids.push_back(coords(inst, s));
    out.assignment.assign(static_cast<std::size_t>(n) + 1, -1);
    // Seeds own their cluster from the start so that coincident points cannot leave one empty.
    for (int c = 0; c < k; ++c) out.assignment[static_cast<std::size_t>(seeds[static_cast<std::size_t>(c)])] = c;

    for (int iter = 0; iter < maxIter; ++iter) {
        bool changed = false;
        for (int i = 1; i <= n; ++i) {
            const Point p = coords(inst, i);
            const int current = out.assignment[static_cast<std::size_t>(i)];
            int best = current < 0 ? 0 : current;
            double best_d = sq_dist(p, out.centroids[static_cast<std::size_t>(best)]);
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(p, out.centroids[static_cast<std::size_t>(c)]);
                if (d < best_d || (d == best_d && c < best)) {
                    best_d = d;
                    best = c;
                }
            }
            if (best != current) {
                out.assignment[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        out.centroids = update_centroids(inst, out.assignment, k);
        repair_empty_clusters(inst, out.assignment, out.centroids, k);
        out.objective_history.push_back(clustering_cost(inst, out.assignment, out.centroids));
        out.iterations = iter + 1;
    }
    return out;
}

void two_opt(const Instance &inst, Route &route)
{
    const std::size_t m = route.size();
    if (m < 2) return;
    auto at = [&](std::size_t pos) { return pos == 0 || pos == m + 1 ? 0 : route[pos - 1]; };
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 1; i < m; ++i) {
            for (std::size_t j = i + 1; j <= m; ++j) {
                const int a = at(i - 1), b = at(i), c = at(j), d = at(j + 1);
                const double delta = inst.t(a, c) + inst.t(b, d) - inst.t(a, b) - inst.t(c, d);
                if (delta < -kImprove) {
                    std::reverse(route.begin() + static_cast<long>(i) - 1, route.begin() + static_cast<long>(j));
                    improved = true;
                }
            }
        }
    }
}

bool is_two_opt_local_optimum(const Instance &inst, const Route &route)
{
    const std::size_t m = route.size();
    auto at = [&](std::size_t pos) { return pos == 0 || pos == m + 1 ? 0 : route[pos - 1]; };
    for (std::size_t i = 1; i < m; ++i) {
        for (std::size_t j = i + 1; j <= m; ++j) {
            const int a = at(i - 1), b = at(i), c = at(j), d = at(j + 1);
            if (inst.t(a, c) + inst.t(b, d) - inst.t(a, b) - inst.t(c, d) < -kImprove) return false;
        }
    }
    return true;
}

Route tsp_route(const Instance &inst, const std::vector<int> &nodes)
{
    if (nodes.empty()) throw std::invalid_argument("tsp_route: empty node set");
    std::vector<int> left = nodes;
    Route route;
    route.reserve(nodes.size());
    int at = 0;
    while (!left.empty()) {
        std::size_t pick = 0;
        for (std::size_t k = 1; k < left.size(); ++k) {
            const double dk = inst.t(at, left[k]);
            const double dp = inst.t(at, left[pick]);
            if (dk < dp || (dk == dp && left[k] < left[pick])) pick = k;
        }
        at = left[pick];
        route.push_back(at);
        left.erase(left.begin() + static_cast<long>(pick));
    }
    two_opt(inst, route);
    return route;
}

std::size_t cheapest_insertion(const Instance &inst, const Route &route, int node)
{
    std::size_t best_pos = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t pos = 0; pos <= route.size(); ++pos) {
        const int a = pos == 0 ? 0 : route[pos - 1];
        const int b = pos == route.size() ? 0 : route[pos];
        const double delta = inst.t(a, node) + inst.t(node, b) - inst.t(a, b);
        if (delta < best) {
            best = delta;
            best_pos = pos;
        }
    }
    return best_pos;
}

Point route_centroid(const Instance &inst, const Route &route)
{
    if (route.empty()) return coords(inst, 0);
    Point c;
    for (int i : route) {
        c.x += inst.node(i).x;
        c.y += inst.node(i).y;
    }
    c.x /= static_cast<double>(route.size());
    c.y /= static_cast<double>(route.size());
    return c;
}

Routes fix_feasibility(const Instance &inst, Routes routes)
{
    const int budget = 10 * inst.size();
    for (int moves = 0;; ++moves) {
        std::size_t busiest = 0;
        double longest = -1.0;
        for (std::size_t r = 0; r < routes.size(); ++r) {
            const double d = estimated_route_duration(inst, routes[r]);
            if (d > longest) {
                longest = d;
                busiest = r;
            }
        }
        if (longest <= inst.tMax()) return routes;
        if (routes.size() < 2) throw InfeasibleInstance("single sprayer route exceeds tMax and no other route can take nodes");
        if (routes[busiest].size() < 2) throw InfeasibleInstance("a single-node route exceeds tMax");
        if (moves >= budget) throw InfeasibleInstance("feasibility fix exhausted its budget of " + std::to_string(budget) + " moves");

        // Node of the busiest route closest to another route's centroid.
        int move_node = -1;
        std::size_t target = 0;
        double closest = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < routes.size(); ++r) {
            if (r == busiest) continue;
            const Point c = route_centroid(inst, routes[r]);
            for (int i : routes[busiest]) {
                const double d = sq_dist(coords(inst, i), c);
                if (d < closest || (d == closest && i < move_node)) {
                    closest = d;
                    move_node = i;
                    target = r;
                }
            }
        }
        Route &from = routes[busiest];
        from.erase(std::find(from.begin(), from.end(), move_node));
        Route &to = routes[target];
        to.insert(to.begin() + static_cast<long>(cheapest_insertion(inst, to, move_node)), move_node);
        two_opt(inst, from);
        two_opt(inst, to);
    }
}

Solution build_initial(const Instance &inst, Rng &rng)
{
    const Clustering clusters = kmeans(inst, inst.numSp(), rng);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(inst.numSp()));
    for (int i = 1; i <= inst.size(); ++i) members[static_cast<std::size_t>(clusters.assignment[static_cast<std::size_t>(i)])].push_back(i);

    Routes routes;
    for (const auto &m : members) routes.push_back(tsp_route(inst, m));
    routes = fix_feasibility(inst, std::move(routes));

    Solution sol = schedule_routes(inst, routes);
    const auto violations = check_feasible(inst, sol);
    if (!violations.empty()) throw InfeasibleInstance("initial solution infeasible: " + violations.front().message);
    return sol;
}

Solution build_initial(const Instance &inst, std::uint64_t seed)
{
    Rng rng(seed);
    return build_initial(inst, rng);
}

}  // namespace synchro
