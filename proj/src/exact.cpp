#include "synchro/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "synchro/construction.hpp"

namespace synchro {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kTol = 1e-9;
constexpr double kEps = 1e-9;

std::size_t idx(int id) { return static_cast<std::size_t>(id); }

class Deadline {
public:
    Deadline() = default;
    explicit Deadline(double seconds)
        : active_(true), at_(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds)))
    {
    }
    bool expired() const { return active_ && Clock::now() >= at_; }

private:
    bool active_ = false;
    Clock::time_point at_{};
};

double route_service(const Instance &inst, const Route &route)
{
    double s = 0.0;
    for (int i : route) s += inst.s(i);
    return s;
}

int min_refills(const Instance &inst, const Route &route)
{
    int count = 0;
    double tank = inst.Qs();
    for (std::size_t p = 0; p < route.size(); ++p) {
        tank -= inst.q(route[p]);
        if (p + 1 < route.size() && tank < inst.q(route[p + 1]) - kEps) {
            ++count;
            tank = inst.Qs();
        }
    }
    return count;
}

// Lower bound on the objective of any schedule over these routes with the given refill counts.
double schedule_bound(const Instance &inst, const Routes &routes, const std::vector<int> &refills, Model model)
{
    double sum = 0.0, worst = 0.0;
    for (std::size_t r = 0; r < routes.size(); ++r) {
        const double len = route_length(inst, routes[r]);
        sum += len;
        worst = std::max(worst, len + route_service(inst, routes[r]) + inst.xi() * refills[r]);
    }
    const int total = std::accumulate(refills.begin(), refills.end(), 0);
    switch (model) {
    case Model::Model1: return sum + inst.xi() * total;
    case Model::Model2: return worst;
    case Model::Model3: return sum;
    }
    return sum;
}

// All tank-feasible refill placements of one route, as lists of route positions. The last
// position never refills since the sprayer heads home afterwards.
std::vector<std::vector<int>> route_placements(const Instance &inst, const Route &route)
{
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    const int m = static_cast<int>(route.size());
    std::function<void(int, double)> walk = [&](int p, double tank) {
        if (tank < inst.q(route[idx(p)]) - kEps) return;
        if (p == m - 1) {
            out.push_back(current);
            return;
        }
        const double left = tank - inst.q(route[idx(p)]);
        walk(p + 1, left);
        current.push_back(p);
        walk(p + 1, inst.Qs());
        current.pop_back();
    };
    if (m > 0) walk(0, inst.Qs());
    return out;
}

// Exhaustive search over placements x tanker orders x trip splits for fixed routes.
class ScheduleSearch {
public:
    ScheduleSearch(const Instance &inst, const Routes &routes, Model model, double bound, Deadline deadline)
        : inst_(inst), routes_(routes), model_(model), bound_(bound), deadline_(deadline), K_(min_trips(inst).K)
    {
        std::vector<int> fewest;
        for (const Route &r : routes_) fewest.push_back(min_refills(inst_, r));
        floor_ = schedule_bound(inst_, routes_, fewest, model_);
        for (const Route &r : routes_) placements_.push_back(route_placements(inst_, r));
        chosen_.assign(routes_.size(), nullptr);
    }

    std::optional<Solution> run()
    {
        if (floor_ > bound_ + kTol) return std::nullopt;
        for (const auto &p : placements_) {
            if (p.empty()) return std::nullopt;
        }
        combine(0);
        return std::move(best_);
    }

private:
    double limit() const { return best_ ? best_objective_ : bound_; }

    bool stop() const { return finished_ || (best_ && best_objective_ <= floor_ + kTol); }

    void combine(std::size_t r)
    {
        if (stop()) return;
        if (r == routes_.size()) {
            place();
            return;
        }
        for (const auto &p : placements_[r]) {
            chosen_[r] = &p;
            combine(r + 1);
            if (stop()) return;
        }
    }

    void place()
    {
        std::vector<int> counts;
        for (const auto *p : chosen_) counts.push_back(static_cast<int>(p->size()));
        if (schedule_bound(inst_, routes_, counts, model_) > limit() + kTol) return;

        std::vector<char> flags(inst_.nodes().size(), 0);
        sequences_.assign(routes_.size(), {});
        for (std::size_t r = 0; r < routes_.size(); ++r) {
            for (int pos : *chosen_[r]) {
                const int node = routes_[r][idx(pos)];
                flags[idx(node)] = 1;
                sequences_[r].push_back(node);
            }
        }
        auto refills = apply_refills(inst_, routes_, flags);
        if (!refills) return;
        refills_ = std::move(*refills);
        order_.clear();
        next_.assign(routes_.size(), 0);
        total_ = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
        interleave();
    }

    void interleave()
    {
        if (stop()) return;
        if (order_.size() == total_) {
            trips_.clear();
            split(0, 0.0);
            return;
        }
        for (std::size_t r = 0; r < routes_.size(); ++r) {
            if (next_[r] == sequences_[r].size()) continue;
            order_.push_back(sequences_[r][next_[r]++]);
            interleave();
            --next_[r];
            order_.pop_back();
            if (stop()) return;
        }
    }

    void split(std::size_t pos, double load)
    {
        if (stop()) return;
        if (pos == order_.size()) {
            leaf();
            return;
        }
        const int node = order_[pos];
        const double v = refills_.quantity[idx(node)];
        if (!trips_.empty() && load + v <= inst_.Qt() + kEps) {
            trips_.back().push_back(node);
            split(pos + 1, load + v);
            trips_.back().pop_back();
        }
        if (static_cast<int>(trips_.size()) < K_ && v <= inst_.Qt() + kEps) {
            trips_.push_back({node});
            split(pos + 1, v);
            trips_.pop_back();
        }
    }

    void leaf()
    {
        if ((++leaves_ & 255U) == 0 && deadline_.expired()) {
            finished_ = true;
            return;
        }
        Solution sol = synchronize(inst_, routes_, refills_, TankerPlan{trips_});
        if (!is_feasible(inst_, sol)) return;
        const double obj = evaluate(inst_, sol, model_);
        const bool take = best_ ? obj < best_objective_ - kTol : obj <= bound_ + kTol;
        if (take) {
            best_objective_ = obj;
            best_ = std::move(sol);
        }
    }

    const Instance &inst_;
    const Routes &routes_;
    Model model_;
    double bound_;
    Deadline deadline_;
    int K_;
    double floor_ = 0.0;
    std::vector<std::vector<std::vector<int>>> placements_;
    std::vector<const std::vector<int> *> chosen_;
    std::vector<std::vector<int>> sequences_;
    std::vector<std::size_t> next_;
    std::vector<int> order_;
    std::vector<std::vector<int>> trips_;
    RefillAssignment refills_;
    std::size_t total_ = 0;
    std::uint64_t leaves_ = 0;
    bool finished_ = false;
    std::optional<Solution> best_;
    double best_objective_ = 0.0;
};

// Number of refill placements of a route by refill count. Refills cut the route into segments
// whose demand fits in one tank.
std::vector<double> placement_counts(const Instance &inst, const Route &route)
{
    const std::size_t m = route.size();
    // ways[p][c]: placements of positions [0, p) ending with a refill at p-1 (or p = 0), c refills so far
    std::vector<std::vector<double>> ways(m + 1, std::vector<double>(m + 1, 0.0));
    ways[0][0] = 1.0;
    std::vector<double> out(m + 1, 0.0);
    for (std::size_t start = 0; start < m; ++start) {
        double demand = 0.0;
        for (std::size_t end = start; end < m; ++end) {
            demand += inst.q(route[end]);
            if (demand > inst.Qs() + kEps) break;
            for (std::size_t c = 0; c <= m; ++c) {
                if (ways[start][c] == 0.0) continue;
                if (end == m - 1) {
                    out[c] += ways[start][c];
                }
                else if (c + 1 <= m) {
                    ways[end + 1][c + 1] += ways[start][c];
                }
            }
        }
    }
    return out;
}

struct SearchState {
    std::vector<char> flags;
    std::vector<std::vector<int>> trips;
};

class LocalSearch {
public:
    LocalSearch(const Instance &inst, const Routes &routes, Model model, Deadline deadline)
        : inst_(inst), routes_(routes), model_(model), deadline_(deadline), K_(min_trips(inst).K)
    {
        route_of_.assign(inst.nodes().size(), -1);
        pos_of_.assign(inst.nodes().size(), -1);
        for (std::size_t r = 0; r < routes_.size(); ++r) {
            for (std::size_t p = 0; p < routes_[r].size(); ++p) {
                route_of_[idx(routes_[r][p])] = static_cast<int>(r);
                pos_of_[idx(routes_[r][p])] = static_cast<int>(p);
            }
        }
    }

    Solution run(Solution incumbent)
    {
        SearchState state;
        state.flags.assign(inst_.nodes().size(), 0);
        for (std::size_t i = 1; i < incumbent.timeline.size(); ++i) state.flags[i] = incumbent.timeline[i].refill ? 1 : 0;
        for (const TankerTrip &trip : incumbent.trips) {
            std::vector<int> stops;
            for (const TankerStop &s : trip.stops) stops.push_back(s.node);
            state.trips.push_back(std::move(stops));
        }
        double current = evaluate(inst_, incumbent, model_);

        while (!deadline_.expired()) {
            std::optional<Solution> step;
            SearchState step_state;
            double step_obj = current;
            for (SearchState &cand : neighbours(state)) {
                if (deadline_.expired()) break;
                auto sol = realize(cand);
                if (!sol) continue;
                const double obj = evaluate(inst_, *sol, model_);
                if (obj < step_obj - kTol) {
                    step_obj = obj;
                    step = std::move(sol);
                    step_state = std::move(cand);
                }
            }
            if (!step) break;
            current = step_obj;
            incumbent = std::move(*step);
            state = std::move(step_state);
        }
        return incumbent;
    }

private:
    bool is_last(int node) const
    {
        const auto &route = routes_[idx(route_of_[idx(node)])];
        return pos_of_[idx(node)] == static_cast<int>(route.size()) - 1;
    }

    std::optional<SearchState> rederive(std::vector<char> flags) const
    {
        auto refills = apply_refills(inst_, routes_, flags);
        if (!refills) return std::nullopt;
        const TankerPlan plan = build_tanker_plan(inst_, order_refill_list(inst_, routes_, *refills), *refills);
        return SearchState{std::move(flags), plan.trips};
    }

    std::vector<SearchState> neighbours(const SearchState &state) const
    {
        std::vector<SearchState> out;
        auto push = [&](std::optional<SearchState> s) {
            if (s) out.push_back(std::move(*s));
        };
        for (int i = 1; i <= inst_.size(); ++i) {
            if (route_of_[idx(i)] < 0 || is_last(i)) continue;
            auto flags = state.flags;
            flags[idx(i)] = flags[idx(i)] ? 0 : 1;
            push(rederive(std::move(flags)));
            if (!state.flags[idx(i)]) continue;
            // Move the refill to the previous or next node of the same route.
            const auto &route = routes_[idx(route_of_[idx(i)])];
            for (int d : {-1, 1}) {
                const int p = pos_of_[idx(i)] + d;
                if (p < 0 || p >= static_cast<int>(route.size()) - 1) continue;
                const int j = route[idx(p)];
                if (state.flags[idx(j)]) continue;
                auto moved = state.flags;
                moved[idx(i)] = 0;
                moved[idx(j)] = 1;
                push(rederive(std::move(moved)));
            }
        }

        // Swap adjacent tanker stops from different routes; trip sizes stay put.
        std::vector<int> order;
        std::vector<std::size_t> sizes;
        for (const auto &trip : state.trips) {
            order.insert(order.end(), trip.begin(), trip.end());
            sizes.push_back(trip.size());
        }
        auto regroup = [](const std::vector<int> &seq, const std::vector<std::size_t> &sz) {
            std::vector<std::vector<int>> trips;
            std::size_t at = 0;
            for (std::size_t s : sz) {
                if (s == 0) continue;
                trips.emplace_back(seq.begin() + static_cast<long>(at), seq.begin() + static_cast<long>(at + s));
                at += s;
            }
            return trips;
        };
        for (std::size_t p = 0; p + 1 < order.size(); ++p) {
            if (route_of_[idx(order[p])] == route_of_[idx(order[p + 1])]) continue;
            auto swapped = order;
            std::swap(swapped[p], swapped[p + 1]);
            out.push_back({state.flags, regroup(swapped, sizes)});
        }

        // Trip boundaries: shift by one stop, split a trip, merge neighbouring trips.
        for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
            for (int d : {-1, 1}) {
                auto sz = sizes;
                if (d < 0 && sz[k] == 0) continue;
                if (d > 0 && sz[k + 1] == 0) continue;
                sz[k] = static_cast<std::size_t>(static_cast<long>(sz[k]) + d);
                sz[k + 1] = static_cast<std::size_t>(static_cast<long>(sz[k + 1]) - d);
                out.push_back({state.flags, regroup(order, sz)});
            }
            auto merged = sizes;
            merged[k] += merged[k + 1];
            merged.erase(merged.begin() + static_cast<long>(k) + 1);
            out.push_back({state.flags, regroup(order, merged)});
        }
        if (static_cast<int>(sizes.size()) < K_) {
            for (std::size_t k = 0; k < sizes.size(); ++k) {
                for (std::size_t cut = 1; cut < sizes[k]; ++cut) {
                    auto sz = sizes;
                    sz[k] = cut;
                    sz.insert(sz.begin() + static_cast<long>(k) + 1, sizes[k] - cut);
                    out.push_back({state.flags, regroup(order, sz)});
                }
            }
        }
        return out;
    }

    std::optional<Solution> realize(const SearchState &state) const
    {
        if (static_cast<int>(state.trips.size()) > K_) return std::nullopt;
        auto refills = apply_refills(inst_, routes_, state.flags);
        if (!refills) return std::nullopt;
        for (const auto &trip : state.trips) {
            double load = 0.0;
            for (int node : trip) load += refills->quantity[idx(node)];
            if (load > inst_.Qt() + kEps) return std::nullopt;
        }
        try {
            Solution sol = synchronize(inst_, routes_, *refills, TankerPlan{state.trips});
            if (!is_feasible(inst_, sol)) return std::nullopt;
            return sol;
        }
        catch (const std::invalid_argument &) {
            return std::nullopt;
        }
    }

    const Instance &inst_;
    const Routes &routes_;
    Model model_;
    Deadline deadline_;
    int K_;
    std::vector<int> route_of_;
    std::vector<int> pos_of_;
};

}  // namespace

std::optional<Solution> best_schedule_for_routes(const Instance &inst, const Routes &routes, Model model, double bound)
{
    return ScheduleSearch(inst, routes, model, bound, Deadline{}).run();
}

double schedule_space_size(const Instance &inst, const Routes &routes)
{
    // Product of per-route count polynomials, each coefficient divided by c! so that the
    // interleavings come out as R! / prod(c_r!).
    std::vector<double> poly{1.0};
    for (const Route &route : routes) {
        const auto counts = placement_counts(inst, route);
        std::vector<double> next(poly.size() + counts.size() - 1, 0.0);
        for (std::size_t a = 0; a < poly.size(); ++a) {
            for (std::size_t c = 0; c < counts.size(); ++c) {
                next[a + c] += poly[a] * counts[c] / std::tgamma(static_cast<double>(c) + 1.0);
            }
        }
        poly = std::move(next);
    }
    double total = 0.0;
    for (std::size_t R = 0; R < poly.size(); ++R) {
        if (poly[R] == 0.0) continue;
        const double splits = R == 0 ? 1.0 : std::ldexp(1.0, static_cast<int>(R) - 1);
        total += poly[R] * std::tgamma(static_cast<double>(R) + 1.0) * splits;
    }
    return total;
}

Solution optimize_fixed_routes(const Instance &inst, const Solution &sol, double budgetSeconds, Model model)
{
    if (budgetSeconds <= 0.0) return sol;
    const Deadline deadline(budgetSeconds);
    const double start = evaluate(inst, sol, model);
    if (schedule_space_size(inst, sol.routes) <= kExhaustiveLimit) {
        auto best = ScheduleSearch(inst, sol.routes, model, start, deadline).run();
        if (best && evaluate(inst, *best, model) < start - kTol) return std::move(*best);
        return sol;
    }
    return LocalSearch(inst, sol.routes, model, deadline).run(sol);
}

Solution brute_force_optimum(const Instance &inst, Model model)
{
    const int n = inst.size();
    const int sp = inst.numSp();
    if (n > 9 || sp > 2 || sp < 1 || n < sp) {
        throw std::invalid_argument("brute_force_optimum: requires numSp <= n <= 9 and numSp <= 2");
    }

    std::optional<Solution> best;
    double best_obj = std::numeric_limits<double>::infinity();
    // A constructed solution gives an early bound; it is only used for pruning.
    try {
        best_obj = evaluate(inst, build_initial(inst, std::uint64_t{1}), model);
    }
    catch (const InfeasibleInstance &) {
    }

    auto consider = [&](const Routes &routes) {
        std::vector<int> fewest;
        for (const Route &r : routes) fewest.push_back(min_refills(inst, r));
        if (schedule_bound(inst, routes, fewest, model) > best_obj + kTol) return;
        auto sol = best_schedule_for_routes(inst, routes, model, best_obj);
        if (!sol) return;
        const double obj = evaluate(inst, *sol, model);
        const bool better = !best || obj < best_obj - kTol;
        const bool tie = best && std::abs(obj - best_obj) <= kTol && routes < best->routes;
        if (better || tie) {
            best_obj = better ? obj : best_obj;
            best = std::move(sol);
        }
    };

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    do {
        if (sp == 1) {
            consider({perm});
            continue;
        }
        // Sprayers are interchangeable, so node 1 always rides in the first route.
        for (int cut = 1; cut < n; ++cut) {
            Route a(perm.begin(), perm.begin() + cut);
            if (std::find(a.begin(), a.end(), 1) == a.end()) continue;
            consider({std::move(a), Route(perm.begin() + cut, perm.end())});
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (!best) throw InfeasibleInstance("no feasible solution exists");
    return std::move(*best);
}

}  // namespace synchro
