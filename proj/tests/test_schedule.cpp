#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle_sim.hpp"
#include "synchro/schedule.hpp"

using namespace synchro;

namespace {

// Independent reference values for F1, from the test-only simulation.
oracle_sim::SingleSprayerResult f1_reference()
{
    const Instance inst = fixtures::f1();
    std::vector<oracle_sim::Point> pts;
    std::vector<double> q, s;
    for (const Node &n : inst.nodes()) {
        pts.push_back({n.x, n.y});
        q.push_back(n.q);
        s.push_back(n.s);
    }
    return oracle_sim::simulate_single(pts, {1, 2, 3, 4, 5, 6}, q, s, 5.0, 100.0, 0.5, 1.0, 1.0);
}

// Two sprayers whose refills end 3.0 and 3.1 at nodes two miles apart.
Instance two_sprayer_wait_instance()
{
    InstanceParams p;
    p.numSp = 2;
    p.Qs = 3.0;
    p.Qt = 100.0;
    p.xi = 0.5;
    p.gamma = 1.0;
    p.tMax = 100.0;
    const double sB = 3.1 - std::sqrt(5.0);
    return fixtures::make_instance({{1, 0, 2, 2.0}, {2, 0, 2, 1.0}, {1, 2, 2, sB}, {2, 2, 2, 1.0}}, p);
}

bool has_violation(const std::vector<Violation> &vs, const std::string &needle)
{
    for (const auto &v : vs) {
        if (v.message.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("reference simulation reproduces the hand-derived F1 values")
{
    const auto ref = f1_reference();
    CHECK(ref.refill_nodes == std::vector<int>{2, 4});
    CHECK(ref.refill_quantity == std::vector<double>{4.0, 4.0});
    CHECK(ref.routing == doctest::Approx(6.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(ref.waiting == 0.0);
    CHECK(ref.depot_return == doctest::Approx(13.0 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("derive_refills")
{
    SUBCASE("F1")
    {
        const Instance inst = fixtures::f1();
        const RefillAssignment r = derive_refills(inst, fixtures::f1_routes());
        for (int i = 1; i <= 6; ++i) CHECK(static_cast<bool>(r.refill[i]) == (i == 2 || i == 4));
        CHECK(r.quantity[2] == 4.0);
        CHECK(r.quantity[4] == 4.0);
        CHECK(r.level[1] == 5.0);
        CHECK(r.level[3] == 5.0);
        CHECK(r.level[6] == 3.0);
        CHECK(r.count() == 2);
    }
    SUBCASE("large tank never refills")
    {
        InstanceParams p = fixtures::f1().params();
        p.Qs = 12.0;
        p.Qt = 100.0;
        const Instance inst(fixtures::f1().nodes(), p);
        CHECK(derive_refills(inst, fixtures::f1_routes()).count() == 0);
    }
    SUBCASE("five nodes in a line with Qs=8")
    {
        InstanceParams p;
        p.Qs = 8.0;
        const Instance inst = fixtures::make_instance({{1, 0, 2, 1}, {2, 0, 2, 1}, {3, 0, 2, 1}, {4, 0, 2, 1}, {5, 0, 2, 1}}, p);
        const RefillAssignment r = derive_refills(inst, {{1, 2, 3, 4, 5}});
        CHECK(r.count() == 1);
        CHECK(r.refill[4] == 1);
        CHECK(r.quantity[4] == 8.0);
    }
    SUBCASE("demand above capacity is an error")
    {
        auto nodes = fixtures::f1().nodes();
        nodes[1].q = 9.0;
        CHECK_THROWS_AS(derive_refills(Instance(nodes, fixtures::f1().params()), fixtures::f1_routes()), std::domain_error);
    }
}

TEST_CASE("order_refill_list")
{
    const Instance f1 = fixtures::f1();
    const auto routes = fixtures::f1_routes();
    CHECK(order_refill_list(f1, routes, derive_refills(f1, routes)) == std::vector<int>{2, 4});

    InstanceParams p = f1.params();
    p.Qs = 20.0;
    const Instance roomy(f1.nodes(), p);
    CHECK(order_refill_list(roomy, routes, derive_refills(roomy, routes)).empty());

    const Instance two = two_sprayer_wait_instance();
    const Routes two_routes{{3, 4}, {1, 2}};
    CHECK(order_refill_list(two, two_routes, derive_refills(two, two_routes)) == std::vector<int>{1, 3});
}

TEST_CASE("build_tanker_plan")
{
    const Instance f1 = fixtures::f1();
    const auto routes = fixtures::f1_routes();
    const auto refills = derive_refills(f1, routes);
    CHECK(build_tanker_plan(f1, {2, 4}, refills).trips.size() == 1);
    CHECK(build_tanker_plan(f1, {}, refills).trips.empty());

    InstanceParams p = f1.params();
    p.Qt = 6.0;
    const Instance small_tanker(f1.nodes(), p);
    const TankerPlan plan = build_tanker_plan(small_tanker, {2, 4}, refills);
    REQUIRE(plan.trips.size() == 2);
    CHECK(plan.trips[0] == std::vector<int>{2});
    CHECK(plan.trips[1] == std::vector<int>{4});
}

TEST_CASE("synchronize F1 against the reference simulation")
{
    const Instance inst = fixtures::f1();
    const auto ref = f1_reference();
    const Solution sol = schedule_routes(inst, fixtures::f1_routes());
    CHECK(std::abs(sol.objective.routing - ref.routing) < 1e-9);
    CHECK(std::abs(sol.objective.routing - (6.0 + std::sqrt(2.0))) < 1e-9);
    CHECK(sol.objective.waiting == 0.0);
    CHECK(std::abs(sol.objective.refill - ref.refill_time) < 1e-9);
    CHECK(std::abs(sol.objective.makespan - ref.depot_return) < 1e-9);
    CHECK(std::abs(evaluate(inst, sol, Model::Model1) - (7.0 + std::sqrt(2.0))) < 1e-9);
    CHECK(std::abs(evaluate(inst, sol, Model::Model3) - (6.0 + std::sqrt(2.0))) < 1e-9);
    CHECK(std::abs(evaluate(inst, sol, Model::Model2) - (13.0 + std::sqrt(2.0))) < 1e-9);
    REQUIRE(sol.trips.size() == 1);
    CHECK(std::abs(sol.trips[0].return_time - ref.tanker_return) < 1e-9);
    CHECK(sol.trips[0].stops[0].arrival == doctest::Approx(2.0));
    CHECK(sol.trips[0].stops[0].refill_start == doctest::Approx(4.0));
    CHECK(sol.trips[0].stops[1].arrival == doctest::Approx(4.5 + std::sqrt(2.0)));
    CHECK(sol.trips[0].stops[1].level == doctest::Approx(96.0));
    CHECK(sol.timeline[3].arrival == doctest::Approx(5.5));
}

TEST_CASE("synchronize charges the late tanker to the second sprayer")
{
    const Instance inst = two_sprayer_wait_instance();
    const Solution sol = schedule_routes(inst, {{1, 2}, {3, 4}});
    CHECK(sol.timeline[1].wait == 0.0);
    CHECK(sol.timeline[3].wait == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(sol.objective.waiting == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(sol.trips[0].stops[1].arrival == doctest::Approx(5.5).epsilon(1e-12));
    // Sprayer 2 resumes after the wait and the refill.
    CHECK(sol.timeline[4].arrival == doctest::Approx(3.1 + 2.4 + 0.5 + 1.0).epsilon(1e-12));
}

TEST_CASE("synchronize without refills")
{
    const Instance inst = generate_instance(12, 2, 5);
    const Routes routes{{1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12}};
    const Solution sol = schedule_routes(inst, routes);
    CHECK(sol.trips.empty());
    CHECK(sol.objective.waiting == 0.0);
    double expected = 0.0;
    for (const Route &r : routes) {
        double d = route_length(inst, r);
        for (int i : r) d += inst.s(i);
        expected = std::max(expected, d);
    }
    CHECK(sol.objective.makespan == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("synchronize rejects inconsistent plans")
{
    const Instance inst = fixtures::f1();
    const auto routes = fixtures::f1_routes();
    const auto refills = derive_refills(inst, routes);
    CHECK_THROWS_AS(synchronize(inst, routes, refills, TankerPlan{{{4, 2}}}), std::invalid_argument);
    CHECK_THROWS_AS(synchronize(inst, routes, refills, TankerPlan{{{2}}}), std::invalid_argument);
    CHECK_THROWS_AS(synchronize(inst, routes, refills, TankerPlan{{{2, 3, 4}}}), std::invalid_argument);
}

TEST_CASE("check_feasible")
{
    CHECK(check_feasible(fixtures::f1(100.0), schedule_routes(fixtures::f1(100.0), fixtures::f1_routes())).empty());

    const Instance tight = fixtures::f1(10.0);
    CHECK(has_violation(check_feasible(tight, schedule_routes(tight, fixtures::f1_routes())), "sprayer exceeds tMax"));

    // Qt just above Qs with 3 refills of 4 units each: three trips against K = 2*ceil(12/5.5) = 6 is fine,
    // so shrink demand accounting by using a tanker that needs a trip per stop on a larger route.
    InstanceParams p = fixtures::f1().params();
    p.Qs = 2.0;
    p.Qt = 2.5;
    const Instance one_per_trip(fixtures::f1().nodes(), p);
    const Solution sol = schedule_routes(one_per_trip, fixtures::f1_routes());
    CHECK(sol.trips.size() == 5);
    CHECK(min_trips(one_per_trip).K == 10);
    CHECK(check_feasible(one_per_trip, sol).empty());

    Solution over = sol;
    over.trips.resize(11, over.trips.back());
    CHECK(has_violation(check_feasible(one_per_trip, over), "trip budget"));

    Solution missing = schedule_routes(fixtures::f1(), {{1, 2, 3, 4, 5}});
    CHECK(has_violation(check_feasible(fixtures::f1(), missing), "node 6 not visited"));
    CHECK(check_feasible(fixtures::f1(), missing, {.require_complete = false}).empty());
}

TEST_CASE("engine properties on random routes")
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 8 + trial % 25;
        const int sp = 1 + trial % 3;
        GeneratorOptions opts;
        opts.params.Qs = 9.0 + trial % 7;
        opts.params.Qt = 20.0 + trial % 30;
        const Instance inst = generate_instance(n, sp, rng(), opts);
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
        std::shuffle(perm.begin(), perm.end(), rng);
        Routes routes(static_cast<std::size_t>(sp));
        for (int i = 0; i < n; ++i) routes[static_cast<std::size_t>(i % sp)].push_back(perm[static_cast<std::size_t>(i)]);

        const Solution a = schedule_routes(inst, routes);
        const Solution b = schedule_routes(inst, routes);
        CHECK(solution_to_json(a) == solution_to_json(b));

        // Conservation: Qs + refilled = sprayed + leftover, per route.
        const RefillAssignment refills = derive_refills(inst, routes);
        for (const Route &r : routes) {
            double refilled = 0.0, sprayed = 0.0;
            for (int i : r) {
                refilled += refills.quantity[static_cast<std::size_t>(i)];
                sprayed += inst.q(i);
            }
            const double leftover = refills.level[static_cast<std::size_t>(r.back())] - inst.q(r.back());
            CHECK(inst.Qs() + refilled == doctest::Approx(sprayed + leftover).epsilon(1e-12));
        }

        // Timeline invariants.
        for (int i = 1; i <= n; ++i) {
            const NodeRecord &rec = a.timeline[static_cast<std::size_t>(i)];
            CHECK(rec.wait >= 0.0);
            CHECK(rec.level - inst.q(i) >= -1e-12);
            CHECK(rec.level <= inst.Qs() + 1e-12);
            CHECK((rec.quantity > 0.0) == rec.refill);
        }
        for (std::size_t k = 0; k < a.trips.size(); ++k) {
            const TankerTrip &trip = a.trips[k];
            if (k > 0) CHECK(trip.departure >= a.trips[k - 1].return_time + inst.gamma() - 1e-12);
            for (const TankerStop &stop : trip.stops) {
                const NodeRecord &rec = a.timeline[static_cast<std::size_t>(stop.node)];
                CHECK(stop.refill_start >= stop.arrival);
                CHECK(stop.refill_start >= rec.arrival + inst.s(stop.node) - 1e-12);
                CHECK(stop.level >= rec.quantity);
            }
        }

        // Objective components agree with the timeline.
        double waiting = 0.0;
        for (int i = 1; i <= n; ++i) waiting += a.timeline[static_cast<std::size_t>(i)].wait;
        CHECK(std::abs(waiting - a.objective.waiting) < 1e-9);
        CHECK(std::abs(a.objective.refill - inst.xi() * refills.count()) < 1e-9);

        // Raising xi never lowers the Model1 objective for fixed routes.
        InstanceParams p = inst.params();
        p.xi += 0.75;
        const Instance slower(inst.nodes(), p);
        CHECK(evaluate(slower, schedule_routes(slower, routes), Model::Model1) >= evaluate(inst, a, Model::Model1) - 1e-9);
    }
}

TEST_CASE("an instantly moving tanker never makes a sprayer wait")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorOptions opts;
        opts.params.Qs = 8.0;
        opts.params.Qt = 30.0;
        const bool single = seed % 2 == 0;
        if (!single) {
            // With several sprayers the tanker's own refill and depot times can still be a bottleneck.
            opts.params.xi = 0.0;
            opts.params.gamma = 0.0;
        }
        const int sp = single ? 1 : 3;
        const Instance inst = generate_instance(18, sp, seed, opts);
        Routes routes(static_cast<std::size_t>(sp));
        for (int i = 1; i <= 18; ++i) routes[static_cast<std::size_t>(i % sp)].push_back(i);
        const RefillAssignment refills = derive_refills(inst, routes);
        const TankerPlan plan = build_tanker_plan(inst, order_refill_list(inst, routes, refills), refills);
        const Solution sol = synchronize(inst, routes, refills, plan, {.instant_tanker = true});
        CHECK(refills.count() > 0);
        CHECK(sol.objective.waiting == 0.0);
    }
}

TEST_CASE("solution JSON has the documented fields")
{
    const std::string text = solution_to_json(schedule_routes(fixtures::f1(), fixtures::f1_routes()));
    for (const char *key : {"\"routes\"", "\"timeline\"", "\"trips\"", "\"objective\"", "\"routing\"", "\"waiting\"",
                            "\"refill\"", "\"makespan\"", "\"theta\"", "\"delta\"", "\"w\"", "\"h\""}) {
        CHECK(text.find(key) != std::string::npos);
    }
}
