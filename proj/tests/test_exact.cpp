#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "synchro/construction.hpp"
#include "synchro/exact.hpp"

using namespace synchro;

namespace {

// Sprayer A runs (1,0) (2,0) (3,0) and must refill once, either at node 1 or node 2. Sprayer B
// refills at (0,3) at time 6.2. With the default refill at node 2 (done at 4.0) the tanker
// reaches B only at 4.5 + sqrt(13); refilling A at node 1 instead (done at 2.0) gets it there
// at 2.5 + sqrt(10), before B is ready.
Instance relocation_instance()
{
    InstanceParams p;
    p.numSp = 2;
    p.Qs = 4.0;
    p.Qt = 100.0;
    p.xi = 0.5;
    p.gamma = 1.0;
    p.tMax = 100.0;
    return fixtures::make_instance({{1, 0, 2, 1}, {2, 0, 2, 1}, {3, 0, 2, 1}, {0, 3, 4, 3.2}, {0, 4, 4, 1}}, p);
}

// Two sprayers finish their only refill-node service 2 miles apart at 3.0 and 3.1.
Instance unavoidable_wait_instance()
{
    InstanceParams p;
    p.numSp = 2;
    p.Qs = 3.0;
    p.Qt = 100.0;
    p.xi = 0.5;
    p.gamma = 1.0;
    p.tMax = 100.0;
    return fixtures::make_instance({{1, 0, 2, 2}, {2, 0, 2, 1}, {1, 2, 2, 3.1 - std::sqrt(5.0)}, {2, 2, 2, 1}}, p);
}

double total_wait(const Solution &sol) { return sol.objective.waiting; }

}  // namespace

TEST_CASE("brute force on a single node is the out-and-back trip")
{
    InstanceParams p;
    const Instance inst = fixtures::make_instance({{3, 4, 2, 1}}, p);
    CHECK(evaluate(inst, brute_force_optimum(inst, Model::Model1), Model::Model1) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(evaluate(inst, brute_force_optimum(inst, Model::Model3), Model::Model3) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("brute force on the rectangle fixture matches the perimeter schedule")
{
    const Instance inst = fixtures::f1();
    const Solution best = brute_force_optimum(inst, Model::Model1);
    CHECK(evaluate(inst, best, Model::Model1) == doctest::Approx(7.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(check_feasible(inst, best).empty());
    CHECK(evaluate(inst, best, Model::Model1) <= evaluate(inst, schedule_routes(inst, fixtures::f1_routes()), Model::Model1) + 1e-9);
}

TEST_CASE("brute force guard")
{
    CHECK_THROWS_AS(brute_force_optimum(generate_instance(10, 1, 1), Model::Model1), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_optimum(generate_instance(6, 3, 1), Model::Model1), std::invalid_argument);
}

TEST_CASE("moving a refill earlier removes an avoidable wait")
{
    const Instance inst = relocation_instance();
    const Solution start = schedule_routes(inst, {{1, 2, 3}, {4, 5}});
    CHECK(start.timeline[2].refill);
    CHECK(total_wait(start) == doctest::Approx(std::sqrt(13.0) - 1.7).epsilon(1e-12));

    const Solution better = optimize_fixed_routes(inst, start, 10.0, Model::Model1);
    CHECK(better.routes == start.routes);
    CHECK(better.timeline[1].refill);
    CHECK_FALSE(better.timeline[2].refill);
    CHECK(total_wait(better) == doctest::Approx(0.0));
    CHECK(evaluate(inst, better, Model::Model1) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("a wait that no schedule can avoid is kept")
{
    const Instance inst = unavoidable_wait_instance();
    const Solution start = schedule_routes(inst, {{1, 2}, {3, 4}});
    CHECK(total_wait(start) == doctest::Approx(2.4).epsilon(1e-12));
    const Solution after = optimize_fixed_routes(inst, start, 10.0, Model::Model1);
    CHECK(total_wait(after) == doctest::Approx(2.4).epsilon(1e-12));
    // Serving the other sprayer first costs 2.6.
    const auto best = best_schedule_for_routes(inst, {{1, 2}, {3, 4}}, Model::Model1);
    REQUIRE(best);
    CHECK(total_wait(*best) == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("zero budget returns the input")
{
    const Instance inst = relocation_instance();
    const Solution start = schedule_routes(inst, {{1, 2, 3}, {4, 5}});
    CHECK(solution_to_json(optimize_fixed_routes(inst, start, 0.0, Model::Model1)) == solution_to_json(start));
}

TEST_CASE("schedule space size counts placements, orders and splits")
{
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = uniform_int(rng, 1, 7);
        GeneratorOptions opts;
        opts.params.Qs = uniform_real(rng, 5.0, 12.0);
        const Instance inst = generate_instance(n, 1, rng(), opts);
        Route route(static_cast<std::size_t>(n));
        std::iota(route.begin(), route.end(), 1);
        // Independent count: every subset of non-final positions that keeps the tank non-negative.
        double expected = 0.0;
        for (unsigned mask = 0; mask < (1U << (n - 1)); ++mask) {
            std::vector<char> flags(static_cast<std::size_t>(n) + 1, 0);
            int refills = 0;
            for (int p = 0; p < n - 1; ++p) {
                if (mask & (1U << p)) {
                    flags[static_cast<std::size_t>(route[static_cast<std::size_t>(p)])] = 1;
                    ++refills;
                }
            }
            if (apply_refills(inst, {route}, flags)) expected += refills == 0 ? 1.0 : std::ldexp(1.0, refills - 1);
        }
        CHECK(schedule_space_size(inst, {route}) == doctest::Approx(expected));
    }
}

TEST_CASE("fixed-route optimization never worsens and matches the exhaustive optimum on tiny instances")
{
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const int sp = uniform_int(rng, 1, 2);
        const int n = uniform_int(rng, 3, 8);
        GeneratorOptions opts;
        opts.params.Qs = uniform_real(rng, 6.0, 12.0);
        opts.params.Qt = uniform_real(rng, 13.0, 30.0);
        const Instance inst = generate_instance(n, sp, rng(), opts);
        Solution start;
        try {
            start = build_initial(inst, rng);
        }
        catch (const InfeasibleInstance &) {
            continue;
        }
        for (Model model : {Model::Model1, Model::Model2}) {
            const Solution opt = optimize_fixed_routes(inst, start, 30.0, model);
            CHECK(check_feasible(inst, opt).empty());
            CHECK(opt.routes == start.routes);
            CHECK(evaluate(inst, opt, model) <= evaluate(inst, start, model) + 1e-9);
            const auto exhaustive = best_schedule_for_routes(inst, start.routes, model);
            REQUIRE(exhaustive);
            CHECK(evaluate(inst, opt, model) == doctest::Approx(evaluate(inst, *exhaustive, model)).epsilon(1e-9));
        }
    }
}

TEST_CASE("local search path on large routes is feasible, deterministic and never worse")
{
    Rng rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        GeneratorOptions opts;
        opts.params.Qs = 10.0;
        opts.params.Qt = 40.0;
        const Instance inst = generate_instance(30, 2, rng(), opts);
        const Solution start = build_initial(inst, rng);
        REQUIRE(schedule_space_size(inst, start.routes) > kExhaustiveLimit);
        const Solution a = optimize_fixed_routes(inst, start, 60.0, Model::Model1);
        const Solution b = optimize_fixed_routes(inst, start, 60.0, Model::Model1);
        CHECK(solution_to_json(a) == solution_to_json(b));
        CHECK(check_feasible(inst, a).empty());
        CHECK(evaluate(inst, a, Model::Model1) <= evaluate(inst, start, Model::Model1) + 1e-9);
    }
}

TEST_CASE("brute force lower-bounds every schedule and orders the model variants")
{
    Rng rng(29);
    for (int trial = 0; trial < 6; ++trial) {
        const int sp = uniform_int(rng, 1, 2);
        const int n = uniform_int(rng, 4, 6);
        GeneratorOptions opts;
        opts.params.Qs = 9.0;
        const Instance inst = generate_instance(n, sp, rng(), opts);
        const Solution m1 = brute_force_optimum(inst, Model::Model1);
        const Solution m2 = brute_force_optimum(inst, Model::Model2);
        const Solution m3 = brute_force_optimum(inst, Model::Model3);
        const Solution heuristic = build_initial(inst, rng);
        CHECK(evaluate(inst, m1, Model::Model1) <= evaluate(inst, heuristic, Model::Model1) + 1e-9);
        CHECK(m3.objective.routing <= m1.objective.routing + 1e-9);
        CHECK(m2.objective.makespan <= m1.objective.makespan + 1e-9);
        CHECK(m2.objective.makespan <= m3.objective.makespan + 1e-9);
    }
}

TEST_CASE("pruned brute force agrees with the unpruned enumeration")
{
    Rng rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        const int sp = uniform_int(rng, 1, 2);
        const int n = uniform_int(rng, 3, 6);
        GeneratorOptions opts;
        opts.params.Qs = 8.0;
        opts.params.Qt = 12.0;
        const Instance inst = generate_instance(n, sp, rng(), opts);
        for (Model model : {Model::Model1, Model::Model2, Model::Model3}) {
            double naive = 1e300;
            std::vector<int> perm(static_cast<std::size_t>(n));
            std::iota(perm.begin(), perm.end(), 1);
            do {
                for (int cut = sp == 1 ? n : 1; cut <= (sp == 1 ? n : n - 1); ++cut) {
                    Routes routes{Route(perm.begin(), perm.begin() + cut)};
                    if (sp == 2) routes.emplace_back(perm.begin() + cut, perm.end());
                    if (auto s = best_schedule_for_routes(inst, routes, model)) naive = std::min(naive, evaluate(inst, *s, model));
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            CHECK(evaluate(inst, brute_force_optimum(inst, model), model) == doctest::Approx(naive).epsilon(1e-12));
        }
    }
}
