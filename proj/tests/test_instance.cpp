#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "synchro/instance.hpp"

using namespace synchro;

namespace {

bool has_violation(const std::vector<Violation> &vs, const std::string &needle)
{
    for (const auto &v : vs) {
        if (v.message.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::filesystem::path temp_file(const std::string &name)
{
    return std::filesystem::temp_directory_path() / ("synchro_test_" + name);
}

}  // namespace

TEST_CASE("validate_instance")
{
    SUBCASE("valid six-node instance")
    {
        CHECK(validate_instance(fixtures::f1()).empty());
    }
    SUBCASE("Qt equal to Qs")
    {
        InstanceParams p = fixtures::f1().params();
        p.Qt = p.Qs;
        const Instance inst(fixtures::f1().nodes(), p);
        CHECK(has_violation(validate_instance(inst), "Qt must exceed Qs"));
    }
    SUBCASE("demand above sprayer capacity")
    {
        auto nodes = fixtures::f1().nodes();
        nodes[3].q = fixtures::f1().Qs() + 1;
        const auto vs = validate_instance(Instance(nodes, fixtures::f1().params()));
        REQUIRE(has_violation(vs, "demand exceeds sprayer capacity"));
        CHECK(vs.front().field == "nodes[3].q");
    }
    SUBCASE("several violations are all reported")
    {
        auto nodes = fixtures::f1().nodes();
        nodes[0].q = 1.0;
        nodes[2].s = 0.0;
        InstanceParams p = fixtures::f1().params();
        p.speed = 0.0;
        p.numSp = 0;
        const auto vs = validate_instance(Instance(nodes, p));
        CHECK(vs.size() == 4);
    }
    SUBCASE("more sprayers than nodes")
    {
        InstanceParams p = fixtures::f1().params();
        p.numSp = 7;
        CHECK(has_violation(validate_instance(Instance(fixtures::f1().nodes(), p)), "fewer spray nodes than sprayers"));
    }
}

TEST_CASE("min_trips")
{
    InstanceParams p;
    p.Qs = 25;
    p.Qt = 100;
    auto with_total = [&](std::vector<double> qs) {
        std::vector<fixtures::Site> sites;
        for (double q : qs) sites.push_back({1, 1, q, 1});
        return min_trips(fixtures::make_instance(sites, p)).K;
    };
    CHECK(with_total({25, 25, 25, 25, 25, 25}) == 4);  // 150
    CHECK(with_total({25, 25, 25, 25}) == 2);          // 100
    p.Qs = 8;
    p.Qt = 30;
    CHECK(with_total({2, 2, 2, 2, 2, 2}) == 2);  // 12 / 30

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int K = min_trips(generate_instance(5 + static_cast<int>(seed) * 3, 2, seed)).K;
        CHECK(K >= 2);
        CHECK(K % 2 == 0);
    }
}

TEST_CASE("travel_time")
{
    InstanceParams p;
    p.speed = 1.0;
    const Instance a = fixtures::make_instance({{3, 4, 2, 1}}, p);
    CHECK(travel_time(a, 0, 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(travel_time(a, 1, 1) == 0.0);
    p.speed = 2.0;
    const Instance b = fixtures::make_instance({{1, 1, 2, 1}}, p);
    CHECK(travel_time(b, 0, 1) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(travel_time(b, 0, 5), std::out_of_range);
    CHECK_THROWS_AS(travel_time(b, -1, 0), std::out_of_range);
}

TEST_CASE("travel matrix properties on generated instances")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance inst = generate_instance(25, 3, seed);
        const int count = inst.size() + 1;
        for (int i = 0; i < count; ++i) {
            CHECK(inst.t(i, i) == 0.0);
            for (int j = 0; j < count; ++j) {
                CHECK(inst.t(i, j) == inst.t(j, i));
                CHECK(inst.t(i, j) >= 0.0);
                for (int k = 0; k < count; k += 5) CHECK(inst.t(i, j) <= inst.t(i, k) + inst.t(k, j) + 1e-12);
            }
        }
    }
}

TEST_CASE("generate_instance")
{
    SUBCASE("deterministic in the seed")
    {
        CHECK(generate_instance(30, 2, 7) == generate_instance(30, 2, 7));
        CHECK_FALSE(generate_instance(30, 2, 7) == generate_instance(30, 2, 8));
    }
    SUBCASE("valid and within the demand range")
    {
        const Instance inst = generate_instance(50, 3, 1);
        CHECK(validate_instance(inst).empty());
        CHECK(inst.size() == 50);
        std::set<double> seen;
        for (int i = 1; i <= inst.size(); ++i) {
            const double q = inst.q(i);
            CHECK((q == 2.0 || q == 3.0 || q == 4.0 || q == 5.0));
            CHECK(inst.s(i) == doctest::Approx(0.5 * q));
            CHECK(inst.node(i).x >= 0.0);
            CHECK(inst.node(i).x <= 3.0);
            seen.insert(q);
        }
        CHECK(seen.size() == 4);
        CHECK(inst.Qs() == 25.0);
        CHECK(inst.Qt() == 100.0);
        CHECK(inst.numSp() == 3);
    }
    SUBCASE("rejects empty instances")
    {
        CHECK_THROWS_AS(generate_instance(0, 1, 1), std::invalid_argument);
    }
    SUBCASE("many seeds validate")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(validate_instance(generate_instance(12, 2, seed)).empty());
    }
}

TEST_CASE("instance JSON I/O")
{
    SUBCASE("round trip")
    {
        const Instance inst = generate_instance(15, 2, 3);
        const auto path = temp_file("roundtrip.json");
        write_instance(inst, path);
        CHECK(read_instance(path) == inst);
        std::filesystem::remove(path);
    }
    SUBCASE("missing Qt names the field")
    {
        std::string text = instance_to_json(fixtures::f1());
        const auto pos = text.find("\"Qt\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 4, "\"QQ\"");
        try {
            instance_from_json(text);
            FAIL("expected a schema error");
        }
        catch (const SchemaError &e) {
            CHECK(e.path() == "Qt");
            CHECK(std::string(e.what()).find("Qt") != std::string::npos);
        }
    }
    SUBCASE("malformed file")
    {
        CHECK_THROWS_AS(instance_from_json("{\"nodes\": ["), SchemaError);
        CHECK_THROWS_AS(instance_from_json("{\"nodes\": [{\"id\": 0, \"x\": 0, \"y\": 0, \"q\": 0}]}"), SchemaError);
    }
    SUBCASE("negative coordinates are accepted")
    {
        const std::string text = R"({"nodes":[{"id":0,"x":0,"y":0,"q":0,"s":0},{"id":1,"x":-2.5,"y":-1,"q":2,"s":1}],
            "numSp":1,"Qs":25,"Qt":100,"xi":0.5,"gamma":1,"tMax":480,"speed":1})";
        const Instance inst = instance_from_json(text);
        CHECK(validate_instance(inst).empty());
        CHECK(inst.node(1).x == -2.5);
    }
    SUBCASE("depot must come first")
    {
        const std::string text = R"({"nodes":[{"id":1,"x":0,"y":0,"q":2,"s":1}],
            "numSp":1,"Qs":25,"Qt":100,"xi":0.5,"gamma":1,"tMax":480,"speed":1})";
        CHECK_THROWS_AS(instance_from_json(text), SchemaError);
    }
}
