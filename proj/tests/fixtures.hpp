#pragma once

#include <utility>
#include <vector>

#include "synchro/instance.hpp"
#include "synchro/schedule.hpp"

namespace fixtures {

struct Site {
    double x, y, q, s;
};

inline synchro::Instance make_instance(const std::vector<Site> &sites, synchro::InstanceParams params)
{
    std::vector<synchro::Node> nodes{{0, 0.0, 0.0, 0.0, 0.0}};
    int id = 1;
    for (const Site &site : sites) nodes.push_back({id++, site.x, site.y, site.q, site.s});
    return synchro::Instance(std::move(nodes), params);
}

// Depot (0,0); a 3x1 rectangle perimeter of six nodes with q=2, s=1.
inline synchro::Instance f1(double tMax = 100.0)
{
    synchro::InstanceParams p;
    p.numSp = 1;
    p.Qs = 5.0;
    p.Qt = 100.0;
    p.xi = 0.5;
    p.gamma = 1.0;
    p.tMax = tMax;
    p.speed = 1.0;
    return make_instance({{1, 0, 2, 1}, {2, 0, 2, 1}, {3, 0, 2, 1}, {3, 1, 2, 1}, {2, 1, 2, 1}, {1, 1, 2, 1}}, p);
}

inline const synchro::Routes f1_routes() { return {{1, 2, 3, 4, 5, 6}}; }

}  // namespace fixtures
