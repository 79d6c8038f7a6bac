#include "synchro/instance.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace synchro {

using nlohmann::json;

Instance::Instance(std::vector<Node> nodes, InstanceParams params)
    : nodes_(std::move(nodes)), params_(params)
{
    const std::size_t count = nodes_.size();
    travel_.assign(count * count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i + 1; j < count; ++j) {
            const double dist = std::hypot(nodes_[i].x - nodes_[j].x, nodes_[i].y - nodes_[j].y);
            const double time = dist / params_.speed;
            travel_[i * count + j] = time;
            travel_[j * count + i] = time;
            max_travel_ = std::max(max_travel_, time);
        }
    }
}

double Instance::total_demand() const
{
    double sum = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) sum += nodes_[i].q;
    return sum;
}

std::vector<Violation> validate_instance(const Instance &inst)
{
    std::vector<Violation> out;
    const auto &nodes = inst.nodes();
    const auto &p = inst.params();

    if (nodes.empty()) {
        out.push_back({"nodes", "depot (node 0) must be present"});
    }
    else {
        const Node &depot = nodes.front();
        if (depot.id != 0) out.push_back({"nodes[0].id", "depot must have id 0"});
        if (depot.q != 0.0) out.push_back({"nodes[0].q", "depot demand must be 0"});
        if (depot.s != 0.0) out.push_back({"nodes[0].s", "depot service time must be 0"});
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const Node &n = nodes[i];
        const std::string at = "nodes[" + std::to_string(i) + "]";
        if (n.id != static_cast<int>(i)) out.push_back({at + ".id", "node ids must be consecutive starting at 0"});
        if (!(n.q >= 1.0)) out.push_back({at + ".q", "spray node demand must be at least 1"});
        if (n.q > p.Qs) out.push_back({at + ".q", "demand exceeds sprayer capacity"});
        if (!(n.s > 0.0)) out.push_back({at + ".s", "spray node service time must be positive"});
    }

    if (!(p.Qt > p.Qs)) out.push_back({"Qt", "Qt must exceed Qs"});
    if (!(p.Qs > 0.0)) out.push_back({"Qs", "Qs must be positive"});
    if (p.numSp < 1) out.push_back({"numSp", "at least one sprayer is required"});
    if (!(p.tMax > 0.0)) out.push_back({"tMax", "tMax must be positive"});
    if (!(p.speed > 0.0)) out.push_back({"speed", "speed must be positive"});
    if (!(p.xi >= 0.0)) out.push_back({"xi", "xi must be nonnegative"});
    if (!(p.gamma >= 0.0)) out.push_back({"gamma", "gamma must be nonnegative"});
    if (p.numSp >= 1 && inst.size() < p.numSp) {
        out.push_back({"numSp", "fewer spray nodes than sprayers; every sprayer route must be nonempty"});
    }
    return out;
}

TripBudget min_trips(const Instance &inst)
{
    const double ratio = inst.total_demand() / inst.Qt();
    // Guard against ceil(1.0000000000000002) on exact multiples.
    const double rounded = std::round(ratio);
    const double trips = std::abs(ratio - rounded) < 1e-12 ? rounded : std::ceil(ratio);
    return TripBudget{2 * std::max(1, static_cast<int>(trips))};
}

double travel_time(const Instance &inst, int i, int j)
{
    const int count = static_cast<int>(inst.nodes().size());
    if (i < 0 || i >= count || j < 0 || j >= count) {
        throw std::out_of_range("unknown node id in travel_time: " + std::to_string(i) + ", " + std::to_string(j));
    }
    return inst.t(i, j);
}

Instance generate_instance(int n, int numSp, std::uint64_t seed, const GeneratorOptions &options)
{
    if (n < 1) throw std::invalid_argument("generate_instance: n must be at least 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, options.fieldSize);
    std::uniform_int_distribution<int> demand(options.demandMin, options.demandMax);

    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(n) + 1);
    nodes.push_back(Node{0, 0.0, 0.0, 0.0, 0.0});
    for (int i = 1; i <= n; ++i) {
        Node node;
        node.id = i;
        node.x = coord(rng);
        node.y = coord(rng);
        node.q = static_cast<double>(demand(rng));
        node.s = node.q * options.serviceFactor;
        nodes.push_back(node);
    }
    InstanceParams params = options.params;
    params.numSp = numSp;
    return Instance(std::move(nodes), params);
}

namespace {

const json &require(const json &obj, const std::string &key, const std::string &path)
{
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(path + key, "missing required field \"" + key + "\"");
    return obj.at(key);
}

double number_at(const json &obj, const std::string &key, const std::string &path)
{
    const json &v = require(obj, key, path);
    if (!v.is_number()) throw SchemaError(path + key, "field \"" + key + "\" must be a number");
    return v.get<double>();
}

int integer_at(const json &obj, const std::string &key, const std::string &path)
{
    const json &v = require(obj, key, path);
    if (!v.is_number_integer()) throw SchemaError(path + key, "field \"" + key + "\" must be an integer");
    return v.get<int>();
}

}  // namespace

std::string instance_to_json(const Instance &inst)
{
    json doc;
    json nodes = json::array();
    for (const Node &n : inst.nodes()) {
        nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"q", n.q}, {"s", n.s}});
    }
    const auto &p = inst.params();
    doc["nodes"] = std::move(nodes);
    doc["numSp"] = p.numSp;
    doc["Qs"] = p.Qs;
    doc["Qt"] = p.Qt;
    doc["xi"] = p.xi;
    doc["gamma"] = p.gamma;
    doc["tMax"] = p.tMax;
    doc["speed"] = p.speed;
    return doc.dump(2);
}

Instance instance_from_json(const std::string &text)
{
    json doc;
    try {
        doc = json::parse(text);
    }
    catch (const json::parse_error &e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("", "top-level value must be an object");

    const json &arr = require(doc, "nodes", "");
    if (!arr.is_array()) throw SchemaError("nodes", "field \"nodes\" must be an array");

    std::vector<Node> nodes;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "nodes[" + std::to_string(i) + "].";
        const json &item = arr[i];
        if (!item.is_object()) throw SchemaError(path, "node entry must be an object");
        Node n;
        n.id = integer_at(item, "id", path);
        n.x = number_at(item, "x", path);
        n.y = number_at(item, "y", path);
        n.q = number_at(item, "q", path);
        n.s = number_at(item, "s", path);
        nodes.push_back(n);
    }
    if (nodes.empty() || nodes.front().id != 0) throw SchemaError("nodes[0].id", "node id 0 must be present and be the depot");

    InstanceParams p;
    p.numSp = integer_at(doc, "numSp", "");
    p.Qs = number_at(doc, "Qs", "");
    p.Qt = number_at(doc, "Qt", "");
    p.xi = number_at(doc, "xi", "");
    p.gamma = number_at(doc, "gamma", "");
    p.tMax = number_at(doc, "tMax", "");
    p.speed = number_at(doc, "speed", "");
    return Instance(std::move(nodes), p);
}

Instance read_instance(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return instance_from_json(buffer.str());
}

void write_instance(const Instance &inst, const std::filesystem::path &path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file " + path.string());
    out << instance_to_json(inst) << '\n';
}

}  // namespace synchro
