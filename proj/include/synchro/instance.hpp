#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace synchro {

// Node 0 is the depot; nodes 1..N are spray nodes.
struct Node {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double q = 0.0;  // fertilizer demand
    double s = 0.0;  // service (spraying) time

    bool operator==(const Node &) const = default;
};

struct InstanceParams {
    int numSp = 1;
    double Qs = 25.0;
    double Qt = 100.0;
    double xi = 0.5;     // sprayer refill duration
    double gamma = 1.0;  // tanker depot refill duration
    double tMax = 480.0;
    double speed = 1.0;  // miles per time unit

    bool operator==(const InstanceParams &) const = default;
};

/// Immutable problem instance with a precomputed travel-time matrix.
class Instance {
public:
    Instance() = default;
    Instance(std::vector<Node> nodes, InstanceParams params);

    const std::vector<Node> &nodes() const { return nodes_; }
    const Node &node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const InstanceParams &params() const { return params_; }

    /// Number of spray nodes (excluding the depot).
    int size() const { return static_cast<int>(nodes_.size()) - 1; }
    int numSp() const { return params_.numSp; }
    double Qs() const { return params_.Qs; }
    double Qt() const { return params_.Qt; }
    double xi() const { return params_.xi; }
    double gamma() const { return params_.gamma; }
    double tMax() const { return params_.tMax; }
    double speed() const { return params_.speed; }

    double q(int id) const { return nodes_[static_cast<std::size_t>(id)].q; }
    double s(int id) const { return nodes_[static_cast<std::size_t>(id)].s; }

    /// Unchecked lookup into the travel matrix.
    double t(int i, int j) const { return travel_[static_cast<std::size_t>(i) * nodes_.size() + static_cast<std::size_t>(j)]; }
    double max_travel() const { return max_travel_; }
    double total_demand() const;

    bool operator==(const Instance &other) const
    {
        return nodes_ == other.nodes_ && params_ == other.params_;
    }

private:
    std::vector<Node> nodes_;
    InstanceParams params_;
    std::vector<double> travel_;
    double max_travel_ = 0.0;
};

struct Violation {
    std::string field;
    std::string message;
};

/// Every violated instance invariant; empty means the instance is valid.
std::vector<Violation> validate_instance(const Instance &inst);

struct TripBudget {
    int K = 0;
};

/// K = 2 * ceil(sum q / Qt).
TripBudget min_trips(const Instance &inst);

/// Checked travel time between node ids; throws std::out_of_range on unknown ids.
double travel_time(const Instance &inst, int i, int j);

struct GeneratorOptions {
    double fieldSize = 3.0;  // coordinates uniform on [0, L]^2
    int demandMin = 2;
    int demandMax = 5;
    double serviceFactor = 0.5;  // s_i = serviceFactor * q_i
    InstanceParams params;       // numSp is overwritten by the caller's value
};

/// Deterministic in (n, numSp, seed, options). Throws std::invalid_argument when n < 1.
Instance generate_instance(int n, int numSp, std::uint64_t seed, const GeneratorOptions &options = {});

class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string &path, const std::string &what)
        : std::runtime_error(path + ": " + what), path_(path)
    {
    }
    const std::string &path() const { return path_; }

private:
    std::string path_;
};

std::string instance_to_json(const Instance &inst);
Instance instance_from_json(const std::string &text);
Instance read_instance(const std::filesystem::path &path);
void write_instance(const Instance &inst, const std::filesystem::path &path);

}  // namespace synchro
