#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "synchro/instance.hpp"
#include "synchro/schedule.hpp"

namespace synchro {

enum class VarType { Continuous, Binary };
enum class Sense { LessEqual, GreaterEqual, Equal };

struct Variable {
    std::string name;
    VarType type = VarType::Continuous;
    double lower = 0.0;
    double upper = 0.0;  // +infinity when unbounded

    bool operator==(const Variable &) const = default;
};

struct Term {
    int var = 0;
    double coef = 0.0;

    bool operator==(const Term &) const = default;
};

struct Row {
    std::string name;
    std::string family;  // name up to its first numeric segment
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;

    bool operator==(const Row &) const = default;
};

/// Where a constraint family departs from its textbook statement.
struct Deviation {
    std::string family;
    std::string original;
    std::string implemented;
    std::string reason;

    bool operator==(const Deviation &) const = default;
};

/// Node set for the model: 0 is the start depot, 1..n spray nodes, n+1 the end copy of the depot.
struct ConstraintSystem {
    Model model = Model::Model1;
    int n = 0;
    int K = 0;
    int numSp = 0;
    double Qs = 0.0;
    double Qt = 0.0;
    std::vector<double> service;  // by node id, entry 0 unused
    double bigM_time = 0.0;
    double bigM_qty = 0.0;

    std::vector<Variable> vars;
    std::vector<Row> rows;
    std::vector<Term> objective;
    std::vector<Deviation> deviations;

    int var(const std::string &name) const;  // throws std::out_of_range
    bool has_var(const std::string &name) const;
    int add_var(std::string name, VarType type, double lower, double upper);
    void index();

    bool operator==(const ConstraintSystem &other) const;

private:
    std::unordered_map<std::string, int> lookup_;
};

/// Family of a row name: the underscore-separated segments before the first all-digit one.
std::string row_family(const std::string &name);

std::vector<Deviation> model_deviations();

ConstraintSystem build_model(const Instance &inst, Model model);

/// CPLEX LP text: Minimize / Subject To / Bounds / Binaries / End.
std::string to_lp(const ConstraintSystem &cs);
void export_lp(const ConstraintSystem &cs, const std::string &path);
/// Deviation log as JSON text.
std::string deviations_json(const ConstraintSystem &cs);

/// Reads LP text produced by to_lp. Throws std::runtime_error with a line number on bad input.
ConstraintSystem parse_lp(const std::string &text);
ConstraintSystem read_lp(const std::string &path);

struct RowViolation {
    std::string row;
    double slack = 0.0;  // negative by the amount of violation
};

struct FamilyReport {
    std::string family;
    int satisfied = 0;
    std::vector<RowViolation> violated;
};

struct AssignmentCertificate {
    std::vector<FamilyReport> families;  // in order of first appearance
    double objective = 0.0;              // recomputed from the assignment
    double reported_objective = 0.0;     // evaluate() on the solution
    bool objective_matches = false;      // within 1e-6

    int violation_count() const;
    bool clean() const { return violation_count() == 0 && objective_matches; }
    const FamilyReport *family(const std::string &name) const;
};

/// Variable values for a synchronized solution. Throws std::invalid_argument when a spray node is
/// unrouted or the solution does not match the model's dimensions.
std::vector<double> assignment_from_solution(const ConstraintSystem &cs, const Solution &sol);

/// Evaluates every row and bound on an explicit assignment.
AssignmentCertificate certify(const ConstraintSystem &cs, const std::vector<double> &values);

/// Maps sol onto the variables and certifies it. Solutions using more than K trips get a
/// trip_budget violation instead of a mapping.
AssignmentCertificate validate_solution(const ConstraintSystem &cs, const Solution &sol);

std::string certificate_summary(const AssignmentCertificate &cert);

}  // namespace synchro
