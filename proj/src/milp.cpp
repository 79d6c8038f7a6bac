#include "synchro/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace synchro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowTol = 1e-6;

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string name2(const char *prefix, int a) { return std::string(prefix) + "_" + std::to_string(a); }
std::string name3(const char *prefix, int a, int b) { return name2(prefix, a) + "_" + std::to_string(b); }
std::string name4(const char *prefix, int a, int b, int c) { return name3(prefix, a, b) + "_" + std::to_string(c); }

class Builder {
public:
    Builder(const Instance &inst, Model model) : inst_(inst)
    {
        cs_.model = model;
        cs_.n = inst.size();
        cs_.K = min_trips(inst).K;
        cs_.numSp = inst.numSp();
        cs_.Qs = inst.Qs();
        cs_.Qt = inst.Qt();
        cs_.service.assign(inst.nodes().size(), 0.0);
        for (int i = 1; i <= cs_.n; ++i) cs_.service[static_cast<std::size_t>(i)] = inst.s(i);
        cs_.bigM_time = inst.tMax() + inst.max_travel() + inst.xi() + inst.gamma();
        cs_.bigM_qty = inst.Qt();
        cs_.deviations = model_deviations();
        E_ = cs_.n + 1;
    }

    ConstraintSystem build()
    {
        declare();
        routing_rows();
        trip_rows();
        timing_rows();
        quantity_rows();
        if (cs_.model == Model::Model2) latest_return_rows();
        objective();
        return std::move(cs_);
    }

private:
    // Arcs a vehicle can use: nothing enters the start depot or leaves the end copy, and no
    // vehicle goes straight from one to the other.
    bool arc(int i, int j) const { return i != j && j != 0 && i != E_ && !(i == 0 && j == E_); }

    double t(int i, int j) const { return inst_.t(i == E_ ? 0 : i, j == E_ ? 0 : j); }

    int v(const std::string &name) const { return cs_.var(name); }
    int x(int i, int j) const { return v(name3("x", i, j)); }
    int g(int i, int j, int k) const { return v(name4("g", i, j, k)); }
    int theta(int i, int k) const { return v(name3("theta", i, k)); }
    int w(int i, int k) const { return v(name3("w", i, k)); }
    int h(int i, int k) const { return v(name3("h", i, k)); }
    int z(int k, int r) const { return v(name3("z", k, r)); }
    int y(int i) const { return v(name2("y", i)); }
    int m(int i) const { return v(name2("m", i)); }
    int l(int i) const { return v(name2("l", i)); }
    int vq(int i) const { return v(name2("v", i)); }
    int delta(int i) const { return v(name2("delta", i)); }

    void row(std::string name, std::vector<Term> terms, Sense sense, double rhs)
    {
        Row r;
        r.family = row_family(name);
        r.name = std::move(name);
        r.terms = std::move(terms);
        r.sense = sense;
        r.rhs = rhs;
        cs_.rows.push_back(std::move(r));
    }

    void declare()
    {
        const int n = cs_.n, K = cs_.K;
        for (int i = 0; i <= E_; ++i) {
            for (int j = 0; j <= E_; ++j) {
                if (i != j) cs_.add_var(name3("x", i, j), VarType::Binary, 0.0, arc(i, j) ? 1.0 : 0.0);
            }
        }
        for (int i = 0; i <= E_; ++i) {
            for (int j = 0; j <= E_; ++j) {
                if (i == j) continue;
                for (int k = 1; k <= K; ++k) cs_.add_var(name4("g", i, j, k), VarType::Binary, 0.0, arc(i, j) ? 1.0 : 0.0);
            }
        }
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("delta", i), VarType::Binary, 0.0, 1.0);
        for (int k = 1; k <= K; ++k) {
            for (int r = k + 1; r <= K; ++r) cs_.add_var(name3("z", k, r), VarType::Binary, 0.0, 1.0);
        }
        for (int i = 0; i <= E_; ++i) {
            for (int k = 1; k <= K; ++k) cs_.add_var(name3("theta", i, k), VarType::Continuous, 0.0, kInf);
        }
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("y", i), VarType::Continuous, 0.0, kInf);
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("a", i), VarType::Continuous, 0.0, kInf);
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) cs_.add_var(name3("w", i, k), VarType::Continuous, 0.0, kInf);
        }
        for (int i = 0; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) cs_.add_var(name3("h", i, k), VarType::Continuous, i == 0 ? cs_.Qt : 0.0, cs_.Qt);
        }
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("l", i), VarType::Continuous, 0.0, cs_.Qs);
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("m", i), VarType::Continuous, 0.0, kInf);
        for (int i = 1; i <= n; ++i) cs_.add_var(name2("v", i), VarType::Continuous, 0.0, kInf);
        if (cs_.model == Model::Model2) cs_.add_var("alpha", VarType::Continuous, 0.0, kInf);
    }

    void routing_rows()
    {
        const int n = cs_.n;
        for (int j = 1; j <= n; ++j) {
            std::vector<Term> terms;
            for (int i = 0; i <= E_; ++i) {
                if (arc(i, j)) terms.push_back({x(i, j), 1.0});
            }
            row(name2("visit", j), terms, Sense::Equal, 1.0);
        }
        for (int j = 1; j <= n; ++j) {
            std::vector<Term> terms;
            for (int i = 0; i <= E_; ++i) {
                if (arc(i, j)) terms.push_back({x(i, j), 1.0});
            }
            for (int i = 0; i <= E_; ++i) {
                if (arc(j, i)) terms.push_back({x(j, i), -1.0});
            }
            row(name2("sprayer_flow", j), terms, Sense::Equal, 0.0);
        }
        std::vector<Term> out, in;
        for (int j = 1; j <= n; ++j) {
            out.push_back({x(0, j), 1.0});
            in.push_back({x(j, E_), 1.0});
        }
        row(name2("fleet", 0), out, Sense::Equal, cs_.numSp);
        row(name2("fleet", E_), in, Sense::Equal, cs_.numSp);
    }

    std::vector<Term> trip_used(int k, double coef) const
    {
        std::vector<Term> terms;
        for (int j = 1; j <= cs_.n; ++j) terms.push_back({g(0, j, k), coef});
        return terms;
    }

    std::vector<Term> visits(int i, int k, double coef) const
    {
        std::vector<Term> terms;
        for (int j = 0; j <= E_; ++j) {
            if (arc(j, i)) terms.push_back({g(j, i, k), coef});
        }
        return terms;
    }

    void trip_rows()
    {
        const int n = cs_.n, K = cs_.K;
        for (int k = 1; k <= K; ++k) {
            for (int j = 1; j <= n; ++j) {
                std::vector<Term> terms = visits(j, k, 1.0);
                for (int i = 0; i <= E_; ++i) {
                    if (arc(j, i)) terms.push_back({g(j, i, k), -1.0});
                }
                row(name3("tanker_flow", j, k), terms, Sense::Equal, 0.0);
            }
            row(name2("trip_start", k), trip_used(k, 1.0), Sense::LessEqual, 1.0);
            std::vector<Term> ends = trip_used(k, 1.0);
            for (int i = 1; i <= n; ++i) ends.push_back({g(i, E_, k), -1.0});
            row(name2("trip_end", k), ends, Sense::Equal, 0.0);
        }
        for (int i = 1; i <= n; ++i) {
            std::vector<Term> terms{{delta(i), 1.0}};
            for (int k = 1; k <= K; ++k) {
                for (const Term &term : visits(i, k, -1.0)) terms.push_back(term);
            }
            row(name2("refill_visit", i), terms, Sense::Equal, 0.0);
        }

        std::vector<Term> count;
        for (int k = 1; k <= K; ++k) {
            for (int r = k + 1; r <= K; ++r) count.push_back({z(k, r), 1.0});
        }
        for (int k = 1; k <= K; ++k) {
            for (const Term &term : trip_used(k, -1.0)) count.push_back(term);
        }
        row("trip_count", count, Sense::GreaterEqual, -1.0);
        for (int r = 2; r <= K; ++r) {
            std::vector<Term> terms;
            for (int k = 1; k < r; ++k) terms.push_back({z(k, r), 1.0});
            row(name2("chain_in", r), terms, Sense::LessEqual, 1.0);
        }
        for (int k = 1; k < K; ++k) {
            std::vector<Term> terms;
            for (int r = k + 1; r <= K; ++r) terms.push_back({z(k, r), 1.0});
            row(name2("chain_out", k), terms, Sense::LessEqual, 1.0);
        }
        for (int k = 1; k <= K; ++k) {
            for (int r = k + 1; r <= K; ++r) {
                std::vector<Term> from{{z(k, r), 1.0}};
                for (const Term &term : trip_used(k, -1.0)) from.push_back(term);
                row(name3("chain_from", k, r), from, Sense::LessEqual, 0.0);
                std::vector<Term> to{{z(k, r), 1.0}};
                for (const Term &term : trip_used(r, -1.0)) to.push_back(term);
                row(name3("chain_to", k, r), to, Sense::LessEqual, 0.0);
            }
        }
    }

    void timing_rows()
    {
        const int n = cs_.n, K = cs_.K;
        const double M = cs_.bigM_time;
        const double xi = inst_.xi();
        const double tMax = inst_.tMax();
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) row(name3("sync_service", i, k), {{y(i), 1.0}, {w(i, k), -1.0}}, Sense::LessEqual, -inst_.s(i));
        }
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) row(name3("sync_tanker", i, k), {{theta(i, k), 1.0}, {w(i, k), -1.0}}, Sense::LessEqual, 0.0);
        }
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                const double lag = inst_.s(i) + t(i, j);
                row(name3("sprayer_time_lo", i, j),
                    {{y(j), 1.0}, {y(i), -1.0}, {x(i, j), -(lag + M)}, {delta(i), -xi}, {m(i), -1.0}}, Sense::GreaterEqual, -M);
                row(name3("sprayer_time_hi", i, j),
                    {{y(j), 1.0}, {y(i), -1.0}, {x(i, j), -(lag - M)}, {delta(i), -xi}, {m(i), -1.0}}, Sense::LessEqual, M);
            }
        }
        for (int i = 1; i <= n; ++i) row(name2("depot_departure", i), {{y(i), 1.0}, {x(0, i), -t(0, i)}}, Sense::GreaterEqual, 0.0);
        for (int k = 1; k <= K; ++k) {
            for (int j = 1; j <= n; ++j) {
                row(name3("tanker_depart", j, k), {{theta(0, k), 1.0}, {theta(j, k), -1.0}, {g(0, j, k), t(0, j) + M}},
                    Sense::LessEqual, M);
            }
        }
        for (int k = 1; k <= K; ++k) {
            for (int i = 1; i <= n; ++i) {
                for (int j = 1; j <= n; ++j) {
                    if (i == j) continue;
                    row(name4("tanker_time", i, j, k), {{w(i, k), 1.0}, {theta(j, k), -1.0}, {g(i, j, k), t(i, j) + xi + M}},
                        Sense::LessEqual, M);
                }
            }
        }
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) {
                row(name3("tanker_return", i, k),
                    {{w(i, k), 1.0}, {delta(i), xi}, {theta(E_, k), -1.0}, {g(i, E_, k), t(i, 0) + M}}, Sense::LessEqual, M);
            }
        }
        for (int k = 1; k <= K; ++k) {
            for (int r = k + 1; r <= K; ++r) {
                row(name3("trip_link", k, r), {{theta(E_, k), 1.0}, {theta(0, r), -1.0}, {z(k, r), M}}, Sense::LessEqual,
                    M - inst_.gamma());
            }
        }
        for (int i = 1; i <= n; ++i) {
            row(name2("sprayer_horizon", i), {{y(i), 1.0}, {x(i, E_), t(i, 0)}}, Sense::LessEqual, tMax - inst_.s(i));
        }
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) {
                row(name3("tanker_horizon", i, k), {{theta(i, k), 1.0}, {g(i, E_, k), t(i, 0)}}, Sense::LessEqual, tMax);
            }
        }
        for (int k = 1; k <= K; ++k) row(name2("return_horizon", k), {{theta(E_, k), 1.0}}, Sense::LessEqual, tMax);
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) {
                std::vector<Term> terms{{m(i), 1.0}, {theta(i, k), -1.0}, {y(i), 1.0}};
                for (const Term &term : visits(i, k, -M)) terms.push_back(term);
                row(name3("waiting", i, k), terms, Sense::GreaterEqual, -inst_.s(i) - M);
            }
        }
    }

    void quantity_rows()
    {
        const int n = cs_.n, K = cs_.K;
        const double Mq = cs_.bigM_qty;
        const double Qs = cs_.Qs;
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                row(name3("sprayer_level", i, j), {{l(j), 1.0}, {l(i), -1.0}, {x(i, j), inst_.q(i) + Mq}, {vq(i), -1.0}},
                    Sense::LessEqual, Mq);
            }
        }
        for (int i = 1; i <= n; ++i) row(name2("spray_level", i), {{l(i), 1.0}}, Sense::GreaterEqual, inst_.q(i));
        for (int k = 1; k <= K; ++k) {
            for (int i = 0; i <= n; ++i) {
                for (int j = 1; j <= n; ++j) {
                    if (i == j) continue;
                    std::vector<Term> terms{{h(j, k), 1.0}, {h(i, k), -1.0}};
                    if (i > 0) terms.push_back({vq(i), 1.0});
                    terms.push_back({g(i, j, k), Mq});
                    row(name4("tanker_level", i, j, k), terms, Sense::LessEqual, Mq);
                }
            }
        }
        for (int i = 1; i <= n; ++i) {
            for (int k = 1; k <= K; ++k) {
                std::vector<Term> terms{{h(i, k), 1.0}, {vq(i), -1.0}};
                for (const Term &term : visits(i, k, -Mq)) terms.push_back(term);
                row(name3("tanker_supply", i, k), terms, Sense::GreaterEqual, -Mq);
            }
        }
        for (int i = 1; i <= n; ++i) {
            std::vector<Term> terms{{vq(i), 1.0}, {delta(i), Qs}, {l(i), 1.0}};
            for (int j = 0; j <= n; ++j) {
                if (arc(j, i)) terms.push_back({x(j, i), -inst_.q(i)});
            }
            row(name2("refill_qty", i), terms, Sense::LessEqual, 2.0 * Qs);
        }
        for (int i = 1; i <= n; ++i) row(name2("refill_cap", i), {{vq(i), 1.0}, {delta(i), -Qs}}, Sense::LessEqual, 0.0);
        for (int i = 1; i <= n; ++i) row(name2("initial_level", i), {{l(i), 1.0}, {x(0, i), -Qs}}, Sense::GreaterEqual, 0.0);
    }

    void latest_return_rows()
    {
        const int alpha = v("alpha");
        for (int i = 1; i <= cs_.n; ++i) {
            row(name2("latest_return", i), {{alpha, 1.0}, {y(i), -1.0}, {x(i, E_), -t(i, 0)}}, Sense::GreaterEqual, inst_.s(i));
        }
    }

    void objective()
    {
        if (cs_.model == Model::Model2) {
            cs_.objective = {{v("alpha"), 1.0}};
            return;
        }
        for (int i = 0; i <= E_; ++i) {
            for (int j = 0; j <= E_; ++j) {
                if (arc(i, j)) cs_.objective.push_back({x(i, j), t(i, j)});
            }
        }
        if (cs_.model == Model::Model1) {
            for (int i = 1; i <= cs_.n; ++i) cs_.objective.push_back({m(i), 1.0});
            for (int i = 1; i <= cs_.n; ++i) cs_.objective.push_back({delta(i), inst_.xi()});
        }
    }

    const Instance &inst_;
    ConstraintSystem cs_;
    int E_ = 0;
};

void write_terms(std::ostringstream &out, const ConstraintSystem &cs, const std::vector<Term> &terms, std::size_t &width)
{
    bool first = true;
    for (const Term &term : terms) {
        std::string piece;
        if (term.coef < 0) {
            piece = first ? "- " : " - ";
        }
        else if (!first) {
            piece = " + ";
        }
        piece += num(std::abs(term.coef)) + " " + cs.vars[static_cast<std::size_t>(term.var)].name;
        if (width + piece.size() > 200) {
            out << "\n  ";
            width = 2;
            if (piece.front() == ' ') piece.erase(0, 1);
        }
        out << piece;
        width += piece.size();
        first = false;
    }
}

std::string sense_text(Sense s)
{
    switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::GreaterEqual: return ">=";
    case Sense::Equal: return "=";
    }
    return "=";
}

double parse_number(const std::string &token, int line)
{
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    }
    catch (const std::exception &) {
        used = 0;
    }
    if (used != token.size()) throw std::runtime_error("LP line " + std::to_string(line) + ": expected a number, got '" + token + "'");
    return value;
}

bool is_number(const std::string &token)
{
    if (token.empty()) return false;
    const char c = token.front();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
           ((c == '-' || c == '+') && token.size() > 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

int ConstraintSystem::var(const std::string &name) const
{
    const auto it = lookup_.find(name);
    if (it == lookup_.end()) throw std::out_of_range("unknown variable " + name);
    return it->second;
}

bool ConstraintSystem::has_var(const std::string &name) const { return lookup_.count(name) > 0; }

int ConstraintSystem::add_var(std::string name, VarType type, double lower, double upper)
{
    const int id = static_cast<int>(vars.size());
    lookup_[name] = id;
    vars.push_back({std::move(name), type, lower, upper});
    return id;
}

void ConstraintSystem::index()
{
    lookup_.clear();
    for (std::size_t k = 0; k < vars.size(); ++k) lookup_[vars[k].name] = static_cast<int>(k);
}

bool ConstraintSystem::operator==(const ConstraintSystem &o) const
{
    return model == o.model && n == o.n && K == o.K && numSp == o.numSp && Qs == o.Qs && Qt == o.Qt && service == o.service &&
           bigM_time == o.bigM_time && bigM_qty == o.bigM_qty && vars == o.vars && rows == o.rows && objective == o.objective &&
           deviations == o.deviations;
}

std::string row_family(const std::string &name)
{
    std::string family;
    std::stringstream in(name);
    std::string part;
    while (std::getline(in, part, '_')) {
        if (!part.empty() && std::all_of(part.begin(), part.end(), [](unsigned char c) { return std::isdigit(c); })) break;
        if (!family.empty()) family += '_';
        family += part;
    }
    return family;
}

std::vector<Deviation> model_deviations()
{
    return {
        {"network", "sprayer and tanker returns use arcs (i,0)",
         "returns use arcs into a copy n+1 of the depot; arcs into 0, out of n+1 and 0 -> n+1 are fixed to 0",
         "separates trip start and end times and rules out empty sprayer routes"},
        {"sprayer_flow", "in/out balance summed over spray nodes only",
         "balance summed over all nodes including both depot copies", "otherwise first and last arcs of a route are unbalanced"},
        {"fleet", "sum_i x_0i = sum_i x_i0 = numSp", "sum_i x_0i = sum_i x_i,n+1 = numSp", "end copy of the depot"},
        {"trip_count", "|K| - sum_{k<r} z_kr = 1",
         "sum_{k<r} z_kr >= sum_k sum_j g_0jk - 1, with chain_from/chain_to rows z_kr <= trip used",
         "the original equality forces every trip to be used; chained trips must equal trips used minus one"},
        {"chain_in", "sum_{r<k} z_rk <= 1 quantified over s", "quantified over every trip k", "index typo"},
        {"waiting", "m_i >= theta_ik - (y_i + s_i) - M(1 - theta_ik)", "M(1 - sum_j g_jik)",
         "waiting is only defined at stops the tanker visits on trip k"},
        {"tanker_depart", "absent", "theta_0k + t_0j - M(1 - g_0jk) <= theta_jk",
         "links the first stop of a trip to the trip's departure"},
        {"tanker_horizon", "theta_ik + t_i0 g_i0k <= tMax for all k", "for all spray nodes i and trips k", "missing node index"},
        {"return_horizon", "absent", "theta_{n+1,k} <= tMax", "bounds the trip return time itself"},
        {"spray_level", "absent", "l_i >= q_i", "the tank must hold the node's demand on arrival"},
        {"tanker_level", "0 <= h_jk <= h_ik - v_i + M(1 - g_ijk) for i in N", "same with v_0 = 0; h_0k fixed to Qt by bounds",
         "the depot has no refill quantity"},
        {"tanker_supply", "absent", "h_ik >= v_i - M(1 - sum_j g_jik)", "the tanker must carry what it hands over at its last stop"},
        {"capacity", "l_j <= Qs, h_jk <= Qt, l_0 = Qs, h_0 = Qt as rows", "variable bounds; l_0 is represented by initial_level",
         "equivalent"},
        {"spray_start", "a_i declared without constraints", "a_i declared without constraints; certificates set a_i = y_i",
         "spraying starts on arrival"},
    };
}

ConstraintSystem build_model(const Instance &inst, Model model) { return Builder(inst, model).build(); }

std::string to_lp(const ConstraintSystem &cs)
{
    std::ostringstream out;
    out << "\\ synchro model=" << static_cast<int>(cs.model) << " n=" << cs.n << " sprayers=" << cs.numSp << " trips=" << cs.K
        << " Qs=" << num(cs.Qs) << " Qt=" << num(cs.Qt) << " Mtime=" << num(cs.bigM_time) << " Mqty=" << num(cs.bigM_qty) << "\n";
    for (int i = 1; i <= cs.n; ++i) {
        if ((i - 1) % 8 == 0) out << (i > 1 ? "\n" : "") << "\\ service";
        out << " " << i << ":" << num(cs.service[static_cast<std::size_t>(i)]);
    }
    if (cs.n > 0) out << "\n";

    out << "Minimize\n obj: ";
    std::size_t width = 6;
    write_terms(out, cs, cs.objective, width);
    out << "\nSubject To\n";
    for (const Row &row : cs.rows) {
        out << " " << row.name << ": ";
        width = row.name.size() + 3;
        write_terms(out, cs, row.terms, width);
        out << " " << sense_text(row.sense) << " " << num(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const Variable &v : cs.vars) {
        if (v.lower == v.upper) {
            out << " " << v.name << " = " << num(v.lower) << "\n";
        }
        else if (std::isinf(v.upper)) {
            out << " " << v.name << " >= " << num(v.lower) << "\n";
        }
        else {
            out << " " << num(v.lower) << " <= " << v.name << " <= " << num(v.upper) << "\n";
        }
    }
    out << "Binaries\n";
    std::size_t col = 0;
    for (const Variable &v : cs.vars) {
        if (v.type != VarType::Binary) continue;
        if (col > 0 && col + v.name.size() > 200) {
            out << "\n";
            col = 0;
        }
        out << " " << v.name;
        col += v.name.size() + 1;
    }
    out << "\nEnd\n";
    return out.str();
}

void export_lp(const ConstraintSystem &cs, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_lp(cs);
}

std::string deviations_json(const ConstraintSystem &cs)
{
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const Deviation &d : cs.deviations) {
        doc.push_back({{"family", d.family}, {"original", d.original}, {"implemented", d.implemented}, {"reason", d.reason}});
    }
    return doc.dump(2) + "\n";
}

ConstraintSystem parse_lp(const std::string &text)
{
    ConstraintSystem cs;
    cs.deviations = model_deviations();
    enum class Section { None, Objective, Rows, Bounds, Binaries, Done } section = Section::None;

    struct PendingRow {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        Sense sense = Sense::Equal;
        double rhs = 0.0;
        bool closed = false;
    };
    std::vector<PendingRow> rows;
    std::vector<std::pair<std::string, double>> objective;
    std::vector<std::string> binaries;

    // Terms are "[sign] coef name" groups; returns true once a sense and rhs closed the row.
    auto read_terms = [](std::istringstream &in, std::vector<std::pair<std::string, double>> &terms, PendingRow *row, int line) {
        std::string tok;
        double sign = 1.0;
        double coef = 1.0;
        bool have_coef = false;
        while (in >> tok) {
            if (tok == "+" || tok == "-") {
                sign = tok == "-" ? -1.0 : 1.0;
            }
            else if (tok == "<=" || tok == ">=" || tok == "=" || tok == "=<" || tok == "=>") {
                if (!row) throw std::runtime_error("LP line " + std::to_string(line) + ": sense in objective");
                row->sense = tok == "=" ? Sense::Equal : (tok[0] == '<' || tok[1] == '<') ? Sense::LessEqual : Sense::GreaterEqual;
                std::string rhs;
                if (!(in >> rhs)) throw std::runtime_error("LP line " + std::to_string(line) + ": missing right-hand side");
                row->rhs = parse_number(rhs, line);
                row->closed = true;
                return;
            }
            else if (is_number(tok)) {
                coef = parse_number(tok, line);
                have_coef = true;
            }
            else {
                terms.emplace_back(tok, sign * (have_coef ? coef : 1.0));
                sign = 1.0;
                coef = 1.0;
                have_coef = false;
            }
        }
    };

    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.rfind("\\", 0) == 0) {
            std::istringstream in(raw.substr(1));
            std::string tag;
            in >> tag;
            std::string kv;
            if (tag == "synchro") {
                while (in >> kv) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = kv.substr(0, eq);
                    const double val = parse_number(kv.substr(eq + 1), line_no);
                    if (key == "model") cs.model = parse_model(static_cast<int>(val));
                    else if (key == "n") cs.n = static_cast<int>(val);
                    else if (key == "sprayers") cs.numSp = static_cast<int>(val);
                    else if (key == "trips") cs.K = static_cast<int>(val);
                    else if (key == "Qs") cs.Qs = val;
                    else if (key == "Qt") cs.Qt = val;
                    else if (key == "Mtime") cs.bigM_time = val;
                    else if (key == "Mqty") cs.bigM_qty = val;
                }
                cs.service.assign(static_cast<std::size_t>(cs.n) + 1, 0.0);
            }
            else if (tag == "service") {
                while (in >> kv) {
                    const auto colon = kv.find(':');
                    const int id = std::stoi(kv.substr(0, colon));
                    if (id < 1 || id > cs.n) throw std::runtime_error("LP line " + std::to_string(line_no) + ": bad service entry");
                    cs.service[static_cast<std::size_t>(id)] = parse_number(kv.substr(colon + 1), line_no);
                }
            }
            continue;
        }
        std::string trimmed = raw;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty()) continue;
        const std::string key = lower(trimmed);
        if (key == "minimize" || key == "min") {
            section = Section::Objective;
            continue;
        }
        if (key == "subject to" || key == "st" || key == "s.t.") {
            section = Section::Rows;
            continue;
        }
        if (key == "bounds") {
            section = Section::Bounds;
            continue;
        }
        if (key == "binaries" || key == "binary") {
            section = Section::Binaries;
            continue;
        }
        if (key == "end") {
            section = Section::Done;
            continue;
        }

        std::istringstream in(trimmed);
        switch (section) {
        case Section::Objective: {
            if (trimmed.rfind("obj:", 0) == 0) in.seekg(4);
            read_terms(in, objective, nullptr, line_no);
            break;
        }
        case Section::Rows: {
            const auto colon = trimmed.find(':');
            if (rows.empty() || rows.back().closed) {
                if (colon == std::string::npos) throw std::runtime_error("LP line " + std::to_string(line_no) + ": unnamed row");
                rows.push_back({trimmed.substr(0, colon), {}, Sense::Equal, 0.0, false});
                in.seekg(static_cast<std::streamoff>(colon + 1));
            }
            read_terms(in, rows.back().terms, &rows.back(), line_no);
            break;
        }
        case Section::Bounds: {
            std::vector<std::string> tok;
            std::string t;
            while (in >> t) tok.push_back(t);
            double lo = 0.0, up = kInf;
            std::string name;
            if (tok.size() == 5 && tok[1] == "<=" && tok[3] == "<=") {
                lo = parse_number(tok[0], line_no);
                name = tok[2];
                up = parse_number(tok[4], line_no);
            }
            else if (tok.size() == 3 && tok[1] == "=") {
                name = tok[0];
                lo = up = parse_number(tok[2], line_no);
            }
            else if (tok.size() == 3 && tok[1] == ">=") {
                name = tok[0];
                lo = parse_number(tok[2], line_no);
            }
            else if (tok.size() == 3 && tok[1] == "<=") {
                name = tok[0];
                up = parse_number(tok[2], line_no);
            }
            else {
                throw std::runtime_error("LP line " + std::to_string(line_no) + ": unsupported bound '" + trimmed + "'");
            }
            cs.add_var(name, VarType::Continuous, lo, up);
            break;
        }
        case Section::Binaries: {
            std::string t;
            while (in >> t) binaries.push_back(t);
            break;
        }
        case Section::None:
        case Section::Done: throw std::runtime_error("LP line " + std::to_string(line_no) + ": text outside any section");
        }
    }
    if (section != Section::Done) throw std::runtime_error("LP text has no End");

    auto lookup = [&](const std::string &name) {
        if (!cs.has_var(name)) throw std::runtime_error("LP references undeclared variable " + name);
        return cs.var(name);
    };
    for (const std::string &b : binaries) cs.vars[static_cast<std::size_t>(lookup(b))].type = VarType::Binary;
    for (const auto &[name, coef] : objective) cs.objective.push_back({lookup(name), coef});
    for (PendingRow &p : rows) {
        if (!p.closed) throw std::runtime_error("LP row " + p.name + " has no sense");
        Row r;
        r.name = p.name;
        r.family = row_family(p.name);
        for (const auto &[name, coef] : p.terms) r.terms.push_back({lookup(name), coef});
        r.sense = p.sense;
        r.rhs = p.rhs;
        cs.rows.push_back(std::move(r));
    }
    return cs;
}

ConstraintSystem read_lp(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_lp(text.str());
}

int AssignmentCertificate::violation_count() const
{
    int count = 0;
    for (const FamilyReport &f : families) count += static_cast<int>(f.violated.size());
    return count;
}

const FamilyReport *AssignmentCertificate::family(const std::string &name) const
{
    for (const FamilyReport &f : families) {
        if (f.family == name) return &f;
    }
    return nullptr;
}

std::vector<double> assignment_from_solution(const ConstraintSystem &cs, const Solution &sol)
{
    const int n = cs.n, E = n + 1;
    if (sol.timeline.size() != static_cast<std::size_t>(n) + 1) throw std::invalid_argument("solution does not match the model size");
    std::vector<double> val(cs.vars.size(), 0.0);
    auto set = [&](const std::string &name, double value) { val[static_cast<std::size_t>(cs.var(name))] = value; };

    std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
    for (const Route &route : sol.routes) {
        int prev = 0;
        for (int i : route) {
            if (i < 1 || i > n) throw std::invalid_argument("route contains unknown node " + std::to_string(i));
            ++seen[static_cast<std::size_t>(i)];
            set(name3("x", prev, i), 1.0);
            prev = i;
        }
        set(name3("x", prev, E), 1.0);
    }
    for (int i = 1; i <= n; ++i) {
        if (seen[static_cast<std::size_t>(i)] == 0) throw std::invalid_argument("node " + std::to_string(i) + " is not routed");
        const NodeRecord &rec = sol.timeline[static_cast<std::size_t>(i)];
        set(name2("y", i), rec.arrival);
        set(name2("a", i), rec.arrival);
        set(name2("m", i), rec.wait);
        set(name2("v", i), rec.quantity);
        set(name2("l", i), rec.level);
        set(name2("delta", i), rec.refill ? 1.0 : 0.0);
        for (int k = 1; k <= cs.K; ++k) {
            set(name3("w", i, k), rec.arrival + cs.service[static_cast<std::size_t>(i)]);
            set(name3("h", i, k), cs.Qt);
        }
    }
    for (int k = 1; k <= cs.K; ++k) set(name3("h", 0, k), cs.Qt);

    const int used = static_cast<int>(sol.trips.size());
    for (int k = 1; k <= used; ++k) {
        const TankerTrip &trip = sol.trips[static_cast<std::size_t>(k - 1)];
        set(name3("theta", 0, k), trip.departure);
        set(name3("theta", E, k), trip.return_time);
        int prev = 0;
        for (const TankerStop &stop : trip.stops) {
            set(name4("g", prev, stop.node, k), 1.0);
            set(name3("theta", stop.node, k), stop.arrival);
            set(name3("w", stop.node, k), stop.refill_start);
            set(name3("h", stop.node, k), stop.level);
            prev = stop.node;
        }
        set(name4("g", prev, E, k), 1.0);
        if (k < used) set(name3("z", k, k + 1), 1.0);
    }
    if (cs.model == Model::Model2) set("alpha", sol.objective.makespan);
    return val;
}

AssignmentCertificate certify(const ConstraintSystem &cs, const std::vector<double> &values)
{
    AssignmentCertificate cert;
    auto report = [&](const std::string &family) -> FamilyReport & {
        for (FamilyReport &f : cert.families) {
            if (f.family == family) return f;
        }
        cert.families.push_back({family, 0, {}});
        return cert.families.back();
    };
    for (const Row &row : cs.rows) {
        double lhs = 0.0;
        for (const Term &term : row.terms) lhs += term.coef * values[static_cast<std::size_t>(term.var)];
        double slack = 0.0;
        switch (row.sense) {
        case Sense::LessEqual: slack = row.rhs - lhs; break;
        case Sense::GreaterEqual: slack = lhs - row.rhs; break;
        case Sense::Equal: slack = -std::abs(lhs - row.rhs); break;
        }
        FamilyReport &f = report(row.family);
        if (slack < -kRowTol) {
            f.violated.push_back({row.name, slack});
        }
        else {
            ++f.satisfied;
        }
    }
    // Bound and integrality checks, filed under the family the variable belongs to.
    for (std::size_t k = 0; k < cs.vars.size(); ++k) {
        const Variable &v = cs.vars[k];
        const double value = values[k];
        const std::string prefix = row_family(v.name);
        const std::string family = prefix == "m" ? "waiting" : prefix == "l" ? "sprayer_level" : prefix == "h" ? "tanker_level" : "domain";
        FamilyReport &f = report(family);
        double slack = std::min(value - v.lower, v.upper - value);
        const double fraction = std::abs(value - std::round(value));
        if (v.type == VarType::Binary && fraction > kRowTol) slack = std::min(slack, -fraction);
        if (slack < -kRowTol) {
            f.violated.push_back({"bound:" + v.name, slack});
        }
        else {
            ++f.satisfied;
        }
    }
    for (const Term &term : cs.objective) cert.objective += term.coef * values[static_cast<std::size_t>(term.var)];
    return cert;
}

AssignmentCertificate validate_solution(const ConstraintSystem &cs, const Solution &sol)
{
    const double reported = objective_value(sol.objective, cs.model);
    if (static_cast<int>(sol.trips.size()) > cs.K) {
        AssignmentCertificate cert;
        cert.families.push_back({"trip_budget", 0, {{"trip_budget", static_cast<double>(cs.K) - static_cast<double>(sol.trips.size())}}});
        cert.reported_objective = reported;
        cert.objective = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    AssignmentCertificate cert = certify(cs, assignment_from_solution(cs, sol));
    cert.reported_objective = reported;
    cert.objective_matches = std::abs(cert.objective - reported) <= 1e-6;
    return cert;
}

std::string certificate_summary(const AssignmentCertificate &cert)
{
    std::ostringstream out;
    for (const FamilyReport &f : cert.families) {
        out << f.family << ": " << f.satisfied << " satisfied, " << f.violated.size() << " violated\n";
        for (std::size_t k = 0; k < f.violated.size() && k < 5; ++k) {
            out << "  " << f.violated[k].row << " slack " << num(f.violated[k].slack) << "\n";
        }
    }
    out << "objective " << num(cert.objective) << " (solution reports " << num(cert.reported_objective) << ")"
        << (cert.objective_matches ? "" : " MISMATCH") << "\n";
    return out.str();
}

}  // namespace synchro
