#include "cpsrisk/attack.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace cpsrisk {

AttackNode AttackNode::basic(std::string var, std::string description) {
    AttackNode n;
    n.id = var;
    n.gate = Gate::Basic;
    n.var = std::move(var);
    n.description = std::move(description);
    return n;
}

AttackNode AttackNode::and_(std::string id, std::vector<AttackNode> children) {
    AttackNode n;
    n.id = std::move(id);
    n.gate = Gate::And;
    n.children = std::move(children);
    return n;
}

AttackNode AttackNode::or_(std::string id, std::vector<AttackNode> children) {
    AttackNode n;
    n.id = std::move(id);
    n.gate = Gate::Or;
    n.children = std::move(children);
    return n;
}

double Assignment::at(const std::string& var) const {
    auto it = values.find(var);
    if (it == values.end()) throw UnassignedVariable("no probability assigned to '" + var + "'");
    return it->second;
}

// ---------------------------------------------------------------- Polynomial

Polynomial Polynomial::variable(const std::string& name, bool idempotent) {
    Polynomial p(idempotent);
    p.add_term({{name, 1}}, 1);
    return p;
}

Polynomial Polynomial::constant(long long c, bool idempotent) {
    Polynomial p(idempotent);
    p.add_term({}, c);
    return p;
}

void Polynomial::add_term(Monomial m, long long coeff) {
    if (coeff == 0) return;
    if (idempotent_)
        for (auto& [var, e] : m) e = 1;
    auto [it, inserted] = terms_.emplace(std::move(m), coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    Polynomial out(idempotent_ || rhs.idempotent_);
    for (const auto& [m, c] : terms_) out.add_term(m, c);
    for (const auto& [m, c] : rhs.terms_) out.add_term(m, c);
    return out;
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
    Polynomial out(idempotent_ || rhs.idempotent_);
    for (const auto& [m, c] : terms_) out.add_term(m, c);
    for (const auto& [m, c] : rhs.terms_) out.add_term(m, -c);
    return out;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    Polynomial out(idempotent_ || rhs.idempotent_);
    for (const auto& [ml, cl] : terms_) {
        for (const auto& [mr, cr] : rhs.terms_) {
            Monomial m = ml;
            for (const auto& [var, e] : mr) m[var] += e;
            out.add_term(std::move(m), cl * cr);
        }
    }
    return out;
}

std::set<std::string> Polynomial::variables() const {
    std::set<std::string> vars;
    for (const auto& [m, c] : terms_)
        for (const auto& [var, e] : m) vars.insert(var);
    return vars;
}

double Polynomial::eval(const Assignment& a) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double term = static_cast<double>(c);
        for (const auto& [var, e] : m) term *= std::pow(a.at(var), e);
        sum += term;
    }
    return sum;
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        long long coeff = c;
        if (first) {
            if (coeff < 0) {
                os << "-";
                coeff = -coeff;
            }
        } else {
            os << (coeff < 0 ? " - " : " + ");
            coeff = std::llabs(coeff);
        }
        first = false;
        bool wrote = false;
        if (coeff != 1 || m.empty()) {
            os << coeff;
            wrote = true;
        }
        for (const auto& [var, e] : m) {
            if (wrote) os << "*";
            os << var;
            if (e > 1) os << "^" << e;
            wrote = true;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- evaluation

namespace {

double eval_approx_rec(const AttackNode& n, const Assignment& a) {
    switch (n.gate) {
        case Gate::Basic:
            return a.at(n.var);
        case Gate::Or: {
            double s = 0.0;
            for (const auto& c : n.children) s += eval_approx_rec(c, a);
            return s;
        }
        case Gate::And: {
            double p = 1.0;
            for (const auto& c : n.children) p *= eval_approx_rec(c, a);
            return n.children.empty() ? 1.0 : p;
        }
    }
    return 0.0;
}

void count_vars(const AttackNode& n, std::map<std::string, int>& counts) {
    if (n.gate == Gate::Basic) {
        ++counts[n.var];
        return;
    }
    for (const auto& c : n.children) count_vars(c, counts);
}

// Bottom-up independent-events formula, with some variables pinned to 0/1.
double eval_independent(const AttackNode& n, const Assignment& a,
                        const std::map<std::string, int>& pinned) {
    switch (n.gate) {
        case Gate::Basic: {
            auto it = pinned.find(n.var);
            return it != pinned.end() ? static_cast<double>(it->second) : a.at(n.var);
        }
        case Gate::Or: {
            double none = 1.0;
            for (const auto& c : n.children) none *= 1.0 - eval_independent(c, a, pinned);
            return 1.0 - none;
        }
        case Gate::And: {
            double all = 1.0;
            for (const auto& c : n.children) all *= eval_independent(c, a, pinned);
            return all;
        }
    }
    return 0.0;
}

double shannon(const AttackNode& tree, const Assignment& a,
               std::vector<std::string>& repeated, std::map<std::string, int>& pinned,
               std::size_t next) {
    if (next >= repeated.size()) return eval_independent(tree, a, pinned);
    const std::string& var = repeated[next];
    double p = a.at(var);
    pinned[var] = 1;
    double high = shannon(tree, a, repeated, pinned, next + 1);
    pinned[var] = 0;
    double low = shannon(tree, a, repeated, pinned, next + 1);
    pinned.erase(var);
    return p * high + (1.0 - p) * low;
}

}  // namespace

ApproxResult eval_approx(const AttackNode& tree, const Assignment& a) {
    double v = eval_approx_rec(tree, a);
    return {v, v > 1.0};
}

double eval_exact(const AttackNode& tree, const Assignment& a) {
    std::map<std::string, int> counts;
    count_vars(tree, counts);
    std::vector<std::string> repeated;
    for (const auto& [var, n] : counts) {
        (void)a.at(var);  // demand a full assignment up front
        if (n > 1) repeated.push_back(var);
    }
    if (repeated.size() > 20)
        throw ExactEvalTooLarge("exact evaluation over " + std::to_string(repeated.size()) +
                                " shared variables exceeds the 20-variable Shannon limit");
    std::map<std::string, int> pinned;
    return shannon(tree, a, repeated, pinned, 0);
}

// ------------------------------------------------------------------ symbolic

namespace {

Polynomial symbolic_rec(const AttackNode& n, Semantics sem) {
    const bool idem = sem == Semantics::Exact;
    switch (n.gate) {
        case Gate::Basic:
            return Polynomial::variable(n.var, idem);
        case Gate::Or: {
            if (sem == Semantics::Approx) {
                Polynomial s(false);
                for (const auto& c : n.children) s = s + symbolic_rec(c, sem);
                return s;
            }
            // exact: 1 - prod(1 - child)
            Polynomial none = Polynomial::constant(1, true);
            for (const auto& c : n.children)
                none = none * (Polynomial::constant(1, true) - symbolic_rec(c, sem));
            return Polynomial::constant(1, true) - none;
        }
        case Gate::And: {
            Polynomial p = Polynomial::constant(1, idem);
            for (const auto& c : n.children) p = p * symbolic_rec(c, sem);
            return p;
        }
    }
    return Polynomial(idem);
}

}  // namespace

Polynomial symbolic(const AttackNode& tree, Semantics semantics) {
    return symbolic_rec(tree, semantics);
}

Polynomial substitute(const Polynomial& p, const Bindings& bindings) {
    for (const auto& [var, b] : bindings) {
        if (const auto* alias = std::get_if<std::string>(&b)) {
            if (bindings.count(*alias))
                throw AssumptionConflict("variable '" + *alias +
                                         "' is an alias target and also bound itself");
        }
    }
    Polynomial out(p.idempotent());
    for (const auto& [m, c] : p.terms()) {
        Polynomial::Monomial mapped;
        bool dead = false;
        for (const auto& [var, e] : m) {
            auto it = bindings.find(var);
            if (it == bindings.end()) {
                mapped[var] += e;
            } else if (const auto* fixed = std::get_if<int>(&it->second)) {
                if (*fixed == 0) {
                    dead = true;
                    break;
                }
                // fixed == 1: variable drops out of the monomial
            } else {
                mapped[std::get<std::string>(it->second)] += e;
            }
        }
        if (!dead) out.add_term(std::move(mapped), c);
    }
    return out;
}

Polynomial compose_runaway(const Polynomial& server, const Polynomial& bpcs,
                           const Polynomial& hmi) {
    return server * (bpcs + hmi);
}

// ------------------------------------------------------------------ cut sets

namespace {

using CutSets = std::vector<std::set<std::string>>;

void minimize(CutSets& sets) {
    std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    CutSets kept;
    for (const auto& s : sets) {
        bool redundant = false;
        for (const auto& k : kept) {
            if (std::includes(s.begin(), s.end(), k.begin(), k.end())) {
                redundant = true;
                break;
            }
        }
        if (!redundant && (kept.empty() || kept.back() != s)) kept.push_back(s);
    }
    sets = std::move(kept);
}

CutSets cut_sets_rec(const AttackNode& n) {
    switch (n.gate) {
        case Gate::Basic:
            return {{n.var}};
        case Gate::Or: {
            CutSets all;
            for (const auto& c : n.children) {
                CutSets cs = cut_sets_rec(c);
                all.insert(all.end(), cs.begin(), cs.end());
            }
            minimize(all);
            return all;  // empty OR: no cut set can satisfy it
        }
        case Gate::And: {
            CutSets acc = {{}};  // empty AND is vacuously true
            for (const auto& c : n.children) {
                CutSets cs = cut_sets_rec(c);
                CutSets next;
                for (const auto& lhs : acc) {
                    for (const auto& rhs : cs) {
                        std::set<std::string> u = lhs;
                        u.insert(rhs.begin(), rhs.end());
                        next.push_back(std::move(u));
                    }
                }
                minimize(next);
                acc = std::move(next);
            }
            return acc;
        }
    }
    return {};
}

}  // namespace

std::vector<std::set<std::string>> minimal_cut_sets(const AttackNode& tree) {
    CutSets cs = cut_sets_rec(tree);
    minimize(cs);
    return cs;
}

std::set<std::string> tree_variables(const AttackNode& tree) {
    std::map<std::string, int> counts;
    count_vars(tree, counts);
    std::set<std::string> vars;
    for (const auto& [v, n] : counts) vars.insert(v);
    return vars;
}

}  // namespace cpsrisk
