#pragma once

// AND/OR attack trees over named basic events, with two evaluation semantics:
//   approx — rare-event arithmetic, OR = sum, AND = product (may exceed 1)
//   exact  — probability of the monotone Boolean function under independent
//            basic events; shared variables handled by Shannon expansion
// plus symbolic polynomial expansion, substitution, and minimal cut sets.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cpsrisk/errors.hpp"

namespace cpsrisk {

enum class Gate { And, Or, Basic };

struct AttackNode {
    std::string id;
    Gate gate = Gate::Basic;
    std::vector<AttackNode> children;  // empty iff Basic (degenerate empty gates allowed)
    std::string var;                   // probability variable, Basic only
    std::string description;

    static AttackNode basic(std::string var, std::string description = "");
    static AttackNode and_(std::string id, std::vector<AttackNode> children);
    static AttackNode or_(std::string id, std::vector<AttackNode> children);
};

struct Assignment {
    std::map<std::string, double> values;  // each in [0,1]

    double at(const std::string& var) const;  // throws UnassignedVariable
    bool has(const std::string& var) const { return values.count(var) != 0; }
};

// Canonical multivariate polynomial with integer coefficients. Monomials map
// variable name -> exponent; under idempotent semantics x^k collapses to x
// (the multilinear form used for exact probabilities of 0/1 variables).
class Polynomial {
public:
    using Monomial = std::map<std::string, int>;

    explicit Polynomial(bool idempotent = false) : idempotent_(idempotent) {}
    static Polynomial variable(const std::string& name, bool idempotent = false);
    static Polynomial constant(long long c, bool idempotent = false);

    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial operator-(const Polynomial& rhs) const;
    Polynomial operator*(const Polynomial& rhs) const;
    bool operator==(const Polynomial& rhs) const { return terms_ == rhs.terms_; }
    bool operator!=(const Polynomial& rhs) const { return !(*this == rhs); }

    const std::map<Monomial, long long>& terms() const { return terms_; }
    bool idempotent() const { return idempotent_; }
    bool is_zero() const { return terms_.empty(); }
    std::set<std::string> variables() const;

    double eval(const Assignment& a) const;  // throws UnassignedVariable
    std::string str() const;                 // e.g. "c13*c14 + 2*c5^2"

    void add_term(Monomial m, long long coeff);  // canonicalizes as it goes

private:
    std::map<Monomial, long long> terms_;
    bool idempotent_;
};

// A variable binding: fix to 0, fix to 1, or alias to another variable.
using Binding = std::variant<int, std::string>;
using Bindings = std::map<std::string, Binding>;

struct ApproxResult {
    double value = 0.0;
    bool exceeds_unity = false;  // rare-event sum left unclamped
};

enum class Semantics { Approx, Exact };

ApproxResult eval_approx(const AttackNode& tree, const Assignment& a);
double eval_exact(const AttackNode& tree, const Assignment& a);

Polynomial symbolic(const AttackNode& tree, Semantics semantics);

// Simultaneous substitution; throws AssumptionConflict when an alias target is
// itself bound.
Polynomial substitute(const Polynomial& p, const Bindings& bindings);

// server AND (bpcs OR hmi) under rare-event semantics, expanded.
Polynomial compose_runaway(const Polynomial& server, const Polynomial& bpcs,
                           const Polynomial& hmi);

// All minimal sets of basic events whose joint occurrence makes the root true,
// sorted by size then lexicographically.
std::vector<std::set<std::string>> minimal_cut_sets(const AttackNode& tree);

std::set<std::string> tree_variables(const AttackNode& tree);

}  // namespace cpsrisk
