#pragma once

#include "srkweak/tableau.hpp"
#include "srkweak/trees.hpp"

#include <optional>
#include <string>
#include <vector>

namespace srkw {

/// One weak order condition: for the correlated tree the expectation of the
/// elementary weight must equal `target` times h^rho.
struct OrderCondition {
    ColoredTree delta_tree;
    CorrelationPattern pattern;
    ColoredTree correlated;
    Calculus calculus = Calculus::ito;
    std::uint64_t alpha_star = 0;
    std::uint64_t alpha_delta = 0;
    std::uint64_t beta = 1;
    std::uint64_t gamma = 1;
    /// alpha_* / (2^(s/2) rho!), the exact-side coefficient of h^rho.
    Rational lhs;
    /// alpha_delta * beta * gamma / (l-1)!, the factor in front of E(Phi_S).
    Rational rhs_factor;
    bool homogeneous() const { return alpha_star == 0; }
    /// Required coefficient of h^rho in E(Phi_S).
    Rational target() const { return lhs / rhs_factor; }
    int rho_halves() const { return delta_tree.rho_halves(); }
};

std::string pattern_string(const CorrelationPattern& p);

std::vector<OrderCondition> generate_conditions(Calculus calculus, int p, int m);

enum class RecordKind { tree, moment, bounded };

struct ConditionRecord {
    RecordKind kind = RecordKind::tree;
    std::string tree;
    std::string pattern;
    int rho_halves = 0;
    Rational lhs;
    Rational rhs;
    Rational residual;
    bool satisfied = true;
};

struct VerificationReport {
    std::string scheme;
    Calculus calculus = Calculus::ito;
    int p = 0;
    int m = 0;
    std::vector<ConditionRecord> records;

    bool all_satisfied() const;
    /// Largest q <= p such that every condition needed for order q holds; -1 if none.
    int max_order_passed() const;
    const ConditionRecord* first_failure() const;
    std::size_t violations() const;
};

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pattern mode: every generated condition plus the moment and bounded-weight
/// side conditions, compared in exact arithmetic.
VerificationReport verify_tableau(const Tableau& tab, Calculus calculus, int p, int m);

/// Concrete mode: per concrete-index tree, the exact-solution coefficient
/// against the method coefficient, without going through beta.
VerificationReport concrete_coefficient_check(const Tableau& tab, Calculus calculus, int p, int m);

/// Exact-side coefficient of h^rho for a concrete-index tree (sum over TS(*)
/// classes and index assignments).
std::map<ColoredTree, Rational> exact_coefficients(Calculus calculus, int p, int m);

std::string report_csv(const VerificationReport& rep, bool only_failures = false);
std::string report_text(const VerificationReport& rep, bool only_failures = false);
std::string conditions_csv(const std::vector<OrderCondition>& conds);

}  // namespace srkw
