#pragma once

#include "srkweak/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace srkw {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exponents of primitive symbols, dense by primitive id, trailing zeros trimmed.
using Monomial = std::vector<std::uint8_t>;

struct TermKey {
    int h_halves = 0;
    Monomial mono;
    friend auto operator<=>(const TermKey&, const TermKey&) = default;
};

/// Polynomial in h^(1/2) and primitive random symbols with exact rational
/// coefficients. Primitive symbols stand for h-free standardized variables;
/// all h-dependence is carried by the exponent.
class HalfPowerPoly {
public:
    HalfPowerPoly() = default;
    HalfPowerPoly(const Rational& c);  // NOLINT: implicit constant
    static HalfPowerPoly h_power(int halves, const Rational& c = 1);
    static HalfPowerPoly symbol(int id, int power = 1);

    const std::map<TermKey, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_deterministic() const;
    /// Lowest h exponent in halves; nullopt for the zero polynomial.
    std::optional<int> lowest_halves() const;
    /// Coefficient of h^(halves/2) with no random symbols.
    Rational coefficient(int halves) const;
    int max_symbol() const;

    HalfPowerPoly& operator+=(const HalfPowerPoly& o);
    HalfPowerPoly& operator-=(const HalfPowerPoly& o);
    HalfPowerPoly& operator*=(const Rational& c);
    friend HalfPowerPoly operator+(HalfPowerPoly a, const HalfPowerPoly& b) { return a += b; }
    friend HalfPowerPoly operator-(HalfPowerPoly a, const HalfPowerPoly& b) { return a -= b; }
    friend HalfPowerPoly operator*(const HalfPowerPoly& a, const HalfPowerPoly& b);
    friend HalfPowerPoly operator*(HalfPowerPoly a, const Rational& c) { return a *= c; }
    HalfPowerPoly operator-() const;
    friend bool operator==(const HalfPowerPoly& a, const HalfPowerPoly& b) { return a.terms_ == b.terms_; }

    void add_term(const TermKey& k, const Rational& c);
    /// Multiply by h^(halves/2).
    HalfPowerPoly shifted(int halves) const;

    std::string to_string(const std::vector<std::string>& names = {}) const;

private:
    std::map<TermKey, Rational> terms_;
};

/// coef * sqrt(radical) with radical a squarefree positive integer.
struct Surd {
    Rational coef;
    std::uint64_t radical = 1;
    double to_double() const;
};

Surd make_surd(const Rational& coef, const Rational& radicand);

/// Sum of surds with exact rational result where possible.
class SurdSum {
public:
    void add(const Rational& c, std::uint64_t radical);
    void add(const Surd& s) { add(s.coef, s.radical); }
    /// Returns the rational value; throws ModelError if irrational parts remain.
    Rational rational_value() const;
    const std::map<std::uint64_t, Rational>& parts() const { return parts_; }

private:
    std::map<std::uint64_t, Rational> parts_;
};

Surd surd_mul(const Surd& a, const Surd& b);
Surd surd_pow(const Surd& a, int p);

struct SupportPoint {
    Rational coef;
    Rational radicand{1};
    int h_halves = 0;
    Rational prob;
};

struct PrimitiveFamily {
    std::string name;
    std::vector<std::string> args;
    std::string when;
    std::vector<SupportPoint> support;
};

struct ExprCase {
    std::string when;
    std::string expr;
};

struct SymbolFamily {
    std::string name;
    std::vector<std::string> args;
    std::vector<ExprCase> cases;
};

/// Index-pattern keyed model, independent of the noise dimension.
struct RVModelSpec {
    std::vector<PrimitiveFamily> primitives;
    std::vector<SymbolFamily> derived;
    std::vector<SymbolFamily> theta;

    friend bool operator==(const RVModelSpec&, const RVModelSpec&);
};

struct ConcretePrimitive {
    std::string name;
    std::vector<int> args;
    int h_halves = 0;
    std::vector<Surd> values;
    std::vector<Rational> probs;
};

struct ThetaInstance {
    std::string name;
    std::vector<int> args;
    HalfPowerPoly expr;
    std::string label() const;
};

/// Model instantiated for a concrete noise dimension m.
class ConcreteModel {
public:
    ConcreteModel(const RVModelSpec& spec, int m);

    int m() const { return m_; }
    const std::vector<ConcretePrimitive>& primitives() const { return prims_; }
    const std::vector<ThetaInstance>& thetas() const { return thetas_; }
    /// Id of theta name(args); throws ModelError when absent.
    int theta_id(const std::string& name, const std::vector<int>& args) const;
    std::optional<int> find_theta(const std::string& name, const std::vector<int>& args) const;
    /// Id of the implicit deterministic theta "h".
    int h_id() const { return h_id_; }

    /// Exact moment E(xi^p) of a standardized primitive.
    Rational moment(int prim, int power) const;
    /// Expectation via independence of primitives.
    HalfPowerPoly expect(const HalfPowerPoly& p) const;

    /// Evaluates a named symbol or expression (for tests and tools).
    HalfPowerPoly evaluate(const std::string& expression) const;

    /// Draws one realization of every theta at step size h.
    template <class Rng>
    std::vector<double> sample_theta(double h, Rng& rng) const;

    std::vector<std::string> symbol_names() const;

private:
    int m_;
    RVModelSpec spec_;
    std::vector<ConcretePrimitive> prims_;
    std::map<std::pair<std::string, std::vector<int>>, int> prim_index_;
    std::vector<ThetaInstance> thetas_;
    std::map<std::pair<std::string, std::vector<int>>, int> theta_index_;
    int h_id_ = -1;
    mutable std::map<std::pair<int, int>, Rational> moment_cache_;
    std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();

    friend class ExprEvaluator;
};

/// Integer sampler for a rational distribution; exact probabilities.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<Rational>& probs);
    template <class Rng>
    std::size_t draw(Rng& rng) const {
        std::uint64_t u = uniform_below(rng);
        std::size_t i = 0;
        while (u >= cumulative_[i]) ++i;
        return i;
    }
    std::uint64_t denominator() const { return denom_; }

private:
    template <class Rng>
    std::uint64_t uniform_below(Rng& rng) const {
        // Lemire's nearly divisionless method.
        std::uint64_t x = rng();
        unsigned __int128 mprod = static_cast<unsigned __int128>(x) * denom_;
        std::uint64_t low = static_cast<std::uint64_t>(mprod);
        if (low < denom_) {
            const std::uint64_t threshold = (0 - denom_) % denom_;
            while (low < threshold) {
                x = rng();
                mprod = static_cast<unsigned __int128>(x) * denom_;
                low = static_cast<std::uint64_t>(mprod);
            }
        }
        return static_cast<std::uint64_t>(mprod >> 64);
    }
    std::uint64_t denom_ = 1;
    std::vector<std::uint64_t> cumulative_;
};

/// Numeric evaluation of a polynomial for given standardized primitive values.
double evaluate_numeric(const HalfPowerPoly& p, double h, const std::vector<double>& prim_values);

struct MomentRecord {
    std::vector<std::pair<int, int>> monomial;  // (theta id, power)
    int total_power = 0;
    std::optional<int> lowest_halves;
    bool pass = true;
};

struct MomentReport {
    std::vector<MomentRecord> records;
    bool pass = true;
    const MomentRecord* first_failure() const;
};

/// Moment condition: every theta monomial of total power <= max_total_power has an
/// expectation whose lowest h exponent is at least half the total power.
MomentReport check_moment_condition(const ConcreteModel& model, int max_total_power);

/// Relation list such as "k>l, k!=l"; empty means always true.
bool eval_constraint(const std::string& when, const std::map<std::string, int>& binding);

/// Built-in models.
RVModelSpec ri1wm_model();
RVModelSpec rs1wm_model();
RVModelSpec euler_model(bool three_point);

template <class Rng>
std::vector<double> ConcreteModel::sample_theta(double h, Rng& rng) const {
    if (!(h > 0)) throw ModelError("sample: step size must be positive");
    std::vector<double> vals(prims_.size());
    for (std::size_t i = 0; i < prims_.size(); ++i) {
        DiscreteSampler s(prims_[i].probs);
        vals[i] = prims_[i].values[s.draw(rng)].to_double();
    }
    std::vector<double> out(thetas_.size());
    for (std::size_t i = 0; i < thetas_.size(); ++i) out[i] = evaluate_numeric(thetas_[i].expr, h, vals);
    return out;
}

}  // namespace srkw
