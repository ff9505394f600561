#pragma once

#include "srkweak/rvmodel.hpp"
#include "srkweak/trees.hpp"

#include <map>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

namespace srkw {

class SchemeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stage family pattern: empty for (0,0); otherwise noise-index symbol first,
/// then the symbols of the multi-index. "(k,k)" ties nu to k.
struct FamilyPattern {
    std::vector<std::string> syms;
    bool deterministic() const { return syms.empty(); }
    std::string to_string() const;
    static FamilyPattern parse(const std::string& text);
    friend bool operator==(const FamilyPattern&, const FamilyPattern&) = default;
};

/// Reference to a theta family with symbolic arguments, e.g. J(k,l).
struct ThetaRef {
    std::string name;
    std::vector<std::string> args;
    std::string to_string() const;
    static ThetaRef parse(const std::string& text);
    friend bool operator==(const ThetaRef&, const ThetaRef&) = default;
};

using RMatrix = std::vector<std::vector<Rational>>;

struct VectorRule {
    ThetaRef theta;
    FamilyPattern family;
    std::string when;
    std::vector<Rational> values;
    friend bool operator==(const VectorRule&, const VectorRule&) = default;
};

/// A rules carry no theta (the factor is h); B rules name one.
struct MatrixRule {
    ThetaRef theta;
    FamilyPattern row;
    FamilyPattern col;
    std::string when;
    RMatrix matrix;
    friend bool operator==(const MatrixRule&, const MatrixRule&) = default;
};

struct Tableau {
    std::string name;
    std::string description;
    Calculus calculus = Calculus::ito;
    int order = 1;
    int stages = 1;
    std::vector<FamilyPattern> families;
    std::vector<Rational> alpha;
    std::vector<MatrixRule> A;
    std::vector<MatrixRule> B;
    std::vector<VectorRule> gamma;
    RVModelSpec model;

    /// Pads vectors and matrices to the stage count; checks shapes.
    void normalize();
    bool is_explicit() const;
    friend bool operator==(const Tableau&, const Tableau&);
};

struct Family {
    int k = 0;  // 0 for the deterministic family
    std::vector<int> nu;
    std::string to_string() const;
    friend auto operator<=>(const Family&, const Family&) = default;
};

struct SparseEntry {
    int i, j;
    HalfPowerPoly value;
};

/// Tableau and model instantiated for noise dimension m, with z and Z
/// assembled as symbolic polynomials.
class ConcreteScheme {
public:
    ConcreteScheme(const Tableau& tab, int m);

    const Tableau& tableau() const { return tab_; }
    const ConcreteModel& model() const { return model_; }
    int m() const { return m_; }
    int stages() const { return tab_.stages; }
    const std::vector<Family>& families() const { return families_; }
    /// Families (k, nu) for a noise index k.
    const std::vector<int>& families_of(int k) const { return by_k_.at(k); }

    const std::vector<HalfPowerPoly>& z(int family) const { return z_[family]; }
    /// Nonzero entries of Z^{row,col}; empty when the block vanishes.
    const std::vector<SparseEntry>& Z(int row, int col) const;
    const std::vector<Rational>& c(int family) const { return c_[family]; }

    /// Numeric coefficient pieces for simulation: theta id and rational.
    struct Piece {
        int theta;
        Rational coef;
    };
    const std::map<int, std::vector<Piece>>& z_pieces(int family) const { return zp_[family]; }
    const std::map<std::tuple<int, int, int, int>, std::vector<Piece>>& Z_pieces() const { return Zp_; }

private:
    Tableau tab_;
    int m_;
    ConcreteModel model_;
    std::vector<Family> families_;
    std::map<int, std::vector<int>> by_k_;
    std::vector<std::vector<HalfPowerPoly>> z_;
    std::map<std::pair<int, int>, std::vector<SparseEntry>> Z_;
    std::vector<std::vector<Rational>> c_;
    std::vector<std::map<int, std::vector<Piece>>> zp_;
    std::map<std::tuple<int, int, int, int>, std::vector<Piece>> Zp_;  // (row, col, i, j)
};

/// Elementary weight of a concrete-index tree with a gamma root.
HalfPowerPoly phi_s(const ColoredTree& t, const ConcreteScheme& scheme);
HalfPowerPoly phi_s(const Node& t, const ConcreteScheme& scheme);

// Scheme files.
Tableau tableau_from_json(const std::string& text);
std::string tableau_to_json(const Tableau& tab);
Tableau load_tableau_file(const std::string& path);
/// Built-in name (ri1wm, rs1wm, euler, euler3) or a JSON file path.
Tableau load_scheme(const std::string& name_or_path);
std::vector<std::string> builtin_scheme_names();

Tableau ri1wm();
Tableau rs1wm();
Tableau euler_maruyama(bool three_point = false);

/// Human-readable Butcher-style listing.
std::string describe(const Tableau& tab);

}  // namespace srkw
