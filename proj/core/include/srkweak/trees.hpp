#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srkw {

enum class Kind : std::uint8_t { root, tau, sigma };

enum class Calculus : std::uint8_t { ito, strat };

Calculus parse_calculus(std::string_view text);
const char* to_string(Calculus c);

/// Plain recursive tree value. For sigma nodes `index` is an index-class id
/// (abstract trees) or a concrete noise index (concrete trees); 0 elsewhere.
struct Node {
    Kind kind = Kind::root;
    int index = 0;
    std::vector<Node> children;
};

class TreeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Monotonically labelled tree. Labels are 0-based here: label 0 is the root
/// and parent[i] < i for i >= 1 (parent[0] is ignored).
struct LabelledTree {
    std::vector<int> parent;
    std::vector<Kind> kind;
    std::vector<int> index;

    std::size_t size() const { return kind.size(); }
    void validate() const;
    Node to_node() const;
    static LabelledTree from_node(const Node& n);
};

/// Canonical representative of a tree class. Immutable after construction.
class ColoredTree {
public:
    ColoredTree() = default;

    const Node& root() const { return root_; }
    const std::vector<int>& key() const { return key_; }
    bool concrete() const { return concrete_; }

    int l() const { return l_; }
    int d() const { return d_; }
    int s() const { return s_; }
    /// Number of distinct index classes (or distinct concrete indices).
    int n() const { return n_; }
    int rho_halves() const { return d_ * 2 + s_; }
    double rho() const { return rho_halves() / 2.0; }
    std::uint64_t gamma_density() const { return gamma_; }

    std::string to_string() const;

    friend bool operator==(const ColoredTree& a, const ColoredTree& b) { return a.key_ == b.key_; }
    friend auto operator<=>(const ColoredTree& a, const ColoredTree& b) { return a.key_ <=> b.key_; }

private:
    friend ColoredTree make_tree(Node root, bool concrete);
    Node root_;
    std::vector<int> key_;
    bool concrete_ = false;
    int l_ = 0, d_ = 0, s_ = 0, n_ = 0;
    std::uint64_t gamma_ = 1;
};

/// Abstract canonical form: children sorted, index classes renamed to first
/// appearance in the canonical traversal.
ColoredTree canonicalize(const Node& n);
ColoredTree canonicalize(const LabelledTree& t);

/// Concrete canonical form: children sorted, indices kept as given.
ColoredTree canonicalize_concrete(const Node& n);

/// Tree-order comparison used for tables: by rho, then canonical key.
bool table_less(const ColoredTree& a, const ColoredTree& b);

/// Bracket notation. Accepts g/γ, t/τ, s_jK/σ_jK (index variables) and
/// s_K (concrete indices); "(..)", "[..]", "{..}_jK".
Node parse_node(std::string_view text);
ColoredTree parse_tree(std::string_view text);
std::string to_bracket(const Node& n, bool concrete);

std::uint64_t gamma_density(const Node& n);

struct TreeTableEntry {
    ColoredTree tree;
    std::uint64_t alpha_delta = 0;
    std::uint64_t alpha_ito = 0;
    std::uint64_t alpha_strat = 0;
};

std::vector<TreeTableEntry> enumerate_ts_delta(int max_rho_halves);

/// Classes with nonzero alpha for the calculus. Both alpha columns are filled.
std::vector<TreeTableEntry> enumerate_ts_star(Calculus calculus, int max_rho_halves);

/// Set partition as a restricted growth string: block[i] is the block of index
/// class i+1, blocks numbered 0.. in first-appearance order.
using CorrelationPattern = std::vector<int>;

std::vector<CorrelationPattern> set_partitions(int n);
int block_count(const CorrelationPattern& p);

ColoredTree correlate(const ColoredTree& u, const CorrelationPattern& pattern);

/// Tree with the same shape and every sigma carrying its own index class.
ColoredTree delta_shape(const ColoredTree& t);

/// Number of correlations of the all-distinct shape of t that realize t.
std::uint64_t beta(const ColoredTree& correlated);
std::uint64_t beta(const ColoredTree& t_star, const CorrelationPattern& pattern_on_pairs);

struct StarCounts {
    std::uint64_t ito = 0;
    std::uint64_t strat = 0;
};

/// alpha_* at the correlated level: for every class and every pattern on its
/// pair indices, the correlated canonical form receives the class's counts.
std::map<ColoredTree, StarCounts> correlated_star_alpha(int max_rho_halves);

}  // namespace srkw
