#include "srkweak/trees.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

namespace srkw {

Calculus parse_calculus(std::string_view text) {
    if (text == "ito" || text == "I") return Calculus::ito;
    if (text == "strat" || text == "stratonovich" || text == "S") return Calculus::strat;
    throw std::invalid_argument("unknown calculus '" + std::string(text) + "' (expected ito|strat)");
}

const char* to_string(Calculus c) { return c == Calculus::ito ? "ito" : "strat"; }

namespace {

constexpr int close_token = 0;

int token(const Node& n) {
    switch (n.kind) {
        case Kind::root: return 1;
        case Kind::tau: return 2;
        case Kind::sigma: return 3 + n.index;
    }
    return 0;
}

// Sorts children recursively and returns the node's encoding. Encodings of
// single subtrees are prefix-free, so sorting siblings by encoding yields the
// lexicographically smallest encoding of the whole tree.
std::vector<int> sort_rec(Node& n) {
    std::vector<int> enc{token(n)};
    if (!n.children.empty()) {
        std::vector<std::pair<std::vector<int>, Node>> parts;
        parts.reserve(n.children.size());
        for (auto& c : n.children) {
            auto e = sort_rec(c);
            parts.emplace_back(std::move(e), std::move(c));
        }
        std::sort(parts.begin(), parts.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        n.children.clear();
        for (auto& [e, c] : parts) {
            enc.insert(enc.end(), e.begin(), e.end());
            n.children.push_back(std::move(c));
        }
    }
    enc.push_back(close_token);
    return enc;
}

void encode(const Node& n, std::vector<int>& out) {
    out.push_back(token(n));
    for (const auto& c : n.children) encode(c, out);
    out.push_back(close_token);
}

template <class F>
void for_each_node(Node& n, F&& f) {
    f(n);
    for (auto& c : n.children) for_each_node(c, f);
}

template <class F>
void for_each_node(const Node& n, F&& f) {
    f(n);
    for (const auto& c : n.children) for_each_node(c, f);
}

void renumber_first_appearance(Node& n) {
    std::map<int, int> seen;
    for_each_node(n, [&](Node& x) {
        if (x.kind != Kind::sigma) return;
        auto it = seen.find(x.index);
        if (it == seen.end()) it = seen.emplace(x.index, static_cast<int>(seen.size()) + 1).first;
        x.index = it->second;
    });
}

void number_sigmas_in_order(Node& n) {
    int next = 1;
    for_each_node(n, [&](Node& x) {
        if (x.kind == Kind::sigma) x.index = next++;
    });
}

struct Stats {
    int l = 0, d = 0, s = 0;
    std::uint64_t gamma = 1;
};

Stats stats_rec(const Node& n) {
    Stats st;
    st.l = 1;
    if (n.kind == Kind::tau) st.d = 1;
    if (n.kind == Kind::sigma) st.s = 1;
    std::uint64_t prod = 1;
    for (const auto& c : n.children) {
        auto cs = stats_rec(c);
        st.l += cs.l;
        st.d += cs.d;
        st.s += cs.s;
        prod *= cs.gamma;
    }
    if (n.children.empty()) st.gamma = 1;
    else if (n.kind == Kind::root) st.gamma = prod;
    else st.gamma = static_cast<std::uint64_t>(st.l) * prod;
    return st;
}

}  // namespace

ColoredTree make_tree(Node root, bool concrete) {
    ColoredTree t;
    t.root_ = std::move(root);
    t.concrete_ = concrete;
    encode(t.root_, t.key_);
    auto st = stats_rec(t.root_);
    t.l_ = st.l;
    t.d_ = st.d;
    t.s_ = st.s;
    t.gamma_ = st.gamma;
    std::set<int> ids;
    for_each_node(t.root_, [&](const Node& x) {
        if (x.kind == Kind::sigma) ids.insert(x.index);
    });
    t.n_ = static_cast<int>(ids.size());
    return t;
}

std::uint64_t gamma_density(const Node& n) { return stats_rec(n).gamma; }

ColoredTree canonicalize(const Node& input) {
    Node work = input;
    std::vector<int> ids;
    int s = 0;
    for_each_node(work, [&](const Node& x) {
        if (x.kind != Kind::sigma) return;
        ++s;
        ids.push_back(x.index);
    });
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const int k = static_cast<int>(ids.size());

    if (k == s) {
        // All indices distinct: any renaming is allowed, so the shape decides.
        for_each_node(work, [](Node& x) {
            if (x.kind == Kind::sigma) x.index = 0;
        });
        sort_rec(work);
        number_sigmas_in_order(work);
        return make_tree(std::move(work), false);
    }
    if (k == 1) {
        for_each_node(work, [](Node& x) {
            if (x.kind == Kind::sigma) x.index = 1;
        });
        sort_rec(work);
        return make_tree(std::move(work), false);
    }

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 1);
    std::optional<std::vector<int>> best_key;
    Node best;
    do {
        Node cand = work;
        for_each_node(cand, [&](Node& x) {
            if (x.kind != Kind::sigma) return;
            auto pos = std::lower_bound(ids.begin(), ids.end(), x.index) - ids.begin();
            x.index = perm[pos];
        });
        auto enc = sort_rec(cand);
        if (!best_key || enc < *best_key) {
            best_key = std::move(enc);
            best = std::move(cand);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    renumber_first_appearance(best);
    return make_tree(std::move(best), false);
}

ColoredTree canonicalize(const LabelledTree& t) {
    t.validate();
    return canonicalize(t.to_node());
}

ColoredTree canonicalize_concrete(const Node& input) {
    Node work = input;
    sort_rec(work);
    return make_tree(std::move(work), true);
}

bool table_less(const ColoredTree& a, const ColoredTree& b) {
    if (a.rho_halves() != b.rho_halves()) return a.rho_halves() < b.rho_halves();
    return a.key() < b.key();
}

void LabelledTree::validate() const {
    const auto l = kind.size();
    if (l == 0) throw TreeError("labelled tree is empty");
    if (parent.size() != l || index.size() != l)
        throw TreeError("labelled tree maps have inconsistent sizes");
    for (std::size_t i = 1; i < l; ++i) {
        if (parent[i] < 0 || static_cast<std::size_t>(parent[i]) >= i)
            throw TreeError("parent of label " + std::to_string(i + 1) + " is not a smaller label");
        if (kind[i] == Kind::root) throw TreeError("root color on a non-root label");
    }
}

Node LabelledTree::to_node() const {
    const auto l = kind.size();
    std::vector<Node> nodes(l);
    for (std::size_t i = 0; i < l; ++i) {
        nodes[i].kind = kind[i];
        nodes[i].index = kind[i] == Kind::sigma ? index[i] : 0;
    }
    for (std::size_t i = l; i-- > 1;) {
        auto& kids = nodes[parent[i]].children;
        kids.insert(kids.begin(), std::move(nodes[i]));
    }
    return std::move(nodes[0]);
}

LabelledTree LabelledTree::from_node(const Node& n) {
    LabelledTree t;
    auto rec = [&](auto&& self, const Node& x, int par) -> void {
        int me = static_cast<int>(t.kind.size());
        t.parent.push_back(par);
        t.kind.push_back(x.kind);
        t.index.push_back(x.kind == Kind::sigma ? x.index : 0);
        for (const auto& c : x.children) self(self, c, me);
    };
    rec(rec, n, -1);
    return t;
}

std::string to_bracket(const Node& n, bool concrete) {
    auto idx = [&](int i) { return concrete ? std::to_string(i) : "j" + std::to_string(i); };
    std::string inner;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) inner += ',';
        inner += to_bracket(n.children[i], concrete);
    }
    switch (n.kind) {
        case Kind::root: return n.children.empty() ? "g" : "(" + inner + ")";
        case Kind::tau: return n.children.empty() ? "t" : "[" + inner + "]";
        case Kind::sigma:
            return n.children.empty() ? "s_" + idx(n.index) : "{" + inner + "}_" + idx(n.index);
    }
    return {};
}

std::string ColoredTree::to_string() const { return to_bracket(root_, concrete_); }

namespace {

class BracketParser {
public:
    explicit BracketParser(std::string_view s) : s_(s) {}

    Node parse() {
        skip_ws();
        Node n = node();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return n;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw TreeError("bracket notation: " + what + " at offset " + std::to_string(pos_) +
                        " in '" + std::string(s_) + "'");
    }
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool eat(std::string_view lit) {
        if (s_.substr(pos_, lit.size()) == lit) {
            pos_ += lit.size();
            return true;
        }
        return false;
    }

    int index() {
        if (!eat("_")) fail("expected '_' before index");
        bool braced = eat("{");
        eat("j");
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
        if (start == pos_) fail("expected index digits");
        int v = std::stoi(std::string(s_.substr(start, pos_ - start)));
        if (v < 1) fail("index must be positive");
        if (braced && !eat("}")) fail("expected '}' after index");
        return v;
    }

    std::vector<Node> list(std::string_view close) {
        std::vector<Node> out;
        skip_ws();
        if (eat(close)) return out;
        for (;;) {
            skip_ws();
            out.push_back(node());
            skip_ws();
            if (eat(",")) continue;
            if (eat(close)) return out;
            fail("expected ',' or '" + std::string(close) + "'");
        }
    }

    Node node() {
        Node n;
        if (eat("(")) {
            n.kind = Kind::root;
            n.children = list(")");
        } else if (eat("[")) {
            n.kind = Kind::tau;
            n.children = list("]");
        } else if (eat("{")) {
            n.kind = Kind::sigma;
            n.children = list("}");
            n.index = index();
        } else if (eat("g") || eat("\xCE\xB3")) {
            n.kind = Kind::root;
        } else if (eat("t") || eat("\xCF\x84")) {
            n.kind = Kind::tau;
        } else if (eat("s") || eat("\xCF\x83")) {
            n.kind = Kind::sigma;
            n.index = index();
        } else {
            fail("unexpected character");
        }
        for (const auto& c : n.children)
            if (c.kind == Kind::root) fail("root color below the root");
        return n;
    }
};

}  // namespace

Node parse_node(std::string_view text) { return BracketParser(text).parse(); }

ColoredTree parse_tree(std::string_view text) { return canonicalize(parse_node(text)); }

std::vector<TreeTableEntry> enumerate_ts_delta(int max_rho_halves) {
    std::map<ColoredTree, std::uint64_t> counts;
    LabelledTree lt;
    lt.parent = {-1};
    lt.kind = {Kind::root};
    lt.index = {0};
    auto rec = [&](auto&& self, int halves, int sigmas) -> void {
        ++counts[canonicalize(lt.to_node())];
        const int l = static_cast<int>(lt.size());
        for (int p = 0; p < l; ++p) {
            if (halves + 2 <= max_rho_halves) {
                lt.parent.push_back(p);
                lt.kind.push_back(Kind::tau);
                lt.index.push_back(0);
                self(self, halves + 2, sigmas);
                lt.parent.pop_back();
                lt.kind.pop_back();
                lt.index.pop_back();
            }
            if (halves + 1 <= max_rho_halves) {
                lt.parent.push_back(p);
                lt.kind.push_back(Kind::sigma);
                lt.index.push_back(sigmas + 1);
                self(self, halves + 1, sigmas + 1);
                lt.parent.pop_back();
                lt.kind.pop_back();
                lt.index.pop_back();
            }
        }
    };
    if (max_rho_halves >= 0) rec(rec, 0, 0);

    std::vector<TreeTableEntry> out;
    for (auto& [t, c] : counts) out.push_back({t, c, 0, 0});
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return table_less(a.tree, b.tree); });
    return out;
}

namespace {

std::map<ColoredTree, StarCounts> star_counts(int max_rho_halves) {
    std::map<ColoredTree, StarCounts> counts;
    if (max_rho_halves < 0) return counts;
    LabelledTree lt;
    lt.parent = {-1};
    lt.kind = {Kind::root};
    lt.index = {0};
    auto push = [&](int p, Kind k, int idx) {
        lt.parent.push_back(p);
        lt.kind.push_back(k);
        lt.index.push_back(idx);
    };
    auto pop = [&] {
        lt.parent.pop_back();
        lt.kind.pop_back();
        lt.index.pop_back();
    };
    auto rec = [&](auto&& self, int halves, int pairs, bool ito) -> void {
        auto& c = counts[canonicalize(lt.to_node())];
        ++c.strat;
        if (ito) ++c.ito;
        const int l = static_cast<int>(lt.size());
        if (halves + 2 > max_rho_halves) return;
        for (int p = 0; p < l; ++p) {
            push(p, Kind::tau, 0);
            self(self, halves + 2, pairs, ito);
            pop();
        }
        for (int p1 = 0; p1 < l; ++p1) {
            push(p1, Kind::sigma, pairs + 1);
            for (int p2 = 0; p2 <= l; ++p2) {
                push(p2, Kind::sigma, pairs + 1);
                self(self, halves + 2, pairs + 1, ito && p2 != l);
                pop();
            }
            pop();
        }
    };
    rec(rec, 0, 0, true);
    return counts;
}

}  // namespace

std::vector<TreeTableEntry> enumerate_ts_star(Calculus calculus, int max_rho_halves) {
    std::vector<TreeTableEntry> out;
    for (auto& [t, c] : star_counts(max_rho_halves)) {
        if (calculus == Calculus::ito && c.ito == 0) continue;
        out.push_back({t, 0, c.ito, c.strat});
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return table_less(a.tree, b.tree); });
    return out;
}

std::vector<CorrelationPattern> set_partitions(int n) {
    std::vector<CorrelationPattern> out;
    CorrelationPattern cur(n, 0);
    auto rec = [&](auto&& self, int i, int blocks) -> void {
        if (i == n) {
            out.push_back(cur);
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            cur[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    rec(rec, 0, 0);
    return out;
}

int block_count(const CorrelationPattern& p) {
    int m = 0;
    for (int b : p) m = std::max(m, b + 1);
    return m;
}

ColoredTree correlate(const ColoredTree& u, const CorrelationPattern& pattern) {
    if (static_cast<int>(pattern.size()) != u.n())
        throw TreeError("pattern covers " + std::to_string(pattern.size()) + " index variables, tree has " +
                        std::to_string(u.n()));
    Node work = u.root();
    for_each_node(work, [&](Node& x) {
        if (x.kind != Kind::sigma) return;
        if (x.index < 1 || x.index > static_cast<int>(pattern.size()))
            throw TreeError("pattern references unknown index variable");
        x.index = pattern[x.index - 1] + 1;
    });
    return canonicalize(work);
}

ColoredTree delta_shape(const ColoredTree& t) {
    Node work = t.root();
    number_sigmas_in_order(work);
    return canonicalize(work);
}

std::uint64_t beta(const ColoredTree& correlated) {
    const auto u = delta_shape(correlated);
    std::uint64_t count = 0;
    for (const auto& p : set_partitions(u.n())) {
        if (block_count(p) != correlated.n()) continue;
        if (correlate(u, p) == correlated) ++count;
    }
    return count;
}

std::uint64_t beta(const ColoredTree& t_star, const CorrelationPattern& pattern_on_pairs) {
    if (t_star.s() % 2 != 0) throw TreeError("beta: tree has an odd number of stochastic nodes");
    if (t_star.s() == 0) return 1;
    return beta(correlate(t_star, pattern_on_pairs));
}

std::map<ColoredTree, StarCounts> correlated_star_alpha(int max_rho_halves) {
    std::map<ColoredTree, StarCounts> out;
    for (const auto& [t, c] : star_counts(max_rho_halves)) {
        for (const auto& q : set_partitions(t.n())) {
            auto& slot = out[correlate(t, q)];
            slot.ito += c.ito;
            slot.strat += c.strat;
        }
    }
    return out;
}

}  // namespace srkw
