#include "srkweak/tableau.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace srkw {

namespace {

bool is_number(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_args(const std::string& inner) {
    std::vector<std::string> out;
    std::stringstream ss(inner);
    std::string a;
    while (std::getline(ss, a, ',')) {
        a.erase(std::remove_if(a.begin(), a.end(), [](unsigned char c) { return std::isspace(c); }), a.end());
        if (a.empty()) throw SchemeError("empty argument in '" + inner + "'");
        out.push_back(a);
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

}  // namespace

FamilyPattern FamilyPattern::parse(const std::string& text) {
    std::string t = text;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') throw SchemeError("malformed family pattern '" + text + "'");
    auto syms = split_args(t.substr(1, t.size() - 2));
    if (syms == std::vector<std::string>{"0", "0"}) return {};
    for (const auto& s : syms)
        if (is_number(s)) throw SchemeError("family pattern '" + text + "' must use index symbols");
    return {syms};
}

std::string FamilyPattern::to_string() const { return syms.empty() ? "(0,0)" : "(" + join(syms) + ")"; }

ThetaRef ThetaRef::parse(const std::string& text) {
    std::string t = text;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
    ThetaRef r;
    auto open = t.find('(');
    if (open == std::string::npos) {
        r.name = t;
    } else {
        if (t.back() != ')') throw SchemeError("malformed theta reference '" + text + "'");
        r.name = t.substr(0, open);
        std::string inner = t.substr(open + 1, t.size() - open - 2);
        if (!inner.empty()) r.args = split_args(inner);
    }
    if (r.name.empty()) throw SchemeError("malformed theta reference '" + text + "'");
    return r;
}

std::string ThetaRef::to_string() const { return args.empty() ? name : name + "(" + join(args) + ")"; }

std::string Family::to_string() const {
    if (k == 0) return "(0,0)";
    std::string s = "(" + std::to_string(k);
    for (int v : nu) s += "," + std::to_string(v);
    return s + ")";
}

void Tableau::normalize() {
    if (stages < 1) throw SchemeError("stages must be positive");
    const auto s = static_cast<std::size_t>(stages);
    auto pad_vec = [&](std::vector<Rational>& v, const std::string& what) {
        if (v.size() > s) throw SchemeError(what + " has more than " + std::to_string(s) + " entries");
        v.resize(s, Rational(0));
    };
    auto pad_mat = [&](RMatrix& m, const std::string& what) {
        if (m.size() > s) throw SchemeError(what + " has more than " + std::to_string(s) + " rows");
        m.resize(s);
        for (auto& row : m) pad_vec(row, what + " row");
    };
    pad_vec(alpha, "alpha");
    for (auto& r : A) {
        if (!r.theta.name.empty()) throw SchemeError("A rules take no theta");
        if (!r.col.deterministic()) throw SchemeError("A rules have column family (0,0)");
        pad_mat(r.matrix, "A" + r.row.to_string());
    }
    for (auto& r : B) {
        if (r.theta.name.empty()) throw SchemeError("B rule without theta");
        if (r.col.deterministic()) throw SchemeError("B rules need a stochastic column family");
        pad_mat(r.matrix, "B" + r.row.to_string() + r.col.to_string());
    }
    for (auto& r : gamma) {
        if (r.family.deterministic()) throw SchemeError("gamma rules need a stochastic family");
        pad_vec(r.values, "gamma" + r.family.to_string());
    }
    for (const auto& f : families)
        if (f.deterministic()) throw SchemeError("M lists only stochastic families");
}

bool Tableau::is_explicit() const {
    auto lower = [](const RMatrix& m) {
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i; j < m[i].size(); ++j)
                if (m[i][j] != 0) return false;
        return true;
    };
    return std::all_of(A.begin(), A.end(), [&](const auto& r) { return lower(r.matrix); }) &&
           std::all_of(B.begin(), B.end(), [&](const auto& r) { return lower(r.matrix); });
}

bool operator==(const Tableau& a, const Tableau& b) {
    Tableau x = a, y = b;
    x.normalize();
    y.normalize();
    return x.name == y.name && x.description == y.description && x.calculus == y.calculus && x.order == y.order &&
           x.stages == y.stages && x.families == y.families && x.alpha == y.alpha && x.A == y.A && x.B == y.B &&
           x.gamma == y.gamma && x.model == y.model;
}

// -------------------------------------------------------------- instantiation

namespace {

struct RuleSymbols {
    std::vector<std::string> names;
    void add(const std::vector<std::string>& syms) {
        for (const auto& s : syms)
            if (!is_number(s) && std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
    }
};

template <class F>
void for_each_binding(const std::vector<std::string>& names, int m, F&& f) {
    std::vector<int> v(names.size(), 1);
    for (;;) {
        std::map<std::string, int> b;
        for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = v[i];
        f(b);
        std::size_t i = 0;
        while (i < v.size() && v[i] == m) v[i++] = 1;
        if (i == v.size()) return;
        ++v[i];
    }
}

std::vector<int> resolve(const std::vector<std::string>& syms, const std::map<std::string, int>& b) {
    std::vector<int> out;
    for (const auto& s : syms) out.push_back(is_number(s) ? std::stoi(s) : b.at(s));
    return out;
}

}  // namespace

ConcreteScheme::ConcreteScheme(const Tableau& tab, int m) : tab_(tab), m_(m), model_(tab.model, m) {
    tab_.normalize();
    const int s = tab_.stages;

    std::set<Family> fams;
    for (const auto& pat : tab_.families) {
        RuleSymbols rs;
        rs.add(pat.syms);
        for_each_binding(rs.names, m, [&](const auto& b) {
            auto vals = resolve(pat.syms, b);
            fams.insert(Family{vals[0], std::vector<int>(vals.begin() + 1, vals.end())});
        });
    }
    families_.push_back(Family{});
    for (const auto& f : fams) families_.push_back(f);
    for (int k = 1; k <= m; ++k) by_k_[k];
    for (std::size_t i = 1; i < families_.size(); ++i) by_k_[families_[i].k].push_back(static_cast<int>(i));

    auto family_id = [&](const FamilyPattern& p, const std::map<std::string, int>& b,
                         const std::string& rule) -> int {
        if (p.deterministic()) return 0;
        auto vals = resolve(p.syms, b);
        Family f{vals[0], std::vector<int>(vals.begin() + 1, vals.end())};
        auto it = std::find(families_.begin(), families_.end(), f);
        if (it == families_.end())
            throw SchemeError(rule + " targets family " + f.to_string() + " outside the declared set M");
        return static_cast<int>(it - families_.begin());
    };

    // Collect concrete rational blocks per slot, detecting conflicts.
    std::map<int, RMatrix> a_blocks;
    std::map<std::tuple<int, int, int>, RMatrix> b_blocks;
    std::map<std::pair<int, int>, std::vector<Rational>> g_blocks;

    for (const auto& r : tab_.A) {
        RuleSymbols rs;
        rs.add(r.row.syms);
        for_each_binding(rs.names, m, [&](const auto& b) {
            if (!eval_constraint(r.when, b)) return;
            int row = family_id(r.row, b, "A rule");
            auto [it, ins] = a_blocks.try_emplace(row, r.matrix);
            if (!ins && it->second != r.matrix)
                throw SchemeError("conflicting A rules for family " + families_[row].to_string());
        });
    }
    for (const auto& r : tab_.B) {
        RuleSymbols rs;
        rs.add(r.row.syms);
        rs.add(r.col.syms);
        rs.add(r.theta.args);
        for_each_binding(rs.names, m, [&](const auto& b) {
            if (!eval_constraint(r.when, b)) return;
            int row = family_id(r.row, b, "B rule");
            int col = family_id(r.col, b, "B rule");
            int th = model_.theta_id(r.theta.name, resolve(r.theta.args, b));
            auto [it, ins] = b_blocks.try_emplace({row, col, th}, r.matrix);
            if (!ins && it->second != r.matrix)
                throw SchemeError("conflicting B rules for slot " + families_[row].to_string() +
                                  families_[col].to_string() + " theta " + model_.thetas()[th].label());
        });
    }
    for (const auto& r : tab_.gamma) {
        RuleSymbols rs;
        rs.add(r.family.syms);
        rs.add(r.theta.args);
        for_each_binding(rs.names, m, [&](const auto& b) {
            if (!eval_constraint(r.when, b)) return;
            int fam = family_id(r.family, b, "gamma rule");
            int th = model_.theta_id(r.theta.name, resolve(r.theta.args, b));
            auto [it, ins] = g_blocks.try_emplace({fam, th}, r.values);
            if (!ins && it->second != r.values)
                throw SchemeError("conflicting gamma rules for family " + families_[fam].to_string() + " theta " +
                                  model_.thetas()[th].label());
        });
    }

    const int nf = static_cast<int>(families_.size());
    const int hid = model_.h_id();
    const auto& th = model_.thetas();

    z_.assign(nf, std::vector<HalfPowerPoly>(s));
    zp_.assign(nf, {});
    for (int i = 0; i < s; ++i) {
        z_[0][i] = HalfPowerPoly::h_power(2, tab_.alpha[i]);
        if (tab_.alpha[i] != 0) zp_[0][i].push_back({hid, tab_.alpha[i]});
    }
    for (const auto& [key, vec] : g_blocks) {
        auto [fam, t] = key;
        for (int i = 0; i < s; ++i) {
            if (vec[i] == 0) continue;
            z_[fam][i] += th[t].expr * vec[i];
            zp_[fam][i].push_back({t, vec[i]});
        }
    }

    c_.assign(nf, std::vector<Rational>(s, Rational(0)));
    std::map<std::pair<int, int>, std::vector<std::vector<HalfPowerPoly>>> dense;
    auto block = [&](int row, int col) -> auto& {
        auto& d = dense[{row, col}];
        if (d.empty()) d.assign(s, std::vector<HalfPowerPoly>(s));
        return d;
    };
    for (const auto& [row, mat] : a_blocks) {
        auto& d = block(row, 0);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                c_[row][i] += mat[i][j];
                if (mat[i][j] == 0) continue;
                d[i][j] += HalfPowerPoly::h_power(2, mat[i][j]);
                Zp_[{row, 0, i, j}].push_back({hid, mat[i][j]});
            }
    }
    for (const auto& [key, mat] : b_blocks) {
        auto [row, col, t] = key;
        auto& d = block(row, col);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                if (mat[i][j] == 0) continue;
                d[i][j] += th[t].expr * mat[i][j];
                Zp_[{row, col, i, j}].push_back({t, mat[i][j]});
            }
    }
    for (auto& [key, d] : dense) {
        std::vector<SparseEntry> entries;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                if (!d[i][j].is_zero()) entries.push_back({i, j, d[i][j]});
        if (!entries.empty()) Z_[key] = std::move(entries);
    }
}

const std::vector<SparseEntry>& ConcreteScheme::Z(int row, int col) const {
    static const std::vector<SparseEntry> empty;
    auto it = Z_.find({row, col});
    return it == Z_.end() ? empty : it->second;
}

// -------------------------------------------------------------- elementary weight

namespace {

using PolyVec = std::vector<HalfPowerPoly>;

class PhiEvaluator {
public:
    explicit PhiEvaluator(const ConcreteScheme& sc) : sc_(sc), s_(sc.stages()) {}

    HalfPowerPoly root(const Node& t) {
        if (t.kind != Kind::root) throw TreeError("phi_s needs a tree with a gamma root");
        HalfPowerPoly r(Rational(1));
        for (const auto& c : t.children) {
            r = r * weight(c);
            if (r.is_zero()) break;
        }
        return r;
    }

private:
    const ConcreteScheme& sc_;
    int s_;

    void check_index(int k) const {
        if (k < 1 || k > sc_.m())
            throw TreeError("stochastic index " + std::to_string(k) + " outside 1.." + std::to_string(sc_.m()));
    }

    // Component-wise product of Psi^{family}(child) over the node's children.
    PolyVec product(int family, const Node& n) {
        PolyVec v(s_, HalfPowerPoly(Rational(1)));
        for (const auto& c : n.children) {
            auto p = psi(family, c);
            for (int i = 0; i < s_; ++i) v[i] = v[i] * p[i];
        }
        return v;
    }

    PolyVec contract(const std::vector<SparseEntry>& Z, const PolyVec& v) {
        PolyVec out(s_);
        for (const auto& e : Z)
            if (!v[e.j].is_zero()) out[e.i] += e.value * v[e.j];
        return out;
    }

    PolyVec psi(int family, const Node& t) {
        if (t.kind == Kind::tau) {
            const auto& Z = sc_.Z(family, 0);
            if (Z.empty()) return PolyVec(s_);
            return contract(Z, product(0, t));
        }
        check_index(t.index);
        PolyVec out(s_);
        for (int g : sc_.families_of(t.index)) {
            const auto& Z = sc_.Z(family, g);
            if (Z.empty()) continue;
            auto part = contract(Z, product(g, t));
            for (int i = 0; i < s_; ++i) out[i] += part[i];
        }
        return out;
    }

    HalfPowerPoly dot(const PolyVec& z, const PolyVec& v) {
        HalfPowerPoly r;
        for (int i = 0; i < s_; ++i)
            if (!z[i].is_zero()) r += z[i] * v[i];
        return r;
    }

    HalfPowerPoly weight(const Node& t) {
        if (t.kind == Kind::tau) return dot(sc_.z(0), product(0, t));
        if (t.kind != Kind::sigma) throw TreeError("gamma node below the root");
        check_index(t.index);
        HalfPowerPoly r;
        for (int f : sc_.families_of(t.index)) {
            const auto& z = sc_.z(f);
            if (std::all_of(z.begin(), z.end(), [](const auto& p) { return p.is_zero(); })) continue;
            r += dot(z, product(f, t));
        }
        return r;
    }
};

}  // namespace

HalfPowerPoly phi_s(const Node& t, const ConcreteScheme& scheme) { return PhiEvaluator(scheme).root(t); }

HalfPowerPoly phi_s(const ColoredTree& t, const ConcreteScheme& scheme) { return phi_s(t.root(), scheme); }

// ---------------------------------------------------------------- built-ins

namespace {

std::vector<Rational> R(std::initializer_list<const char*> xs) {
    std::vector<Rational> v;
    for (auto x : xs) v.push_back(parse_rational(x));
    return v;
}

MatrixRule arule(const char* row, RMatrix m, const char* when = "") {
    return {{}, FamilyPattern::parse(row), {}, when, std::move(m)};
}

MatrixRule brule(const char* theta, const char* row, const char* col, RMatrix m, const char* when = "") {
    return {ThetaRef::parse(theta), FamilyPattern::parse(row), FamilyPattern::parse(col), when, std::move(m)};
}

VectorRule grule(const char* theta, const char* fam, std::vector<Rational> v, const char* when = "") {
    return {ThetaRef::parse(theta), FamilyPattern::parse(fam), when, std::move(v)};
}

}  // namespace

Tableau ri1wm() {
    Tableau t;
    t.name = "RI1WM";
    t.description = "3-stage explicit SRK, weak order 2 for Ito SDEs";
    t.calculus = Calculus::ito;
    t.order = 2;
    t.stages = 3;
    t.families = {FamilyPattern::parse("(k,l)")};
    t.alpha = R({"1/4", "1/2", "1/4"});
    t.A = {arule("(0,0)", {R({}), R({"2/3"}), R({"-1/3", "1"})}),
           arule("(k,k)", {R({}), R({"1"}), R({"1", "0"})})};
    t.B = {brule("I(r)", "(0,0)", "(r,r)", {R({}), R({"1"}), R({"0", "0"})}),
           brule("sqrth", "(k,k)", "(k,k)", {R({}), R({"1"}), R({"-1", "0"})}),
           brule("sqrth", "(k,l)", "(l,l)", {R({}), R({"1"}), R({"-1", "0"})}, "k!=l")};
    t.gamma = {grule("I(k)", "(k,k)", R({"1/2", "1/4", "1/4"})),
               grule("J(k,k)", "(k,k)", R({"0", "1/2", "-1/2"})),
               grule("I(k)", "(k,l)", R({"-1/2", "1/4", "1/4"}), "k!=l"),
               grule("J(k,l)", "(k,l)", R({"0", "1/2", "-1/2"}), "k!=l")};
    t.model = ri1wm_model();
    t.normalize();
    return t;
}

Tableau rs1wm() {
    Tableau t;
    t.name = "RS1WM";
    t.description = "4-stage explicit SRK, weak order 2 for Stratonovich SDEs (commutative noise)";
    t.calculus = Calculus::strat;
    t.order = 2;
    t.stages = 4;
    t.families = {FamilyPattern::parse("(k,k)")};
    t.alpha = R({"0", "0", "1/2", "1/2"});
    t.A = {arule("(0,0)", {R({}), R({"0"}), R({"1", "0"}), R({"0", "0", "0"})}),
           arule("(k,k)", {R({}), R({"0"}), R({"1", "0"}), R({"1", "0", "0"})})};
    t.B = {brule("I(k)", "(0,0)", "(k,k)", {R({}), R({"0"}), R({"-3/4", "3/4"}), R({"1", "0", "0"})}),
           brule("I(k)", "(k,k)", "(k,k)", {R({}), R({"2/3"}), R({"1/12", "1/4"}), R({"-5/4", "1/4", "2"})}),
           brule("I(l)", "(k,k)", "(l,l)", {R({}), R({"0"}), R({"1/4", "3/4"}), R({"1/4", "3/4", "0"})}, "k!=l")};
    t.gamma = {grule("I(k)", "(k,k)", R({"1/8", "3/8", "3/8", "1/8"}))};
    t.model = rs1wm_model();
    t.normalize();
    return t;
}

Tableau euler_maruyama(bool three_point) {
    Tableau t;
    t.name = three_point ? "Euler3" : "Euler";
    t.description = three_point ? "Euler-Maruyama with three-point increments"
                                : "Euler-Maruyama with two-point increments";
    t.calculus = Calculus::ito;
    t.order = 1;
    t.stages = 1;
    t.families = {FamilyPattern::parse("(k)")};
    t.alpha = R({"1"});
    t.gamma = {grule("I(k)", "(k)", R({"1"}))};
    t.model = euler_model(three_point);
    t.normalize();
    return t;
}

std::vector<std::string> builtin_scheme_names() { return {"ri1wm", "rs1wm", "euler", "euler3"}; }

std::string describe(const Tableau& tab) {
    std::ostringstream os;
    auto vec = [&](const std::vector<Rational>& v) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << to_string(v[i]);
        os << ']';
    };
    auto mat = [&](const RMatrix& m) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            os << "    ";
            vec(std::vector<Rational>(m[i].begin(), m[i].begin() + static_cast<long>(i)));
            os << '\n';
        }
    };
    os << tab.name << ": " << tab.description << '\n';
    os << "  calculus " << to_string(tab.calculus) << ", claimed order " << tab.order << ", stages " << tab.stages
       << ", explicit " << (tab.is_explicit() ? "yes" : "no") << '\n';
    os << "  M:";
    for (const auto& f : tab.families) os << ' ' << f.to_string();
    os << "\n  alpha ";
    vec(tab.alpha);
    os << '\n';
    for (const auto& r : tab.A) {
        os << "  A" << r.row.to_string() << ",(0,0)" << (r.when.empty() ? "" : " when " + r.when) << '\n';
        mat(r.matrix);
    }
    for (const auto& r : tab.B) {
        os << "  B[" << r.theta.to_string() << "]" << r.row.to_string() << "," << r.col.to_string()
           << (r.when.empty() ? "" : " when " + r.when) << '\n';
        mat(r.matrix);
    }
    for (const auto& r : tab.gamma) {
        os << "  gamma[" << r.theta.to_string() << "]" << r.family.to_string()
           << (r.when.empty() ? "" : " when " + r.when) << ' ';
        vec(r.values);
        os << '\n';
    }
    return os.str();
}

}  // namespace srkw
