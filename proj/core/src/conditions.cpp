#include "srkweak/conditions.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace srkw {

std::string pattern_string(const CorrelationPattern& p) {
    std::string out;
    for (int b = 0; b < block_count(p); ++b) {
        out += '{';
        bool first = true;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] != b) continue;
            out += (first ? "j" : ",j") + std::to_string(i + 1);
            first = false;
        }
        out += '}';
    }
    return out.empty() ? "-" : out;
}

namespace {

Rational power_of_two(int n) { return rational_pow(Rational(2), n); }

Rational exact_factor(std::uint64_t alpha, int s, int rho_halves) {
    if (alpha == 0) return 0;
    Rational f(static_cast<unsigned long>(alpha));
    return f / (power_of_two(s / 2) * factorial(rho_halves / 2));
}

Rational method_factor(std::uint64_t alpha_delta, std::uint64_t beta, std::uint64_t gamma, int l) {
    Rational f(static_cast<unsigned long>(alpha_delta));
    f *= Rational(static_cast<unsigned long>(beta));
    f *= Rational(static_cast<unsigned long>(gamma));
    return f / factorial(l - 1);
}

/// Coefficient of h^rho in E(Phi_S); rejects any other power.
Rational expected_weight(const Node& concrete, int rho_halves, const ConcreteScheme& sc, const std::string& label) {
    HalfPowerPoly e;
    try {
        e = sc.model().expect(phi_s(concrete, sc));
    } catch (const std::exception& ex) {
        throw EvaluationError("evaluating " + label + ": " + ex.what());
    }
    for (const auto& [k, c] : e.terms())
        if (k.h_halves != rho_halves)
            throw EvaluationError("E(Phi_S) of " + label + " carries h^(" + std::to_string(k.h_halves) +
                                  "/2), expected only h^(" + std::to_string(rho_halves) + "/2)");
    return e.coefficient(rho_halves);
}

void add_side_conditions(VerificationReport& rep, const ConcreteScheme& sc, int p) {
    const auto moments = check_moment_condition(sc.model(), 2 * p + 1);
    for (const auto& r : moments.records) {
        if (r.pass) continue;
        ConditionRecord rec;
        rec.kind = RecordKind::moment;
        std::string mono;
        for (auto [id, pw] : r.monomial)
            mono += (mono.empty() ? "" : "*") + sc.model().thetas()[id].label() + (pw > 1 ? "^" + std::to_string(pw) : "");
        rec.tree = mono;
        rec.pattern = "moment";
        rec.rho_halves = r.total_power;
        rec.lhs = Rational(r.total_power, 2);
        rec.rhs = Rational(r.lowest_halves.value_or(0), 2);
        rec.residual = rec.rhs - rec.lhs;
        rec.satisfied = false;
        rep.records.push_back(rec);
    }
    if (moments.pass) {
        ConditionRecord rec;
        rec.kind = RecordKind::moment;
        rec.tree = "all theta monomials up to power " + std::to_string(2 * p + 1);
        rec.pattern = "moment";
        rep.records.push_back(rec);
    }
    for (std::size_t f = 1; f < sc.families().size(); ++f) {
        HalfPowerPoly sum;
        for (const auto& z : sc.z(static_cast<int>(f))) sum += z;
        auto e = sc.model().expect(sum);
        ConditionRecord rec;
        rec.kind = RecordKind::bounded;
        rec.tree = "z" + sc.families()[f].to_string();
        rec.pattern = "bounded";
        rec.lhs = 0;
        Rational total = 0;
        for (const auto& [k, c] : e.terms()) total += abs(c);
        rec.rhs = total;
        rec.residual = total;
        rec.satisfied = e.is_zero();
        rep.records.push_back(rec);
    }
}

}  // namespace

std::vector<OrderCondition> generate_conditions(Calculus calculus, int p, int m) {
    if (p < 0 || m < 1) throw std::invalid_argument("order must be >= 0 and m >= 1");
    const int max_halves = 2 * p + 1;
    const auto star = correlated_star_alpha(2 * p);
    std::vector<OrderCondition> out;
    for (const auto& u : enumerate_ts_delta(max_halves)) {
        const auto parts = set_partitions(u.tree.n());
        std::vector<ColoredTree> correlated;
        std::map<ColoredTree, std::uint64_t> realizations;
        for (const auto& q : parts) {
            correlated.push_back(correlate(u.tree, q));
            ++realizations[correlated.back()];
        }
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (block_count(parts[i]) > m) continue;
            OrderCondition c;
            c.delta_tree = u.tree;
            c.pattern = parts[i];
            c.correlated = correlated[i];
            c.calculus = calculus;
            auto it = star.find(c.correlated);
            if (it != star.end()) c.alpha_star = calculus == Calculus::ito ? it->second.ito : it->second.strat;
            c.alpha_delta = u.alpha_delta;
            c.beta = realizations[c.correlated];
            c.gamma = u.tree.gamma_density();
            c.lhs = exact_factor(c.alpha_star, u.tree.s(), u.tree.rho_halves());
            c.rhs_factor = method_factor(c.alpha_delta, c.beta, c.gamma, u.tree.l());
            out.push_back(std::move(c));
        }
    }
    return out;
}

VerificationReport verify_tableau(const Tableau& tab, Calculus calculus, int p, int m) {
    VerificationReport rep{tab.name, calculus, p, m, {}};
    const ConcreteScheme sc(tab, m);
    std::map<ColoredTree, Rational> cache;
    for (const auto& c : generate_conditions(calculus, p, m)) {
        auto it = cache.find(c.correlated);
        if (it == cache.end()) {
            Rational e = expected_weight(c.correlated.root(), c.rho_halves(), sc, c.correlated.to_string());
            it = cache.emplace(c.correlated, e).first;
        }
        ConditionRecord rec;
        rec.tree = c.delta_tree.to_string();
        rec.pattern = pattern_string(c.pattern);
        rec.rho_halves = c.rho_halves();
        rec.lhs = c.lhs;
        rec.rhs = c.rhs_factor * it->second;
        rec.residual = rec.rhs - rec.lhs;
        rec.satisfied = rec.residual == 0;
        rep.records.push_back(std::move(rec));
    }
    add_side_conditions(rep, sc, p);
    return rep;
}

std::map<ColoredTree, Rational> exact_coefficients(Calculus calculus, int p, int m) {
    std::map<ColoredTree, Rational> exact;
    for (const auto& t : enumerate_ts_star(calculus, 2 * p)) {
        const std::uint64_t alpha = calculus == Calculus::ito ? t.alpha_ito : t.alpha_strat;
        const Rational f = exact_factor(alpha, t.tree.s(), t.tree.rho_halves());
        const int n = t.tree.n();
        std::vector<int> vals(n, 1);
        for (;;) {
            Node node = t.tree.root();
            auto rec = [&](auto&& self, Node& x) -> void {
                if (x.kind == Kind::sigma) x.index = vals[x.index - 1];
                for (auto& ch : x.children) self(self, ch);
            };
            rec(rec, node);
            exact[canonicalize_concrete(node)] += f;
            int i = 0;
            while (i < n && vals[i] == m) vals[i++] = 1;
            if (i == n) break;
            ++vals[i];
        }
    }
    return exact;
}

VerificationReport concrete_coefficient_check(const Tableau& tab, Calculus calculus, int p, int m) {
    VerificationReport rep{tab.name, calculus, p, m, {}};
    const ConcreteScheme sc(tab, m);
    const auto exact = exact_coefficients(calculus, p, m);

    std::map<ColoredTree, Rational> method;
    for (const auto& u : enumerate_ts_delta(2 * p + 1)) {
        const Rational f = method_factor(u.alpha_delta, 1, u.tree.gamma_density(), u.tree.l());
        const int s = u.tree.s();
        std::vector<int> vals(s, 1);
        for (;;) {
            Node node = u.tree.root();
            auto rec = [&](auto&& self, Node& x) -> void {
                if (x.kind == Kind::sigma) x.index = vals[x.index - 1];
                for (auto& ch : x.children) self(self, ch);
            };
            rec(rec, node);
            method[canonicalize_concrete(node)] += f;
            int i = 0;
            while (i < s && vals[i] == m) vals[i++] = 1;
            if (i == s) break;
            ++vals[i];
        }
    }
    for (const auto& [c, f] : exact)
        if (!method.count(c)) throw EvaluationError("concrete tree " + c.to_string() + " has no method-side shape");

    std::vector<ColoredTree> order;
    for (const auto& [c, f] : method) order.push_back(c);
    std::sort(order.begin(), order.end(), table_less);
    for (const auto& c : order) {
        Rational e = expected_weight(c.root(), c.rho_halves(), sc, c.to_string());
        ConditionRecord rec;
        rec.tree = c.to_string();
        rec.pattern = "concrete";
        rec.rho_halves = c.rho_halves();
        auto it = exact.find(c);
        rec.lhs = it == exact.end() ? Rational(0) : it->second;
        rec.rhs = method.at(c) * e;
        rec.residual = rec.rhs - rec.lhs;
        rec.satisfied = rec.residual == 0;
        rep.records.push_back(std::move(rec));
    }
    add_side_conditions(rep, sc, p);
    return rep;
}

bool VerificationReport::all_satisfied() const {
    return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.satisfied; });
}

const ConditionRecord* VerificationReport::first_failure() const {
    for (const auto& r : records)
        if (!r.satisfied) return &r;
    return nullptr;
}

std::size_t VerificationReport::violations() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.satisfied; }));
}

int VerificationReport::max_order_passed() const {
    for (const auto& r : records)
        if (r.kind != RecordKind::tree && !r.satisfied) return -1;
    for (int q = p; q >= 0; --q) {
        bool ok = std::all_of(records.begin(), records.end(), [&](const auto& r) {
            return r.kind != RecordKind::tree || r.rho_halves > 2 * q + 1 || r.satisfied;
        });
        if (ok) return q;
    }
    return -1;
}

namespace {

std::string rho_text(int halves) {
    return halves % 2 == 0 ? std::to_string(halves / 2) : std::to_string(halves / 2) + ".5";
}

std::string kind_text(RecordKind k) {
    switch (k) {
        case RecordKind::tree: return "tree";
        case RecordKind::moment: return "moment";
        case RecordKind::bounded: return "bounded";
    }
    return {};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace

std::string report_csv(const VerificationReport& rep, bool only_failures) {
    std::ostringstream os;
    os << "tree,pattern,rho,lhs,rhs,residual,verdict\n";
    for (const auto& r : rep.records) {
        if (only_failures && r.satisfied) continue;
        os << csv_field(r.tree) << ',' << csv_field(r.pattern) << ','
           << (r.kind == RecordKind::tree ? rho_text(r.rho_halves) : kind_text(r.kind)) << ',' << to_string(r.lhs)
           << ',' << to_string(r.rhs) << ',' << to_string(r.residual) << ',' << (r.satisfied ? "ok" : "VIOLATED")
           << '\n';
    }
    return os.str();
}

std::string report_text(const VerificationReport& rep, bool only_failures) {
    std::ostringstream os;
    os << rep.scheme << " (" << to_string(rep.calculus) << ", p=" << rep.p << ", m=" << rep.m << "): "
       << rep.records.size() << " conditions, " << rep.violations() << " violated, max order passed "
       << rep.max_order_passed() << '\n';
    std::size_t w = 4;
    for (const auto& r : rep.records) w = std::max(w, r.tree.size());
    for (const auto& r : rep.records) {
        if (only_failures && r.satisfied) continue;
        os << "  " << (r.satisfied ? "ok       " : "VIOLATED ") << r.tree << std::string(w - r.tree.size() + 2, ' ')
           << r.pattern << "  lhs=" << to_string(r.lhs) << " rhs=" << to_string(r.rhs) << '\n';
    }
    return os.str();
}

std::string conditions_csv(const std::vector<OrderCondition>& conds) {
    std::ostringstream os;
    os << "tree,pattern,correlated,rho,alpha_star,alpha_delta,beta,gamma,lhs,rhs_factor,target,homogeneous\n";
    for (const auto& c : conds) {
        os << csv_field(c.delta_tree.to_string()) << ',' << csv_field(pattern_string(c.pattern)) << ','
           << csv_field(c.correlated.to_string()) << ',' << rho_text(c.rho_halves()) << ',' << c.alpha_star << ','
           << c.alpha_delta << ',' << c.beta << ',' << c.gamma << ',' << to_string(c.lhs) << ','
           << to_string(c.rhs_factor) << ',' << to_string(c.target()) << ',' << (c.homogeneous() ? "yes" : "no")
           << '\n';
    }
    return os.str();
}

}  // namespace srkw
