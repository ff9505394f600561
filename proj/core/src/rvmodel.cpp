#include "srkweak/rvmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace srkw {

Rational parse_rational(std::string_view text) {
    std::string t(text);
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
    if (t.empty()) throw std::invalid_argument("empty rational");
    auto valid = [](const std::string& s) {
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i >= s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    auto slash = t.find('/');
    std::string num = t.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : t.substr(slash + 1);
    if (!valid(num) || !valid(den)) throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    if (num[0] == '+') num.erase(0, 1);
    if (den[0] == '+') den.erase(0, 1);
    mpz_class n(num), d(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational q(n, d);
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

// ---------------------------------------------------------------- polynomial

HalfPowerPoly::HalfPowerPoly(const Rational& c) {
    if (c != 0) terms_.emplace(TermKey{}, c);
}

HalfPowerPoly HalfPowerPoly::h_power(int halves, const Rational& c) {
    HalfPowerPoly p;
    if (c != 0) p.terms_.emplace(TermKey{halves, {}}, c);
    return p;
}

HalfPowerPoly HalfPowerPoly::symbol(int id, int power) {
    HalfPowerPoly p;
    Monomial m(id + 1, 0);
    m[id] = static_cast<std::uint8_t>(power);
    if (power == 0) m.clear();
    p.terms_.emplace(TermKey{0, std::move(m)}, Rational(1));
    return p;
}

bool HalfPowerPoly::is_deterministic() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.mono.empty(); });
}

std::optional<int> HalfPowerPoly::lowest_halves() const {
    std::optional<int> lo;
    for (const auto& [k, c] : terms_)
        if (!lo || k.h_halves < *lo) lo = k.h_halves;
    return lo;
}

Rational HalfPowerPoly::coefficient(int halves) const {
    auto it = terms_.find(TermKey{halves, {}});
    return it == terms_.end() ? Rational(0) : it->second;
}

int HalfPowerPoly::max_symbol() const {
    int m = -1;
    for (const auto& [k, c] : terms_) m = std::max(m, static_cast<int>(k.mono.size()) - 1);
    return m;
}

void HalfPowerPoly::add_term(const TermKey& k, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

HalfPowerPoly& HalfPowerPoly::operator+=(const HalfPowerPoly& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

HalfPowerPoly& HalfPowerPoly::operator-=(const HalfPowerPoly& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
}

HalfPowerPoly& HalfPowerPoly::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, v] : terms_) v *= c;
    return *this;
}

HalfPowerPoly HalfPowerPoly::operator-() const {
    HalfPowerPoly r = *this;
    for (auto& [k, v] : r.terms_) v = -v;
    return r;
}

HalfPowerPoly operator*(const HalfPowerPoly& a, const HalfPowerPoly& b) {
    HalfPowerPoly r;
    if (a.is_zero() || b.is_zero()) return r;
    Rational prod;
    for (const auto& [ka, ca] : a.terms_) {
        for (const auto& [kb, cb] : b.terms_) {
            TermKey k;
            k.h_halves = ka.h_halves + kb.h_halves;
            const auto& big = ka.mono.size() >= kb.mono.size() ? ka.mono : kb.mono;
            const auto& small = ka.mono.size() >= kb.mono.size() ? kb.mono : ka.mono;
            k.mono = big;
            for (std::size_t i = 0; i < small.size(); ++i) {
                int e = k.mono[i] + small[i];
                if (e > 255) throw ModelError("monomial exponent overflow");
                k.mono[i] = static_cast<std::uint8_t>(e);
            }
            prod = ca * cb;
            r.add_term(k, prod);
        }
    }
    return r;
}

HalfPowerPoly HalfPowerPoly::shifted(int halves) const {
    HalfPowerPoly r;
    for (const auto& [k, c] : terms_) r.terms_.emplace(TermKey{k.h_halves + halves, k.mono}, c);
    return r;
}

std::string HalfPowerPoly::to_string(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << srkw::to_string(c);
        if (k.h_halves != 0) {
            if (k.h_halves % 2 == 0) os << "*h^" << k.h_halves / 2;
            else os << "*h^(" << k.h_halves << "/2)";
        }
        for (std::size_t i = 0; i < k.mono.size(); ++i) {
            if (!k.mono[i]) continue;
            os << '*' << (i < names.size() ? names[i] : "x" + std::to_string(i));
            if (k.mono[i] > 1) os << '^' << int(k.mono[i]);
        }
    }
    return os.str();
}

// --------------------------------------------------------------------- surds

double Surd::to_double() const { return coef.get_d() * std::sqrt(static_cast<double>(radical)); }

Surd make_surd(const Rational& coef, const Rational& radicand) {
    if (radicand < 0) throw ModelError("negative radicand");
    if (coef == 0 || radicand == 0) return {Rational(0), 1};
    mpz_class x = radicand.get_num() * radicand.get_den();
    mpz_class square = 1;
    for (unsigned long p = 2; p * p <= x; ++p) {
        if (p > 1000000) throw ModelError("radicand too large to reduce");
        while (mpz_divisible_ui_p(x.get_mpz_t(), p * p)) {
            x /= p * p;
            square *= p;
        }
    }
    if (!x.fits_ulong_p()) throw ModelError("radicand too large");
    Surd s;
    s.coef = coef * Rational(square, radicand.get_den());
    s.coef.canonicalize();
    s.radical = x.get_ui();
    return s;
}

Surd surd_mul(const Surd& a, const Surd& b) {
    std::uint64_t g = std::gcd(a.radical, b.radical);
    Surd r;
    r.coef = a.coef * b.coef * g;
    r.radical = (a.radical / g) * (b.radical / g);
    if (r.coef == 0) r.radical = 1;
    return r;
}

Surd surd_pow(const Surd& a, int p) {
    Surd r{Rational(1), 1};
    if (p == 0) return r;
    r.coef = rational_pow(a.coef, p) * rational_pow(Rational(static_cast<unsigned long>(a.radical)), p / 2);
    r.radical = (p % 2) ? a.radical : 1;
    if (r.coef == 0) r.radical = 1;
    return r;
}

void SurdSum::add(const Rational& c, std::uint64_t radical) {
    if (c == 0) return;
    auto& slot = parts_[radical];
    slot += c;
    if (slot == 0) parts_.erase(radical);
}

Rational SurdSum::rational_value() const {
    for (const auto& [r, c] : parts_)
        if (r != 1) throw ModelError("expectation is not rational (sqrt(" + std::to_string(r) + ") part remains)");
    auto it = parts_.find(1);
    return it == parts_.end() ? Rational(0) : it->second;
}

// ---------------------------------------------------------------- constraints

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

int operand_value(const std::string& tok, const std::map<std::string, int>& binding) {
    if (!tok.empty() && std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
        return std::stoi(tok);
    auto it = binding.find(tok);
    if (it == binding.end()) throw ModelError("constraint references unbound symbol '" + tok + "'");
    return it->second;
}

}  // namespace

bool eval_constraint(const std::string& when, const std::map<std::string, int>& binding) {
    std::stringstream ss(when);
    std::string rel;
    while (std::getline(ss, rel, ',')) {
        rel = trim(rel);
        if (rel.empty()) continue;
        static const char* ops[] = {"!=", ">=", "<=", "==", "=", ">", "<"};
        bool matched = false;
        for (const char* op : ops) {
            auto pos = rel.find(op);
            if (pos == std::string::npos) continue;
            int a = operand_value(trim(rel.substr(0, pos)), binding);
            int b = operand_value(trim(rel.substr(pos + std::string(op).size())), binding);
            std::string o = op;
            bool ok = (o == "!=") ? a != b
                    : (o == ">=") ? a >= b
                    : (o == "<=") ? a <= b
                    : (o == "==" || o == "=") ? a == b
                    : (o == ">") ? a > b
                                 : a < b;
            if (!ok) return false;
            matched = true;
            break;
        }
        if (!matched) throw ModelError("malformed constraint '" + rel + "'");
    }
    return true;
}

// ---------------------------------------------------------------- expressions

class ExprEvaluator {
public:
    ExprEvaluator(const ConcreteModel& model, std::map<std::string, int> binding, int depth)
        : model_(model), binding_(std::move(binding)), depth_(depth) {}

    HalfPowerPoly run(const std::string& text) {
        text_ = text;
        pos_ = 0;
        auto r = expr();
        skip();
        if (pos_ != text_.size()) fail("trailing characters");
        return r;
    }

private:
    const ConcreteModel& model_;
    std::map<std::string, int> binding_;
    int depth_;
    std::string text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ModelError("expression '" + text_ + "': " + what);
    }
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    bool eat(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip();
        std::size_t b = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        return text_.substr(b, pos_ - b);
    }
    long integer() {
        skip();
        std::size_t b = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (b == pos_) fail("expected integer");
        return std::stol(text_.substr(b, pos_ - b));
    }

    HalfPowerPoly expr() {
        auto r = term();
        for (;;) {
            if (eat('+')) r += term();
            else if (eat('-')) r -= term();
            else return r;
        }
    }
    HalfPowerPoly term() {
        auto r = unary();
        for (;;) {
            if (eat('*')) {
                r = r * unary();
            } else if (eat('/')) {
                auto d = unary();
                if (d.terms().size() != 1 || !d.is_deterministic()) fail("division only by c*h^(q/2)");
                const auto& [k, c] = *d.terms().begin();
                r = r.shifted(-k.h_halves) * Rational(1 / c);
            } else {
                return r;
            }
        }
    }
    HalfPowerPoly unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }
    Rational exponent() {
        if (eat('(')) {
            bool neg = eat('-');
            Rational e(integer());
            if (eat('/')) e /= Rational(integer());
            if (!eat(')')) fail("expected ')' in exponent");
            return neg ? Rational(-e) : e;
        }
        bool neg = eat('-');
        Rational e(integer());
        return neg ? Rational(-e) : e;
    }
    HalfPowerPoly power() {
        auto base = atom();
        if (!eat('^')) return base;
        Rational e = exponent();
        if (base.terms().size() == 1 && base.is_deterministic() && base.terms().begin()->second == 1) {
            Rational halves = e * base.terms().begin()->first.h_halves;
            if (halves.get_den() != 1) fail("power leaves half-integer h exponents");
            return HalfPowerPoly::h_power(static_cast<int>(halves.get_num().get_si()));
        }
        if (e.get_den() != 1 || e < 0) fail("non-integer power of a random expression");
        HalfPowerPoly r(Rational(1));
        for (long i = 0; i < e.get_num().get_si(); ++i) r = r * base;
        return r;
    }
    HalfPowerPoly atom() {
        if (eat('(')) {
            auto r = expr();
            if (!eat(')')) fail("expected ')'");
            return r;
        }
        skip();
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            return HalfPowerPoly(Rational(integer()));
        std::string name = ident();
        if (name.empty()) fail("expected operand");
        std::vector<int> args;
        if (eat('(')) {
            if (!eat(')')) {
                do {
                    skip();
                    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                        args.push_back(static_cast<int>(integer()));
                    } else {
                        std::string a = ident();
                        auto it = binding_.find(a);
                        if (it == binding_.end()) fail("unbound index '" + a + "'");
                        args.push_back(it->second);
                    }
                } while (eat(','));
                if (!eat(')')) fail("expected ')' after arguments");
            }
        }
        return resolve(name, args);
    }

    HalfPowerPoly resolve(const std::string& name, const std::vector<int>& args) {
        if (name == "h" && args.empty()) return HalfPowerPoly::h_power(2);
        auto pit = model_.prim_index_.find({name, args});
        if (pit != model_.prim_index_.end()) {
            const auto& p = model_.prims_[pit->second];
            return HalfPowerPoly::symbol(pit->second).shifted(p.h_halves);
        }
        for (const auto& fam : model_.spec_.primitives)
            if (fam.name == name && fam.args.size() == args.size())
                fail("primitive " + name + " has no instance for these indices");
        for (const auto& fam : model_.spec_.derived) {
            if (fam.name != name || fam.args.size() != args.size()) continue;
            if (depth_ > 32) fail("derived symbols nest too deeply");
            std::map<std::string, int> b;
            for (std::size_t i = 0; i < args.size(); ++i) b[fam.args[i]] = args[i];
            for (const auto& c : fam.cases)
                if (eval_constraint(c.when, b)) return ExprEvaluator(model_, b, depth_ + 1).run(c.expr);
            fail("no case of " + name + " matches the indices");
        }
        throw ModelError("unknown symbol '" + name + "' in expression '" + text_ + "'");
    }
};

// --------------------------------------------------------------- the model

namespace {

template <class F>
void for_each_assignment(std::size_t arity, int m, F&& f) {
    std::vector<int> v(arity, 1);
    for (;;) {
        f(v);
        std::size_t i = 0;
        while (i < arity && v[i] == m) v[i++] = 1;
        if (i == arity) return;
        ++v[i];
    }
}

std::map<std::string, int> bind(const std::vector<std::string>& names, const std::vector<int>& vals) {
    std::map<std::string, int> b;
    for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = vals[i];
    return b;
}

}  // namespace

std::string ThetaInstance::label() const {
    std::string s = name;
    if (!args.empty()) {
        s += '(';
        for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + std::to_string(args[i]);
        s += ')';
    }
    return s;
}

ConcreteModel::ConcreteModel(const RVModelSpec& spec, int m) : m_(m), spec_(spec) {
    if (m < 1) throw ModelError("noise dimension must be positive");
    for (const auto& fam : spec_.primitives) {
        if (fam.support.empty()) throw ModelError("primitive " + fam.name + " has empty support");
        Rational total = 0;
        std::optional<int> hh;
        for (const auto& sp : fam.support) {
            if (sp.prob <= 0) throw ModelError("primitive " + fam.name + " has a non-positive probability");
            total += sp.prob;
            if (sp.coef != 0) {
                if (hh && *hh != sp.h_halves)
                    throw ModelError("primitive " + fam.name + " mixes h exponents across its support");
                hh = sp.h_halves;
            }
        }
        if (total != 1) throw ModelError("probabilities of " + fam.name + " sum to " + srkw::to_string(total));
        for_each_assignment(fam.args.size(), m, [&](const std::vector<int>& a) {
            if (!eval_constraint(fam.when, bind(fam.args, a))) return;
            ConcretePrimitive p;
            p.name = fam.name;
            p.args = a;
            p.h_halves = hh.value_or(0);
            for (const auto& sp : fam.support) {
                p.values.push_back(make_surd(sp.coef, sp.radicand));
                p.probs.push_back(sp.prob);
            }
            prim_index_[{p.name, p.args}] = static_cast<int>(prims_.size());
            prims_.push_back(std::move(p));
        });
    }
    if (prims_.size() > 250) throw ModelError("too many primitive instances");
    bool has_h = false;
    for (const auto& fam : spec_.theta) {
        if (fam.name == "h" && fam.args.empty()) has_h = true;
        for_each_assignment(fam.args.size(), m, [&](const std::vector<int>& a) {
            auto b = bind(fam.args, a);
            for (const auto& c : fam.cases) {
                if (!eval_constraint(c.when, b)) continue;
                ThetaInstance t{fam.name, a, ExprEvaluator(*this, b, 0).run(c.expr)};
                theta_index_[{t.name, t.args}] = static_cast<int>(thetas_.size());
                thetas_.push_back(std::move(t));
                break;
            }
        });
    }
    if (!has_h) {
        theta_index_[{"h", {}}] = static_cast<int>(thetas_.size());
        thetas_.push_back({"h", {}, HalfPowerPoly::h_power(2)});
    }
    h_id_ = theta_index_.at({"h", {}});
}

std::optional<int> ConcreteModel::find_theta(const std::string& name, const std::vector<int>& args) const {
    auto it = theta_index_.find({name, args});
    if (it == theta_index_.end()) return std::nullopt;
    return it->second;
}

int ConcreteModel::theta_id(const std::string& name, const std::vector<int>& args) const {
    auto t = find_theta(name, args);
    if (!t) throw ModelError("model defines no theta " + ThetaInstance{name, args, {}}.label() + " at m=" +
                             std::to_string(m_));
    return *t;
}

Rational ConcreteModel::moment(int prim, int power) const {
    auto key = std::make_pair(prim, power);
    std::lock_guard lock(*cache_mutex_);
    auto it = moment_cache_.find(key);
    if (it != moment_cache_.end()) return it->second;
    const auto& p = prims_.at(prim);
    SurdSum sum;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        Surd v = surd_pow(p.values[i], power);
        sum.add(v.coef * p.probs[i], v.radical);
    }
    Rational r = sum.rational_value();
    moment_cache_.emplace(key, r);
    return r;
}

HalfPowerPoly ConcreteModel::expect(const HalfPowerPoly& poly) const {
    HalfPowerPoly out;
    for (const auto& [k, c] : poly.terms()) {
        if (k.mono.size() > prims_.size()) throw ModelError("expression references an unknown primitive");
        Rational v = c;
        for (std::size_t i = 0; i < k.mono.size() && v != 0; ++i)
            if (k.mono[i]) v *= moment(static_cast<int>(i), k.mono[i]);
        out.add_term(TermKey{k.h_halves, {}}, v);
    }
    return out;
}

HalfPowerPoly ConcreteModel::evaluate(const std::string& expression) const {
    return ExprEvaluator(*this, {}, 0).run(expression);
}

std::vector<std::string> ConcreteModel::symbol_names() const {
    std::vector<std::string> names;
    for (const auto& p : prims_) names.push_back(ThetaInstance{p.name, p.args, {}}.label());
    return names;
}

DiscreteSampler::DiscreteSampler(const std::vector<Rational>& probs) {
    mpz_class l = 1;
    for (const auto& p : probs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), p.get_den().get_mpz_t());
    if (!l.fits_ulong_p()) throw ModelError("probability denominators too large for sampling");
    denom_ = l.get_ui();
    std::uint64_t acc = 0;
    for (const auto& p : probs) {
        mpz_class part = p.get_num() * (l / p.get_den());
        acc += part.get_ui();
        cumulative_.push_back(acc);
    }
}

double evaluate_numeric(const HalfPowerPoly& p, double h, const std::vector<double>& prim_values) {
    double total = 0;
    const double sh = std::sqrt(h);
    for (const auto& [k, c] : p.terms()) {
        double v = c.get_d() * std::pow(sh, k.h_halves);
        for (std::size_t i = 0; i < k.mono.size(); ++i)
            for (int e = 0; e < k.mono[i]; ++e) v *= prim_values[i];
        total += v;
    }
    return total;
}

const MomentRecord* MomentReport::first_failure() const {
    for (const auto& r : records)
        if (!r.pass) return &r;
    return nullptr;
}

MomentReport check_moment_condition(const ConcreteModel& model, int max_total_power) {
    MomentReport rep;
    const int k = static_cast<int>(model.thetas().size());
    std::vector<std::pair<int, int>> mono;
    auto rec = [&](auto&& self, int start, int total, const HalfPowerPoly& prod) -> void {
        if (total > 0) {
            MomentRecord r;
            r.monomial = mono;
            r.total_power = total;
            r.lowest_halves = model.expect(prod).lowest_halves();
            r.pass = !r.lowest_halves || *r.lowest_halves >= total;
            rep.pass = rep.pass && r.pass;
            rep.records.push_back(std::move(r));
        }
        if (total == max_total_power) return;
        for (int i = start; i < k; ++i) {
            if (!mono.empty() && mono.back().first == i) ++mono.back().second;
            else mono.emplace_back(i, 1);
            self(self, i, total + 1, prod * model.thetas()[i].expr);
            if (mono.back().second > 1) --mono.back().second;
            else mono.pop_back();
        }
    };
    rec(rec, 0, 0, HalfPowerPoly(Rational(1)));
    return rep;
}

bool operator==(const RVModelSpec& a, const RVModelSpec& b) {
    auto sp_eq = [](const SupportPoint& x, const SupportPoint& y) {
        return x.coef == y.coef && x.radicand == y.radicand && x.h_halves == y.h_halves && x.prob == y.prob;
    };
    auto case_eq = [](const ExprCase& x, const ExprCase& y) { return x.when == y.when && x.expr == y.expr; };
    auto fam_eq = [&](const SymbolFamily& x, const SymbolFamily& y) {
        return x.name == y.name && x.args == y.args &&
               std::equal(x.cases.begin(), x.cases.end(), y.cases.begin(), y.cases.end(), case_eq);
    };
    auto prim_eq = [&](const PrimitiveFamily& x, const PrimitiveFamily& y) {
        return x.name == y.name && x.args == y.args && x.when == y.when &&
               std::equal(x.support.begin(), x.support.end(), y.support.begin(), y.support.end(), sp_eq);
    };
    return std::equal(a.primitives.begin(), a.primitives.end(), b.primitives.begin(), b.primitives.end(), prim_eq) &&
           std::equal(a.derived.begin(), a.derived.end(), b.derived.begin(), b.derived.end(), fam_eq) &&
           std::equal(a.theta.begin(), a.theta.end(), b.theta.begin(), b.theta.end(), fam_eq);
}

// ------------------------------------------------------------ built-in models

namespace {

PrimitiveFamily three_point(const std::string& name) {
    return {name,
            {"k"},
            "",
            {{Rational(1), Rational(3), 1, Rational(1, 6)},
             {Rational(-1), Rational(3), 1, Rational(1, 6)},
             {Rational(0), Rational(1), 1, Rational(2, 3)}}};
}

}  // namespace

RVModelSpec ri1wm_model() {
    RVModelSpec m;
    m.primitives.push_back(three_point("I"));
    m.primitives.push_back({"Vp",
                            {"k", "l"},
                            "k>l",
                            {{Rational(1), Rational(1), 2, Rational(1, 2)}, {Rational(-1), Rational(1), 2, Rational(1, 2)}}});
    m.derived.push_back({"V", {"k", "l"}, {{"k>l", "Vp(k,l)"}, {"k=l", "-h"}, {"k<l", "-Vp(l,k)"}}});
    m.derived.push_back({"Ihat", {"k", "l"}, {{"", "(I(k)*I(l) + V(k,l))/2"}}});
    m.theta.push_back({"I", {"k"}, {{"", "I(k)"}}});
    m.theta.push_back({"J", {"k", "l"}, {{"", "Ihat(k,l)*h^(-1/2)"}}});
    m.theta.push_back({"sqrth", {}, {{"", "h^(1/2)"}}});
    return m;
}

RVModelSpec rs1wm_model() {
    RVModelSpec m;
    m.primitives.push_back(three_point("I"));
    m.theta.push_back({"I", {"k"}, {{"", "I(k)"}}});
    return m;
}

RVModelSpec euler_model(bool three) {
    RVModelSpec m;
    if (three) {
        m.primitives.push_back(three_point("I"));
    } else {
        m.primitives.push_back({"I",
                                {"k"},
                                "",
                                {{Rational(1), Rational(1), 1, Rational(1, 2)},
                                 {Rational(-1), Rational(1), 1, Rational(1, 2)}}});
    }
    m.theta.push_back({"I", {"k"}, {{"", "I(k)"}}});
    return m;
}

}  // namespace srkw
