#pragma once

// Brute-force expectation of elementary weights: walk every point of the
// discrete sample space, evaluate the weights exactly in Q(sqrt r)[h^(1/2)],
// and average with the exact probabilities.

#include "srkweak/tableau.hpp"
#include "srkweak/trees.hpp"

#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace testsupport {

using srkw::Rational;

/// Sum of c * sqrt(radical) * h^(halves/2).
struct ExactScalar {
    std::map<std::pair<int, std::uint64_t>, Rational> terms;

    static ExactScalar constant(const Rational& c) {
        ExactScalar s;
        if (c != 0) s.terms[{0, 1}] = c;
        return s;
    }
    ExactScalar& operator+=(const ExactScalar& o) {
        for (const auto& [k, c] : o.terms) {
            auto& slot = terms[k];
            slot += c;
            if (slot == 0) terms.erase(k);
        }
        return *this;
    }
    friend ExactScalar operator*(const ExactScalar& a, const ExactScalar& b) {
        ExactScalar out;
        for (const auto& [ka, ca] : a.terms)
            for (const auto& [kb, cb] : b.terms) {
                const std::uint64_t g = std::gcd(ka.second, kb.second);
                const std::uint64_t rad = (ka.second / g) * (kb.second / g);
                ExactScalar t;
                t.terms[{ka.first + kb.first, rad}] = ca * cb * Rational(static_cast<unsigned long>(g));
                out += t;
            }
        return out;
    }
    friend bool operator==(const ExactScalar& a, const ExactScalar& b) { return a.terms == b.terms; }
};

inline ExactScalar from_poly_at(const srkw::HalfPowerPoly& p, const std::vector<ExactScalar>& prim) {
    ExactScalar out;
    for (const auto& [k, c] : p.terms()) {
        ExactScalar t;
        t.terms[{k.h_halves, 1}] = c;
        for (std::size_t i = 0; i < k.mono.size(); ++i)
            for (int e = 0; e < k.mono[i]; ++e) t = t * prim[i];
        out += t;
    }
    return out;
}

inline ExactScalar from_deterministic(const srkw::HalfPowerPoly& p) { return from_poly_at(p, {}); }

/// Independent elementary-weight recursion over one sample point.
class PointWeights {
public:
    PointWeights(const srkw::ConcreteScheme& sc, const std::vector<ExactScalar>& prim) : sc_(sc) {
        const int nf = static_cast<int>(sc.families().size());
        const int s = sc.stages();
        z_.assign(nf, std::vector<ExactScalar>(s));
        Z_.assign(nf, std::vector<std::vector<std::vector<ExactScalar>>>(
                          nf, std::vector<std::vector<ExactScalar>>(s, std::vector<ExactScalar>(s))));
        for (int F = 0; F < nf; ++F) {
            for (int i = 0; i < s; ++i) z_[F][i] = from_poly_at(sc.z(F)[i], prim);
            for (int G = 0; G < nf; ++G)
                for (const auto& e : sc.Z(F, G)) Z_[F][G][e.i][e.j] = from_poly_at(e.value, prim);
        }
    }

    ExactScalar weight(const srkw::Node& root) const {
        ExactScalar out = ExactScalar::constant(1);
        for (const auto& c : root.children) {
            ExactScalar w;
            for (int F : families_for(c)) {
                const auto psi = stage_vector(c, F);
                for (int i = 0; i < sc_.stages(); ++i) w += z_[F][i] * psi[i];
            }
            out = out * w;
        }
        return out;
    }

private:
    std::vector<int> families_for(const srkw::Node& n) const {
        if (n.kind == srkw::Kind::tau) return {0};
        return sc_.families_of(n.index);
    }

    /// Stage vector of node n evaluated in family F: product over children.
    std::vector<ExactScalar> stage_vector(const srkw::Node& n, int F) const {
        const int s = sc_.stages();
        std::vector<ExactScalar> v(s, ExactScalar::constant(1));
        for (const auto& c : n.children) {
            std::vector<ExactScalar> contrib(s);
            for (int G : families_for(c)) {
                const auto inner = stage_vector(c, G);
                for (int i = 0; i < s; ++i)
                    for (int j = 0; j < s; ++j) contrib[i] += Z_[F][G][i][j] * inner[j];
            }
            for (int i = 0; i < s; ++i) v[i] = v[i] * contrib[i];
        }
        return v;
    }

    const srkw::ConcreteScheme& sc_;
    std::vector<std::vector<ExactScalar>> z_;
    std::vector<std::vector<std::vector<std::vector<ExactScalar>>>> Z_;
};

/// E(Phi_S(t)) for each tree by exhausting the primitive sample space.
inline std::vector<ExactScalar> brute_force_expectations(const srkw::ConcreteScheme& sc,
                                                         const std::vector<srkw::ColoredTree>& trees) {
    const auto& prims = sc.model().primitives();
    std::vector<ExactScalar> totals(trees.size());
    std::vector<int> choice(prims.size(), 0);
    for (;;) {
        Rational prob = 1;
        std::vector<ExactScalar> vals;
        for (std::size_t i = 0; i < prims.size(); ++i) {
            prob *= prims[i].probs[choice[i]];
            const auto& v = prims[i].values[choice[i]];
            ExactScalar x;
            if (v.coef != 0) x.terms[{0, v.radical}] = v.coef;
            vals.push_back(x);
        }
        const PointWeights pw(sc, vals);
        for (std::size_t t = 0; t < trees.size(); ++t) totals[t] += ExactScalar::constant(prob) * pw.weight(trees[t].root());
        std::size_t i = 0;
        while (i < prims.size() && choice[i] + 1 == static_cast<int>(prims[i].probs.size())) choice[i++] = 0;
        if (i == prims.size()) break;
        ++choice[i];
    }
    return totals;
}

/// Every concrete-index tree with rho <= max_halves/2 and indices in 1..m.
inline std::vector<srkw::ColoredTree> concrete_trees(int max_halves, int m) {
    std::set<srkw::ColoredTree> out;
    for (const auto& e : srkw::enumerate_ts_delta(max_halves)) {
        const int s = e.tree.s();
        std::vector<int> vals(s, 1);
        for (;;) {
            srkw::Node node = e.tree.root();
            auto assign = [&](auto&& self, srkw::Node& x) -> void {
                if (x.kind == srkw::Kind::sigma) x.index = vals[x.index - 1];
                for (auto& ch : x.children) self(self, ch);
            };
            assign(assign, node);
            out.insert(srkw::canonicalize_concrete(node));
            int i = 0;
            while (i < s && vals[i] == m) vals[i++] = 1;
            if (i == s) break;
            ++vals[i];
        }
    }
    return {out.begin(), out.end()};
}

}  // namespace testsupport
