#include "srkweak/expansion.hpp"

#include <cmath>
#include <cstdio>

namespace srkw {

namespace {

double dot(const Vec& u, const Vec& v) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

/// Value and derivatives of x -> Mx + c.
Vec affine_derivative(const Mat& M, const Vec& c, int k, const Vec& x, const std::vector<Vec>& dirs) {
    const std::size_t d = c.size();
    if (k >= 2) return Vec(d, 0.0);
    const Vec& u = k == 0 ? x : dirs[0];
    Vec out = k == 0 ? c : Vec(d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t q = 0; q < d; ++q) out[r] += M[r][q] * u[q];
    return out;
}

}  // namespace

DerivativeOracle linear_oracle(const LinearSde& sde, const TestFunctional& f) {
    DerivativeOracle o;
    o.d = sde.d();
    o.m = sde.m();
    o.max_order = 1 << 20;  // all higher derivatives vanish exactly
    o.f = [f](int k, const Vec& x, const std::vector<Vec>& dirs) -> double {
        const std::size_t d = x.size();
        auto quad = [&](const Vec& u, const Vec& v) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) s += f.Q[i][j] * u[i] * v[j];
            return s;
        };
        switch (k) {
            case 0: return quad(x, x) + dot(f.q, x);
            case 1: return quad(x, dirs[0]) + quad(dirs[0], x) + dot(f.q, dirs[0]);
            case 2: return quad(dirs[0], dirs[1]) + quad(dirs[1], dirs[0]);
            default: return 0.0;
        }
    };
    o.a = [sde](int k, const Vec& x, const std::vector<Vec>& dirs) { return affine_derivative(sde.A, sde.a0, k, x, dirs); };
    o.b = [sde](int j, int k, const Vec& x, const std::vector<Vec>& dirs) {
        return affine_derivative(sde.B.at(j - 1), sde.c.at(j - 1), k, x, dirs);
    };
    return o;
}

Vec elementary_differential(const Node& t, const DerivativeOracle& oracle, const Vec& x) {
    const int k = static_cast<int>(t.children.size());
    if (k > oracle.max_order)
        throw ExpansionError("derivative of order " + std::to_string(k) + " requested; oracle supports up to " +
                             std::to_string(oracle.max_order));
    std::vector<Vec> dirs;
    dirs.reserve(k);
    for (const auto& c : t.children) {
        if (c.kind == Kind::root) throw ExpansionError("gamma node below the root");
        dirs.push_back(elementary_differential(c, oracle, x));
    }
    switch (t.kind) {
        case Kind::root: return Vec{oracle.f(k, x, dirs)};
        case Kind::tau: return oracle.a(k, x, dirs);
        case Kind::sigma:
            if (t.index < 1 || t.index > oracle.m)
                throw ExpansionError("noise index " + std::to_string(t.index) + " outside 1.." + std::to_string(oracle.m));
            return oracle.b(t.index, k, x, dirs);
    }
    return {};
}

double truncated_expectation(const DerivativeOracle& oracle, const Vec& x0, double dt, int p, Calculus calculus) {
    if (dt < 0) throw ExpansionError("dt must be non-negative");
    if (p < 0) throw ExpansionError("order must be non-negative");
    double total = 0;
    for (const auto& entry : enumerate_ts_star(calculus, 2 * p)) {
        const auto alpha = calculus == Calculus::ito ? entry.alpha_ito : entry.alpha_strat;
        if (alpha == 0) continue;
        const ColoredTree& t = entry.tree;
        const double weight = static_cast<double>(alpha) / (std::ldexp(1.0, t.s() / 2) * factorial(t.rho_halves() / 2).get_d()) *
                              std::pow(dt, t.rho_halves() / 2);
        const int n = t.n();
        std::vector<int> vals(n, 1);
        double sum = 0;
        for (;;) {
            Node node = t.root();
            auto assign = [&](auto&& self, Node& x) -> void {
                if (x.kind == Kind::sigma) x.index = vals[x.index - 1];
                for (auto& ch : x.children) self(self, ch);
            };
            assign(assign, node);
            sum += elementary_differential(node, oracle, x0)[0];
            int i = 0;
            while (i < n && vals[i] == oracle.m) vals[i++] = 1;
            if (i == n) break;
            ++vals[i];
        }
        total += weight * sum;
    }
    return total;
}

std::vector<ExpansionRow> expansion_table(const LinearSde& sde, const TestFunctional& f, int p,
                                          const std::vector<double>& dts) {
    const auto oracle = linear_oracle(sde, f);
    std::vector<ExpansionRow> rows;
    for (double dt : dts) {
        ExpansionRow r{dt, truncated_expectation(oracle, sde.x0, dt, p, sde.calculus), exact_expectation(sde, f, dt), 0};
        r.error = std::abs(r.truncated - r.exact);
        rows.push_back(r);
    }
    return rows;
}

std::string expansion_csv(const std::vector<ExpansionRow>& rows) {
    std::string out = "dt,truncated,exact,error\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g,%.17g\n", r.dt, r.truncated, r.exact, r.error);
        out += buf;
    }
    return out;
}

}  // namespace srkw
