#include "srkweak/expansion.hpp"

#include <doctest.h>

#include <cmath>

using namespace srkw;

namespace {

double fitted_slope(const std::vector<ExpansionRow>& rows) {
    double mx = 0, my = 0;
    for (const auto& r : rows) {
        mx += std::log(r.dt);
        my += std::log(r.error);
    }
    mx /= rows.size();
    my /= rows.size();
    double sxy = 0, sxx = 0;
    for (const auto& r : rows) {
        sxy += (std::log(r.dt) - mx) * (std::log(r.error) - my);
        sxx += (std::log(r.dt) - mx) * (std::log(r.dt) - mx);
    }
    return sxy / sxx;
}

std::vector<double> dt_grid() {
    std::vector<double> out;
    for (int k = 3; k <= 7; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

double differential(const char* tree, const DerivativeOracle& o, const Vec& x) {
    const auto v = elementary_differential(parse_node(tree), o, x);
    REQUIRE(v.size() == 1);
    return v[0];
}

}  // namespace

TEST_CASE("low truncation orders") {
    const auto gbm = *builtin_problem("gbm").linear;
    const auto o = linear_oracle(gbm, make_functional("x", 1));
    const double x0 = 0.1, dt = 0.01;
    CHECK(truncated_expectation(o, gbm.x0, dt, 0, Calculus::ito) == doctest::Approx(x0));
    CHECK(truncated_expectation(o, gbm.x0, dt, 1, Calculus::ito) == doctest::Approx(x0 * (1 + 1.5 * dt)).epsilon(1e-14));

    // E X^2 for the Ornstein-Uhlenbeck problem to first order in dt.
    const auto ou = *builtin_problem("ou").linear;
    const auto o2 = linear_oracle(ou, make_functional("x2", 1));
    const double expected = 1.0 + dt * (2 * 1.0 * (-1.0 + 0.5) + 0.09);
    CHECK(truncated_expectation(o2, ou.x0, dt, 1, Calculus::ito) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("hand-computed elementary differentials") {
    const auto gbm = *builtin_problem("gbm").linear;
    const auto o = linear_oracle(gbm, make_functional("x2", 1));
    const Vec x{0.8};
    const double mu = 1.5, sigma = 0.1;
    // f''(x)(b, a'b) with f = x^2, a = mu x, b = sigma x.
    CHECK(differential("(s_1,[s_1])", o, x) == doctest::Approx(2 * mu * sigma * sigma * 0.64));
    CHECK(differential("(t)", o, x) == doctest::Approx(2 * 0.8 * mu * 0.8));
    CHECK(differential("(s_1,s_1)", o, x) == doctest::Approx(2 * sigma * sigma * 0.64));
    CHECK(differential("({s_1}_1)", o, x) == doctest::Approx(2 * 0.8 * sigma * sigma * 0.8));
    CHECK(differential("(t,t,t)", o, x) == 0);
    CHECK(elementary_differential(parse_node("[t]"), o, x)[0] == doctest::Approx(mu * mu * 0.8));

    auto ode = gbm;
    ode.B = {{{0.0}}};
    const auto flat = linear_oracle(ode, make_functional("x2", 1));
    CHECK(differential("(s_1)", flat, x) == 0);
    CHECK(differential("(s_1,s_1)", flat, x) == 0);
}

TEST_CASE("renaming noise indices matches swapping the noise columns") {
    const auto sde = *builtin_problem("linear2d").linear;
    auto swapped = sde;
    std::swap(swapped.B[0], swapped.B[1]);
    std::swap(swapped.c[0], swapped.c[1]);
    const auto f = make_functional("norm2", 2);
    const auto o = linear_oracle(sde, f);
    const auto os = linear_oracle(swapped, f);
    const Vec x{0.3, -0.7};
    const std::vector<std::pair<const char*, const char*>> pairs{{"(s_1,{s_2}_1)", "(s_2,{s_1}_2)"},
                                                                 {"({[s_1]}_2,s_2)", "({[s_2]}_1,s_1)"},
                                                                 {"(s_1,s_1,s_2,s_2)", "(s_2,s_2,s_1,s_1)"}};
    for (const auto& [a, b] : pairs) {
        CAPTURE(a);
        CHECK(differential(a, o, x) == doctest::Approx(differential(b, os, x)).epsilon(1e-14));
    }
    CHECK(truncated_expectation(o, x, 0.1, 2, Calculus::ito) ==
          doctest::Approx(truncated_expectation(os, x, 0.1, 2, Calculus::ito)).epsilon(1e-14));
}

TEST_CASE("oracle derivatives match finite differences and are symmetric") {
    const auto sde = *builtin_problem("linear2d").linear;
    const auto f = make_functional("norm2", 2);
    const auto o = linear_oracle(sde, f);
    const Vec x{0.3, -0.7}, u{0.2, 0.5}, v{-1.0, 0.4};
    const double eps = 1e-4;
    auto shift = [](Vec p, const Vec& dir, double s) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += s * dir[i];
        return p;
    };
    const double fd1 = (f(shift(x, u, eps).data()) - f(shift(x, u, -eps).data())) / (2 * eps);
    CHECK(o.f(1, x, {u}) == doctest::Approx(fd1).epsilon(1e-8));
    const double fd2 = (o.f(1, shift(x, v, eps), {u}) - o.f(1, shift(x, v, -eps), {u})) / (2 * eps);
    CHECK(o.f(2, x, {u, v}) == doctest::Approx(fd2).epsilon(1e-8));
    CHECK(o.f(2, x, {u, v}) == doctest::Approx(o.f(2, x, {v, u})));
    CHECK(o.f(3, x, {u, v, u}) == 0);
    for (int j = 1; j <= 2; ++j) {
        const auto b0 = o.b(j, 0, x, {});
        const auto bp = o.b(j, 0, shift(x, u, eps), {});
        const auto bm = o.b(j, 0, shift(x, u, -eps), {});
        const auto b1 = o.b(j, 1, x, {u});
        for (int r = 0; r < 2; ++r) CHECK(b1[r] == doctest::Approx((bp[r] - bm[r]) / (2 * eps)).epsilon(1e-8));
        CHECK(o.b(j, 2, x, {u, v})[0] == 0);
        CHECK(b0.size() == 2);
    }
    const auto a1 = o.a(1, x, {u});
    const auto ap = o.a(0, shift(x, u, eps), {});
    const auto am = o.a(0, shift(x, u, -eps), {});
    for (int r = 0; r < 2; ++r) CHECK(a1[r] == doctest::Approx((ap[r] - am[r]) / (2 * eps)).epsilon(1e-8));
}

TEST_CASE("truncation error decays one order above the truncation") {
    for (const auto& name : builtin_problem_names()) {
        const auto sde = *builtin_problem(name).linear;
        for (const char* fid : {"x", "x2"}) {
            CAPTURE(name);
            CAPTURE(fid);
            const auto rows = expansion_table(sde, make_functional(fid, sde.d()), 2, dt_grid());
            CHECK(rows.size() == 5);
            CHECK(fitted_slope(rows) == doctest::Approx(3).epsilon(0.07));
        }
    }
    const auto gbm = *builtin_problem("gbm").linear;
    const auto first = expansion_table(gbm, make_functional("x2", 1), 1, dt_grid());
    CHECK(fitted_slope(first) == doctest::Approx(2).epsilon(0.07));
}

TEST_CASE("a too-shallow oracle is rejected") {
    auto o = linear_oracle(*builtin_problem("gbm").linear, make_functional("x2", 1));
    o.max_order = 1;
    CHECK_NOTHROW(elementary_differential(parse_node("(s_1)"), o, {0.5}));
    CHECK_THROWS_AS(elementary_differential(parse_node("(s_1,s_1)"), o, {0.5}), ExpansionError);
    CHECK_THROWS_AS(truncated_expectation(o, {0.5}, 0.1, 1, Calculus::ito), ExpansionError);
}

TEST_CASE("expansion CSV") {
    const auto rows = expansion_table(*builtin_problem("ou").linear, make_functional("x", 1), 2, {0.5, 0.25});
    const auto csv = expansion_csv(rows);
    CHECK(csv.rfind("dt,truncated,exact,error\n0.5,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    for (const auto& r : rows) CHECK(r.error == doctest::Approx(std::abs(r.truncated - r.exact)));
}
