#include "fixtures.hpp"

#include "srkweak/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace srkw;

namespace {

double slope(const std::vector<double>& hs, const std::vector<double>& errs) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        mx += std::log(hs[i]);
        my += std::log(errs[i]);
    }
    mx /= hs.size();
    my /= hs.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        sxy += (std::log(hs[i]) - mx) * (std::log(errs[i]) - my);
        sxx += (std::log(hs[i]) - mx) * (std::log(hs[i]) - mx);
    }
    return sxy / sxx;
}

/// Scalar ODE y' = sin(t) - y^2 with zero diffusion.
SdeProblem riccati_ode() {
    SdeProblem p;
    p.name = "riccati";
    p.drift = [](double t, const double* x, double* out) { out[0] = std::sin(t) - x[0] * x[0]; };
    p.diffusion = [](double, const double*, int, double* out) { out[0] = 0; };
    p.x0 = {0.7};
    return p;
}

double reference_rk3(double t, double y, double h) {
    auto f = [](double s, double x) { return std::sin(s) - x * x; };
    const double k1 = f(t, y);
    const double k2 = f(t + 2 * h / 3, y + 2 * h / 3 * k1);
    const double k3 = f(t + 2 * h / 3, y + h * (-k1 / 3 + k2));
    return y + h * (k1 / 4 + k2 / 2 + k3 / 4);
}

int theta_index(const SrkStepper& s, const std::string& name, std::vector<int> args) {
    return s.scheme().model().theta_id(name, args);
}

}  // namespace

TEST_CASE("one Euler step") {
    const SrkStepper st(euler_maruyama(), builtin_problem("gbm"));
    std::vector<double> theta(st.theta_count(), 0.0);
    const double h = 0.125, dw = 0.3, y0 = 0.7;
    theta[theta_index(st, "I", {1})] = dw;
    theta[st.scheme().model().h_id()] = h;
    double y = y0;
    st.step(0.0, h, theta.data(), &y);
    CHECK(y == doctest::Approx(y0 + 1.5 * y0 * h + 0.1 * y0 * dw).epsilon(1e-14));

    std::fill(theta.begin(), theta.end(), 0.0);
    y = y0;
    st.step(0.0, 0.0, theta.data(), &y);
    CHECK(y == y0);
}

TEST_CASE("zero diffusion reduces the Ito scheme to its deterministic Runge-Kutta method") {
    const SrkStepper st(ri1wm(), riccati_ode());
    std::mt19937_64 rng(5);
    std::vector<double> theta(st.theta_count());
    double t = 0.3;
    for (double h : {0.5, 0.1, 0.01}) {
        st.sample(h, rng, theta.data());
        double y = 0.7;
        st.step(t, h, theta.data(), &y);
        CHECK(y == doctest::Approx(reference_rk3(t, 0.7, h)).epsilon(1e-14));
        t += h;
    }
}

TEST_CASE("exact moments of geometric Brownian motion") {
    const auto gbm = *builtin_problem("gbm").linear;
    for (double T : {0.25, 1.0}) {
        const auto [mean, second] = linear_moments(gbm, T);
        CHECK(mean[0] == doctest::Approx(0.1 * std::exp(1.5 * T)).epsilon(1e-12));
        CHECK(second[0][0] == doctest::Approx(0.01 * std::exp((3 + 0.01) * T)).epsilon(1e-12));
        CHECK(exact_expectation(gbm, make_functional("x2", 1), T) == doctest::Approx(second[0][0]).epsilon(1e-14));
    }
    // Stratonovich GBM has Ito drift mu + sigma^2/2.
    const auto strat = *builtin_problem("gbm-strat").linear;
    CHECK(linear_moments(strat, 1.0).first[0] == doctest::Approx(0.1 * std::exp(1.505)).epsilon(1e-12));
}

TEST_CASE("exact moments of the Ornstein-Uhlenbeck problem") {
    const auto ou = *builtin_problem("ou").linear;
    const double T = 0.8;
    const auto [mean, second] = linear_moments(ou, T);
    const double m = 0.5 + (1.0 - 0.5) * std::exp(-T);
    const double var = 0.09 / 2 * (1 - std::exp(-2 * T));
    CHECK(mean[0] == doctest::Approx(m).epsilon(1e-12));
    CHECK(second[0][0] == doctest::Approx(var + m * m).epsilon(1e-12));
}

TEST_CASE("Stratonovich to Ito conversion") {
    const auto ito = stratonovich_to_ito(builtin_problem("gbm-strat"));
    CHECK(ito.calculus == Calculus::ito);
    CHECK(ito.name == "gbm-strat-ito");
    const double x = 2.0;
    double a = 0;
    ito.drift(0.0, &x, &a);
    CHECK(a == doctest::Approx((1.5 + 0.005) * x));

    const auto two = stratonovich_to_ito(builtin_problem("linear2d-strat"));
    const auto lin = builtin_problem("linear2d-strat").linear->to_ito();
    const double y[2] = {0.4, -1.1};
    double got[2];
    two.drift(0.0, y, got);
    for (int r = 0; r < 2; ++r) {
        const double expected = lin.A[r][0] * y[0] + lin.A[r][1] * y[1] + lin.a0[r];
        CHECK(got[r] == doctest::Approx(expected).epsilon(1e-14));
    }

    CHECK_THROWS_AS(stratonovich_to_ito(builtin_problem("gbm")), SimulationError);
    auto bare = riccati_ode();
    bare.calculus = Calculus::strat;
    CHECK_THROWS_WITH_AS(stratonovich_to_ito(bare), doctest::Contains("Jacobian"), SimulationError);
}

TEST_CASE("results do not depend on the thread count") {
    const SrkStepper st(ri1wm(), builtin_problem("linear2d"));
    const auto f = make_functional("norm2", 2);
    SimulationConfig cfg;
    cfg.samples = 50000;
    cfg.chunk = 4096;
    cfg.seed = 99;
    const auto one = simulate_weak(st, f, 1.0, 4, cfg);
    cfg.threads = 3;
    const auto three = simulate_weak(st, f, 1.0, 4, cfg);
    CHECK(one.mean == three.mean);
    CHECK(one.stderr_ == three.stderr_);
    CHECK(one.samples == 50000);
    cfg.seed = 100;
    CHECK(simulate_weak(st, f, 1.0, 4, cfg).mean != one.mean);
}

TEST_CASE("a deterministic problem has zero standard error") {
    LinearSde s;
    s.A = {{-0.4}};
    s.a0 = {0.2};
    s.B = {{{0.0}}};
    s.c = {{0.0}};
    s.x0 = {1.0};
    const SrkStepper st(ri1wm(), make_linear_problem("ode", s));
    SimulationConfig cfg;
    cfg.samples = 1000;
    cfg.chunk = 300;
    const auto est = simulate_weak(st, make_functional("x", 1), 1.0, 8, cfg);
    CHECK(est.stderr_ == 0);
    CHECK(est.mean == doctest::Approx(exact_expectation(s, make_functional("x", 1), 1.0)).epsilon(1e-5));
}

TEST_CASE("one-step expectation matches the Monte Carlo mean") {
    const SrkStepper st(ri1wm(), builtin_problem("linear2d"));
    const auto f = make_functional("norm2", 2);
    const double h = 0.5;
    const double exact = one_step_expectation(st, f, st.problem().x0, h);
    SimulationConfig cfg;
    cfg.samples = 200000;
    const auto est = simulate_weak(st, f, h, 1, cfg);
    CHECK(std::abs(est.mean - exact) < 4 * est.stderr_);
}

TEST_CASE("local weak error of the order-two scheme is third order") {
    for (const char* name : {"gbm", "linear2d"}) {
        CAPTURE(name);
        const auto prob = builtin_problem(name);
        const SrkStepper st(ri1wm(), prob);
        const auto f = make_functional("x2", prob.d);
        std::vector<double> hs, errs;
        for (int k = 2; k <= 5; ++k) {
            const double h = std::ldexp(1.0, -k);
            hs.push_back(h);
            errs.push_back(std::abs(one_step_expectation(st, f, prob.x0, h) - exact_expectation(*prob.linear, f, h)));
        }
        CHECK(slope(hs, errs) > 2.8);
    }
}

TEST_CASE("Stratonovich scheme agrees with the Ito scheme on the converted problem") {
    const auto strat = builtin_problem("linear2d-strat");
    const auto ito = stratonovich_to_ito(strat);
    const auto f = make_functional("x", 2);
    SimulationConfig cfg;
    cfg.samples = 200000;
    const auto a = simulate_weak(SrkStepper(rs1wm(), strat), f, 1.0, 8, cfg);
    const auto b = simulate_weak(SrkStepper(ri1wm(), ito), f, 1.0, 8, cfg, 1);
    CHECK(std::abs(a.mean - b.mean) < 4 * std::hypot(a.stderr_, b.stderr_));
    const double exact = exact_expectation(*strat.linear, f, 1.0);
    CHECK(std::abs(a.mean - exact) < 4 * a.stderr_ + 1e-3);
}

TEST_CASE("stepper preconditions") {
    const auto implicit = tableau_from_json(testsupport::deterministic_scheme_json("1", "1/2", "1/2", true));
    CHECK_THROWS_WITH_AS(SrkStepper(implicit, builtin_problem("gbm")), doctest::Contains("implicit"), SimulationError);
    CHECK_THROWS_AS(SrkStepper(rs1wm(), builtin_problem("gbm")), SimulationError);
    CHECK_THROWS_AS(SrkStepper(ri1wm(), builtin_problem("gbm-strat")), SimulationError);
    auto bad = builtin_problem("gbm");
    bad.x0 = {1.0, 2.0};
    CHECK_THROWS_AS(SrkStepper(ri1wm(), bad), SimulationError);

    const SrkStepper st(ri1wm(), builtin_problem("gbm"));
    SimulationConfig cfg;
    cfg.samples = 0;
    CHECK_THROWS_AS(simulate_weak(st, make_functional("x", 1), 1.0, 2, cfg), SimulationError);
    cfg.samples = 10;
    CHECK_THROWS_AS(simulate_weak(st, make_functional("x", 1), 1.0, 0, cfg), SimulationError);
    CHECK_THROWS_AS(make_functional("cube", 1), SimulationError);
    CHECK_THROWS_AS(builtin_problem("heston"), SimulationError);
}

TEST_CASE("a blow-up names the trajectory") {
    auto p = riccati_ode();
    p.drift = [](double, const double* x, double* out) { out[0] = x[0] * x[0] * x[0]; };
    p.x0 = {10.0};
    const SrkStepper st(ri1wm(), p);
    SimulationConfig cfg;
    cfg.samples = 5;
    CHECK_THROWS_WITH_AS(simulate_weak(st, make_functional("x", 1), 4.0, 2, cfg), doctest::Contains("trajectory 0"),
                         SimulationError);
}

TEST_CASE("convergence study") {
    SimulationConfig cfg;
    cfg.samples = 200;
    const auto noisy = convergence_study(ri1wm(), builtin_problem("gbm"), make_functional("x", 1), 1.0, {2, 4, 8}, cfg);
    CHECK(noisy.status == "inconclusive");
    CHECK_FALSE(noisy.slope);

    cfg.samples = 100000;
    const auto rep = convergence_study(euler_maruyama(), builtin_problem("gbm"), make_functional("x", 1), 1.0,
                                       {2, 4, 8}, cfg);
    CHECK(rep.status == "ok");
    REQUIRE(rep.slope);
    REQUIRE(rep.slope_ci);
    CHECK(rep.slope_ci->first <= *rep.slope);
    CHECK(*rep.slope <= rep.slope_ci->second);
    CHECK(rep.rows.size() == 3);
    CHECK(rep.rows[0].h == 0.5);
    CHECK(rep.exact == doctest::Approx(0.1 * std::exp(1.5)));
    const auto csv = convergence_csv(rep);
    CHECK(csv.rfind("h,estimate,stderr,bias,slope-so-far\n0.5,", 0) == 0);

    CHECK_THROWS_AS(convergence_study(ri1wm(), riccati_ode(), make_functional("x", 1), 1.0, {2}, cfg), SimulationError);
}

TEST_CASE("independent chunk streams") {
    auto a = chunk_engine(1, 2, 0);
    auto b = chunk_engine(1, 2, 1);
    auto c = chunk_engine(1, 3, 0);
    auto a2 = chunk_engine(1, 2, 0);
    const auto va = a();
    CHECK(va != b());
    CHECK(va != c());
    CHECK(va == a2());
}
