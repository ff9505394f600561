#pragma once

#include "srkweak/tableau.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace srkw {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// dX = (A X + a0) dt + sum_j (B_j X + c_j) * dW^j, interpreted in `calculus`.
struct LinearSde {
    Calculus calculus = Calculus::ito;
    Mat A;
    Vec a0;
    std::vector<Mat> B;
    std::vector<Vec> c;
    Vec x0;
    int d() const { return static_cast<int>(x0.size()); }
    int m() const { return static_cast<int>(B.size()); }
    /// Same process written with Ito differentials.
    LinearSde to_ito() const;
};

/// Quadratic test functional f(x) = x'Qx + q'x.
struct TestFunctional {
    std::string id;
    Mat Q;
    Vec q;
    double operator()(const double* x) const;
};

/// "x" (first component), "x2" (its square) or "norm2" (squared norm).
TestFunctional make_functional(const std::string& id, int d);

struct SdeProblem {
    std::string name;
    int d = 1;
    int m = 1;
    Calculus calculus = Calculus::ito;
    /// out = a(t, x)
    std::function<void(double t, const double* x, double* out)> drift;
    /// out = b^j(t, x), j in [0, m)
    std::function<void(double t, const double* x, int j, double* out)> diffusion;
    /// jac[r*d + c] = d b^{r,j} / d x^c; optional.
    std::function<void(double t, const double* x, int j, double* jac)> diffusion_jacobian;
    Vec x0;
    std::optional<LinearSde> linear;
};

SdeProblem make_linear_problem(const std::string& name, const LinearSde& sde);
/// gbm, gbm-strat, linear2d, linear2d-strat, ou.
SdeProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();
/// Built-in name or a JSON file describing a LinearSde.
SdeProblem load_problem(const std::string& name_or_path);
LinearSde linear_sde_from_json(const std::string& text);

/// Drift a + 1/2 sum_k (db^k) b^k; requires the Jacobians.
SdeProblem stratonovich_to_ito(const SdeProblem& prob);

/// E f(X_T) for linear problems, from the first two moments.
double exact_expectation(const LinearSde& sde, const TestFunctional& f, double T);
/// Mean and second-moment matrix at time T.
std::pair<Vec, Mat> linear_moments(const LinearSde& sde, double T);

/// Explicit SRK stepper with precomputed stage dependencies.
class SrkStepper {
public:
    SrkStepper(const Tableau& tab, const SdeProblem& prob);

    const ConcreteScheme& scheme() const { return scheme_; }
    const SdeProblem& problem() const { return prob_; }
    int theta_count() const { return static_cast<int>(scheme_.model().thetas().size()); }

    /// theta: one value per theta instance of the model.
    void step(double t, double h, const double* theta, double* y) const;

    /// Fresh theta realizations for step size h.
    template <class Rng>
    void sample(double h, Rng& rng, double* theta) const;

    /// Values of theta for explicit primitive support indices (enumeration).
    void theta_from_choice(double h, const std::vector<int>& choice, double* theta) const;

    /// Primitive support sizes and probabilities, for exact enumeration.
    const std::vector<ConcretePrimitive>& primitives() const { return scheme_.model().primitives(); }

private:
    struct Term {
        double coef;
        int h_halves;
        std::vector<std::pair<int, int>> factors;  // (primitive, power)
    };
    struct Combo {
        int target;  // slot index
        std::vector<std::pair<int, double>> parts;  // (theta, coef)
    };
    struct StageEval {
        int family;
        int stage;
        int slot;  // row of K
        double c;
        std::vector<std::pair<int, int>> deps;  // (Z combo index, K slot)
    };

    void eval_thetas(double h, const double* prim, double* theta) const;

    SdeProblem prob_;
    ConcreteScheme scheme_;
    std::vector<std::vector<Term>> theta_terms_;
    std::vector<std::vector<Rational>> prim_probs_;
    std::vector<std::vector<double>> prim_values_;
    std::vector<DiscreteSampler> samplers_;
    std::vector<Combo> combos_;  // Z entries, then output weights
    std::vector<StageEval> evals_;
    std::vector<std::pair<int, int>> output_;  // (combo index, K slot)
    int slots_ = 0;
};

struct MonteCarloEstimate {
    double mean = 0;
    double stderr_ = 0;
    std::uint64_t samples = 0;
};

struct SimulationConfig {
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::uint64_t chunk = 65536;
};

/// Mean and standard error of f(Y_N) with N = steps, h = T / steps.
MonteCarloEstimate simulate_weak(const SrkStepper& stepper, const TestFunctional& f, double T, int steps,
                                 const SimulationConfig& cfg, std::uint64_t stream = 0);

/// E f(Y_1) after one step, by exhausting the discrete sample space.
double one_step_expectation(const SrkStepper& stepper, const TestFunctional& f, const Vec& x, double h);

struct ConvergenceRow {
    double h = 0;
    int steps = 0;
    double estimate = 0;
    double stderr_ = 0;
    double bias = 0;  // |exact - estimate|
    bool used = false;
    std::optional<double> slope_so_far;
};

struct WeakErrorReport {
    std::string scheme, problem, functional;
    double exact = 0;
    std::vector<ConvergenceRow> rows;
    std::optional<double> slope;
    std::optional<std::pair<double, double>> slope_ci;  // 95 %
    std::string status;  // "ok" or "inconclusive"
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Least-squares slope of log|bias| against log h over rows with stderr < bias/3.
WeakErrorReport convergence_study(const Tableau& tab, const SdeProblem& prob, const TestFunctional& f, double T,
                                  const std::vector<int>& steps, const SimulationConfig& cfg);
std::string convergence_csv(const WeakErrorReport& rep);

/// One mt19937_64 per (seed, stream, chunk).
std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk);

template <class Rng>
void SrkStepper::sample(double h, Rng& rng, double* theta) const {
    double prim[64];
    std::vector<double> big;
    double* p = prim;
    if (samplers_.size() > 64) {
        big.resize(samplers_.size());
        p = big.data();
    }
    for (std::size_t i = 0; i < samplers_.size(); ++i) p[i] = prim_values_[i][samplers_[i].draw(rng)];
    eval_thetas(h, p, theta);
}

}  // namespace srkw
