#pragma once

#include "srkweak/simulate.hpp"
#include "srkweak/trees.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srkw {

class ExpansionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symmetric multilinear derivatives of f, the drift and the diffusion columns.
struct DerivativeOracle {
    int d = 1;
    int m = 1;
    int max_order = 0;
    /// f^(k)(x)(u_1, ..., u_k)
    std::function<double(int k, const Vec& x, const std::vector<Vec>& dirs)> f;
    /// a^(k)(x)(u_1, ..., u_k)
    std::function<Vec(int k, const Vec& x, const std::vector<Vec>& dirs)> a;
    /// b^j(k)(x)(u_1, ..., u_k), j in [1, m]
    std::function<Vec(int j, int k, const Vec& x, const std::vector<Vec>& dirs)> b;
};

/// Exact oracle for a linear SDE and a quadratic functional.
DerivativeOracle linear_oracle(const LinearSde& sde, const TestFunctional& f);

/// F(t)(x): scalar for a gamma root (returned as a 1-vector), d-vector otherwise.
/// Indices of t are used as concrete noise indices.
Vec elementary_differential(const Node& t, const DerivativeOracle& oracle, const Vec& x);

/// Truncated expansion of E f(X_dt) from x0, summing trees with rho <= p.
/// The tree set follows `calculus`; tau nodes use the drift as written in
/// that calculus.
double truncated_expectation(const DerivativeOracle& oracle, const Vec& x0, double dt, int p, Calculus calculus);

struct ExpansionRow {
    double dt, truncated, exact, error;
};

std::vector<ExpansionRow> expansion_table(const LinearSde& sde, const TestFunctional& f, int p,
                                          const std::vector<double>& dts);
std::string expansion_csv(const std::vector<ExpansionRow>& rows);

}  // namespace srkw
