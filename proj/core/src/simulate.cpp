#include "srkweak/simulate.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace srkw {

namespace {

void check_square(const Mat& M, int d, const std::string& what) {
    if (static_cast<int>(M.size()) != d) throw SimulationError(what + " must have " + std::to_string(d) + " rows");
    for (const auto& row : M)
        if (static_cast<int>(row.size()) != d)
            throw SimulationError(what + " must have " + std::to_string(d) + " columns");
}

void validate(const LinearSde& s) {
    const int d = s.d();
    if (d < 1) throw SimulationError("linear problem needs a non-empty x0");
    check_square(s.A, d, "A");
    if (static_cast<int>(s.a0.size()) != d) throw SimulationError("a0 must have length " + std::to_string(d));
    if (s.B.empty()) throw SimulationError("linear problem needs at least one noise column");
    if (s.c.size() != s.B.size()) throw SimulationError("B and c must list the same number of noise columns");
    for (std::size_t j = 0; j < s.B.size(); ++j) {
        check_square(s.B[j], d, "B[" + std::to_string(j) + "]");
        if (static_cast<int>(s.c[j].size()) != d)
            throw SimulationError("c[" + std::to_string(j) + "] must have length " + std::to_string(d));
    }
}

}  // namespace

LinearSde LinearSde::to_ito() const {
    LinearSde out = *this;
    out.calculus = Calculus::ito;
    if (calculus == Calculus::ito) return out;
    const int n = d();
    for (std::size_t j = 0; j < B.size(); ++j)
        for (int r = 0; r < n; ++r)
            for (int k = 0; k < n; ++k) {
                out.a0[r] += 0.5 * B[j][r][k] * c[j][k];
                for (int q = 0; q < n; ++q) out.A[r][q] += 0.5 * B[j][r][k] * B[j][k][q];
            }
    return out;
}

double TestFunctional::operator()(const double* x) const {
    double v = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        v += q[i] * x[i];
        for (std::size_t j = 0; j < q.size(); ++j) v += Q[i][j] * x[i] * x[j];
    }
    return v;
}

TestFunctional make_functional(const std::string& id, int d) {
    TestFunctional f{id, Mat(d, Vec(d, 0.0)), Vec(d, 0.0)};
    if (id == "x")
        f.q[0] = 1;
    else if (id == "x2")
        f.Q[0][0] = 1;
    else if (id == "norm2")
        for (int i = 0; i < d; ++i) f.Q[i][i] = 1;
    else
        throw SimulationError("unknown test functional '" + id + "' (expected x, x2 or norm2)");
    return f;
}

SdeProblem make_linear_problem(const std::string& name, const LinearSde& sde) {
    validate(sde);
    SdeProblem p;
    p.name = name;
    p.d = sde.d();
    p.m = sde.m();
    p.calculus = sde.calculus;
    p.x0 = sde.x0;
    p.linear = sde;
    const int d = p.d;
    p.drift = [sde, d](double, const double* x, double* out) {
        for (int r = 0; r < d; ++r) {
            double v = sde.a0[r];
            for (int k = 0; k < d; ++k) v += sde.A[r][k] * x[k];
            out[r] = v;
        }
    };
    p.diffusion = [sde, d](double, const double* x, int j, double* out) {
        for (int r = 0; r < d; ++r) {
            double v = sde.c[j][r];
            for (int k = 0; k < d; ++k) v += sde.B[j][r][k] * x[k];
            out[r] = v;
        }
    };
    p.diffusion_jacobian = [sde, d](double, const double*, int j, double* jac) {
        for (int r = 0; r < d; ++r)
            for (int k = 0; k < d; ++k) jac[r * d + k] = sde.B[j][r][k];
    };
    return p;
}

std::vector<std::string> builtin_problem_names() { return {"gbm", "gbm-strat", "linear2d", "linear2d-strat", "ou"}; }

SdeProblem builtin_problem(const std::string& name) {
    LinearSde s;
    if (name == "gbm" || name == "gbm-strat") {
        s.A = {{1.5}};
        s.a0 = {0.0};
        s.B = {{{0.1}}};
        s.c = {{0.0}};
        s.x0 = {0.1};
    } else if (name == "linear2d" || name == "linear2d-strat") {
        // Diagonal noise matrices commute.
        s.A = {{-0.5, 0.4}, {0.2, -0.3}};
        s.a0 = {0.1, 0.0};
        s.B = {{{0.3, 0.0}, {0.0, 0.2}}, {{0.1, 0.0}, {0.0, 0.4}}};
        s.c = {{0.0, 0.0}, {0.0, 0.0}};
        s.x0 = {1.0, 0.5};
    } else if (name == "ou") {
        s.A = {{-1.0}};
        s.a0 = {0.5};
        s.B = {{{0.0}}};
        s.c = {{0.3}};
        s.x0 = {1.0};
    } else {
        throw SimulationError("unknown problem '" + name + "'");
    }
    s.calculus = name.ends_with("-strat") ? Calculus::strat : Calculus::ito;
    return make_linear_problem(name, s);
}

LinearSde linear_sde_from_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SimulationError(std::string("problem file is not valid JSON: ") + e.what());
    }
    auto field = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw SimulationError(std::string("problem field '") + key + "': missing");
        return j.at(key);
    };
    LinearSde s;
    try {
        s.calculus = parse_calculus(j.value("calculus", std::string("ito")));
        s.x0 = field("x0").get<Vec>();
        s.A = field("A").get<Mat>();
        const int d = s.d();
        s.a0 = j.contains("a0") ? j.at("a0").get<Vec>() : Vec(d, 0.0);
        s.B = field("B").get<std::vector<Mat>>();
        s.c = j.contains("c") ? j.at("c").get<std::vector<Vec>>() : std::vector<Vec>(s.B.size(), Vec(d, 0.0));
    } catch (const json::exception& e) {
        throw SimulationError(std::string("problem field has the wrong type: ") + e.what());
    } catch (const TreeError& e) {
        throw SimulationError(std::string("problem field 'calculus': ") + e.what());
    }
    validate(s);
    return s;
}

SdeProblem load_problem(const std::string& name_or_path) {
    const auto names = builtin_problem_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin_problem(name_or_path);
    std::ifstream in(name_or_path);
    if (!in) throw SimulationError("cannot open problem '" + name_or_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        auto sde = linear_sde_from_json(ss.str());
        auto stem = name_or_path.substr(name_or_path.find_last_of('/') + 1);
        return make_linear_problem(stem, sde);
    } catch (const SimulationError& e) {
        throw SimulationError(name_or_path + ": " + e.what());
    }
}

SdeProblem stratonovich_to_ito(const SdeProblem& prob) {
    if (prob.calculus != Calculus::strat) throw SimulationError("problem '" + prob.name + "' is already Ito");
    if (!prob.diffusion_jacobian)
        throw SimulationError("problem '" + prob.name + "' has no diffusion Jacobians; cannot convert to Ito");
    SdeProblem out = prob;
    out.calculus = Calculus::ito;
    out.name = prob.name + "-ito";
    if (prob.linear) out.linear = prob.linear->to_ito();
    const int d = prob.d, m = prob.m;
    auto a = prob.drift;
    auto b = prob.diffusion;
    auto jac = prob.diffusion_jacobian;
    out.drift = [a, b, jac, d, m](double t, const double* x, double* res) {
        a(t, x, res);
        std::vector<double> col(d), J(d * d);
        for (int k = 0; k < m; ++k) {
            b(t, x, k, col.data());
            jac(t, x, k, J.data());
            for (int r = 0; r < d; ++r)
                for (int q = 0; q < d; ++q) res[r] += 0.5 * J[r * d + q] * col[q];
        }
    };
    return out;
}

std::pair<Vec, Mat> linear_moments(const LinearSde& sde_in, double T) {
    const LinearSde s = sde_in.to_ito();
    const int d = s.d();
    const int n = 1 + d + d * d;
    // State (1, mean, vec second moment) evolves linearly.
    auto rhs = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        const double one = w(0);
        Eigen::VectorXd mean = w.segment(1, d);
        Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(w.data() + 1 + d, d, d);
        Eigen::MatrixXd A(d, d);
        Eigen::VectorXd a0(d);
        for (int r = 0; r < d; ++r) {
            a0(r) = s.a0[r];
            for (int k = 0; k < d; ++k) A(r, k) = s.A[r][k];
        }
        Eigen::VectorXd dm = A * mean + a0 * one;
        Eigen::MatrixXd dP = A * P + P * A.transpose() + a0 * mean.transpose() + mean * a0.transpose();
        for (int j = 0; j < s.m(); ++j) {
            Eigen::MatrixXd B(d, d);
            Eigen::VectorXd c(d);
            for (int r = 0; r < d; ++r) {
                c(r) = s.c[j][r];
                for (int k = 0; k < d; ++k) B(r, k) = s.B[j][r][k];
            }
            dP += B * P * B.transpose() + B * mean * c.transpose() + c * mean.transpose() * B.transpose() +
                  c * c.transpose() * one;
        }
        out.segment(1, d) = dm;
        Eigen::Map<Eigen::MatrixXd>(out.data() + 1 + d, d, d) = dP;
        return out;
    };
    Eigen::MatrixXd M(n, n);
    for (int k = 0; k < n; ++k) M.col(k) = rhs(Eigen::VectorXd::Unit(n, k));
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(n);
    w0(0) = 1;
    for (int r = 0; r < d; ++r) {
        w0(1 + r) = s.x0[r];
        for (int k = 0; k < d; ++k) w0(1 + d + k * d + r) = s.x0[r] * s.x0[k];
    }
    Eigen::MatrixXd E = (M * T).exp();
    Eigen::VectorXd w = E * w0;
    Vec mean(d);
    Mat P(d, Vec(d));
    for (int r = 0; r < d; ++r) {
        mean[r] = w(1 + r);
        for (int k = 0; k < d; ++k) P[r][k] = w(1 + d + k * d + r);
    }
    return {mean, P};
}

double exact_expectation(const LinearSde& sde, const TestFunctional& f, double T) {
    const auto [mean, P] = linear_moments(sde, T);
    double v = 0;
    for (std::size_t i = 0; i < f.q.size(); ++i) {
        v += f.q[i] * mean[i];
        for (std::size_t j = 0; j < f.q.size(); ++j) v += f.Q[i][j] * P[i][j];
    }
    return v;
}

// Stepper.

SrkStepper::SrkStepper(const Tableau& tab, const SdeProblem& prob) : prob_(prob), scheme_(tab, prob.m) {
    if (!tab.is_explicit()) throw SimulationError("scheme '" + tab.name + "' is implicit; only explicit schemes can be simulated");
    if (tab.calculus != prob.calculus)
        throw SimulationError("scheme '" + tab.name + "' targets " + to_string(tab.calculus) + " SDEs but problem '" +
                              prob.name + "' is " + to_string(prob.calculus));
    if (!prob.drift || !prob.diffusion) throw SimulationError("problem '" + prob.name + "' lacks drift or diffusion");
    if (static_cast<int>(prob.x0.size()) != prob.d) throw SimulationError("problem '" + prob.name + "': x0 has wrong length");

    const auto& model = scheme_.model();
    for (const auto& th : model.thetas()) {
        std::vector<Term> terms;
        for (const auto& [k, c] : th.expr.terms()) {
            Term t{c.get_d(), k.h_halves, {}};
            for (std::size_t i = 0; i < k.mono.size(); ++i)
                if (k.mono[i]) t.factors.emplace_back(static_cast<int>(i), k.mono[i]);
            terms.push_back(std::move(t));
        }
        theta_terms_.push_back(std::move(terms));
    }
    for (const auto& p : model.primitives()) {
        samplers_.emplace_back(p.probs);
        Vec vals;
        for (const auto& v : p.values) vals.push_back(v.to_double());
        prim_values_.push_back(std::move(vals));
        prim_probs_.push_back(p.probs);
    }

    // Stage values actually needed: those feeding the output, closed under dependencies.
    std::set<std::pair<int, int>> needed;  // (stage, family)
    const int nf = static_cast<int>(scheme_.families().size());
    for (int F = 0; F < nf; ++F)
        for (const auto& [i, pieces] : scheme_.z_pieces(F))
            if (!pieces.empty()) needed.insert({i, F});
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& [key, pieces] : scheme_.Z_pieces()) {
            auto [row, col, i, j] = key;
            if (!pieces.empty() && needed.count({i, row}) && needed.insert({j, col}).second) grew = true;
        }
    }
    auto combo = [&](const std::vector<ConcreteScheme::Piece>& pieces) {
        Combo c{static_cast<int>(combos_.size()), {}};
        for (const auto& p : pieces) c.parts.emplace_back(p.theta, p.coef.get_d());
        combos_.push_back(std::move(c));
        return static_cast<int>(combos_.size()) - 1;
    };
    std::map<std::pair<int, int>, int> slot;
    for (const auto& [i, F] : needed) {
        StageEval e{F, i, slots_, scheme_.c(F)[i].get_d(), {}};
        slot[{i, F}] = slots_++;
        for (const auto& [key, pieces] : scheme_.Z_pieces()) {
            auto [row, col, ii, j] = key;
            if (row != F || ii != i || pieces.empty()) continue;
            e.deps.emplace_back(combo(pieces), slot.at({j, col}));
        }
        evals_.push_back(std::move(e));
    }
    for (int F = 0; F < nf; ++F)
        for (const auto& [i, pieces] : scheme_.z_pieces(F))
            if (!pieces.empty()) output_.emplace_back(combo(pieces), slot.at({i, F}));
}

void SrkStepper::eval_thetas(double h, const double* prim, double* theta) const {
    const double sh = std::sqrt(h);
    for (std::size_t t = 0; t < theta_terms_.size(); ++t) {
        double total = 0;
        for (const auto& term : theta_terms_[t]) {
            double v = term.coef;
            if (term.h_halves > 0)
                for (int e = 0; e < term.h_halves; ++e) v *= sh;
            else
                for (int e = 0; e < -term.h_halves; ++e) v /= sh;
            for (auto [p, pw] : term.factors)
                for (int e = 0; e < pw; ++e) v *= prim[p];
            total += v;
        }
        theta[t] = total;
    }
}

void SrkStepper::theta_from_choice(double h, const std::vector<int>& choice, double* theta) const {
    Vec prim(choice.size());
    for (std::size_t i = 0; i < choice.size(); ++i) prim[i] = prim_values_.at(i).at(choice[i]);
    eval_thetas(h, prim.data(), theta);
}

void SrkStepper::step(double t, double h, const double* theta, double* y) const {
    const int d = prob_.d;
    thread_local std::vector<double> buf;
    const std::size_t need = combos_.size() + static_cast<std::size_t>(slots_ + 1) * d;
    if (buf.size() < need) buf.resize(need);
    double* cv = buf.data();
    double* K = cv + combos_.size();
    double* H = K + static_cast<std::size_t>(slots_) * d;
    for (std::size_t c = 0; c < combos_.size(); ++c) {
        double v = 0;
        for (auto [th, coef] : combos_[c].parts) v += coef * theta[th];
        cv[c] = v;
    }
    for (const auto& e : evals_) {
        std::copy(y, y + d, H);
        for (auto [c, s] : e.deps) {
            const double w = cv[c];
            if (w == 0) continue;
            const double* k = K + static_cast<std::size_t>(s) * d;
            for (int r = 0; r < d; ++r) H[r] += w * k[r];
        }
        double* out = K + static_cast<std::size_t>(e.slot) * d;
        const double te = t + e.c * h;
        if (e.family == 0)
            prob_.drift(te, H, out);
        else
            prob_.diffusion(te, H, scheme_.families()[e.family].k - 1, out);
    }
    for (auto [c, s] : output_) {
        const double w = cv[c];
        const double* k = K + static_cast<std::size_t>(s) * d;
        for (int r = 0; r < d; ++r) y[r] += w * k[r];
    }
}

// Monte Carlo.

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(chunk), hi(chunk)};
    return std::mt19937_64(seq);
}

namespace {

/// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0, comp = 0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct ChunkStats {
    std::uint64_t n = 0;
    double sum = 0;
    double mean = 0;
    double m2 = 0;
};

}  // namespace

MonteCarloEstimate simulate_weak(const SrkStepper& stepper, const TestFunctional& f, double T, int steps,
                                 const SimulationConfig& cfg, std::uint64_t stream) {
    if (steps < 1) throw SimulationError("number of steps must be positive");
    if (cfg.samples < 1) throw SimulationError("number of samples must be positive");
    if (cfg.chunk < 1) throw SimulationError("chunk size must be positive");
    if (!(T > 0)) throw SimulationError("final time must be positive");
    const double h = T / steps;
    const std::uint64_t nchunks = (cfg.samples + cfg.chunk - 1) / cfg.chunk;
    std::vector<ChunkStats> stats(nchunks);
    std::atomic<std::uint64_t> next{0};
    std::vector<std::string> errors(nchunks);

    const SdeProblem& prob = stepper.problem();
    const int d = prob.d;

    auto run_chunk = [&](std::uint64_t chunk) {
        auto rng = chunk_engine(cfg.seed, stream, chunk);
        const std::uint64_t begin = chunk * cfg.chunk;
        const std::uint64_t end = std::min(cfg.samples, begin + cfg.chunk);
        std::vector<double> theta(stepper.theta_count()), y(d);
        CompensatedSum sum;
        ChunkStats st;
        for (std::uint64_t traj = begin; traj < end; ++traj) {
            std::copy(prob.x0.begin(), prob.x0.end(), y.begin());
            for (int n = 0; n < steps; ++n) {
                stepper.sample(h, rng, theta.data());
                stepper.step(n * h, h, theta.data(), y.data());
            }
            const double v = f(y.data());
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "trajectory " << traj << " became non-finite (h = " << h << ", " << steps << " steps)";
                throw SimulationError(os.str());
            }
            sum.add(v);
            ++st.n;
            const double delta = v - st.mean;
            st.mean += delta / static_cast<double>(st.n);
            st.m2 += delta * (v - st.mean);
        }
        st.sum = sum.value();
        stats[chunk] = st;
    };
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            try {
                run_chunk(c);
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(nchunks)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw SimulationError(e);

    // Reduction in chunk order keeps the result independent of the thread count.
    CompensatedSum total;
    ChunkStats acc;
    for (const auto& st : stats) {
        total.add(st.sum);
        if (acc.n == 0) {
            acc = st;
            continue;
        }
        const double n1 = static_cast<double>(acc.n), n2 = static_cast<double>(st.n);
        const double delta = st.mean - acc.mean;
        acc.m2 += st.m2 + delta * delta * n1 * n2 / (n1 + n2);
        acc.mean += delta * n2 / (n1 + n2);
        acc.n += st.n;
    }
    MonteCarloEstimate est;
    est.samples = acc.n;
    est.mean = total.value() / static_cast<double>(acc.n);
    est.stderr_ = acc.n > 1 ? std::sqrt(acc.m2 / static_cast<double>(acc.n - 1) / static_cast<double>(acc.n)) : 0.0;
    return est;
}

double one_step_expectation(const SrkStepper& stepper, const TestFunctional& f, const Vec& x, double h) {
    const auto& prims = stepper.primitives();
    std::vector<int> choice(prims.size(), 0);
    std::vector<double> theta(stepper.theta_count());
    CompensatedSum total;
    for (;;) {
        Rational prob = 1;
        for (std::size_t i = 0; i < prims.size(); ++i) prob *= prims[i].probs[choice[i]];
        stepper.theta_from_choice(h, choice, theta.data());
        Vec y = x;
        stepper.step(0.0, h, theta.data(), y.data());
        total.add(prob.get_d() * f(y.data()));
        std::size_t i = 0;
        while (i < prims.size() && choice[i] + 1 == static_cast<int>(prims[i].probs.size())) choice[i++] = 0;
        if (i == prims.size()) break;
        ++choice[i];
    }
    return total.value();
}

namespace {

struct Fit {
    double slope;
    std::optional<std::pair<double, double>> ci;
};

std::optional<Fit> fit_slope(const std::vector<ConvergenceRow>& rows, std::size_t upto) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i <= upto && i < rows.size(); ++i)
        if (rows[i].used) {
            xs.push_back(std::log(rows[i].h));
            ys.push_back(std::log(rows[i].bias));
        }
    const std::size_t n = xs.size();
    if (n < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    Fit fit{sxy / sxx, std::nullopt};
    if (n > 2) {
        double sse = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - my - fit.slope * (xs[i] - mx);
            sse += r * r;
        }
        const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
        boost::math::students_t dist(static_cast<double>(n - 2));
        const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
        fit.ci = std::make_pair(fit.slope - q * se, fit.slope + q * se);
    }
    return fit;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

WeakErrorReport convergence_study(const Tableau& tab, const SdeProblem& prob, const TestFunctional& f, double T,
                                  const std::vector<int>& steps, const SimulationConfig& cfg) {
    if (!prob.linear) throw SimulationError("problem '" + prob.name + "' has no closed-form moments");
    if (steps.empty()) throw SimulationError("no step sizes given");
    WeakErrorReport rep;
    rep.scheme = tab.name;
    rep.problem = prob.name;
    rep.functional = f.id;
    rep.samples = cfg.samples;
    rep.seed = cfg.seed;
    rep.exact = exact_expectation(*prob.linear, f, T);
    const SrkStepper stepper(tab, prob);
    for (int n : steps) {
        if (n < 1) throw SimulationError("step counts must be positive");
        const auto est = simulate_weak(stepper, f, T, n, cfg, static_cast<std::uint64_t>(n));
        ConvergenceRow row;
        row.h = T / n;
        row.steps = n;
        row.estimate = est.mean;
        row.stderr_ = est.stderr_;
        row.bias = std::abs(rep.exact - est.mean);
        row.used = row.bias > 0 && row.stderr_ < row.bias / 3;
        rep.rows.push_back(row);
        auto fit = fit_slope(rep.rows, rep.rows.size() - 1);
        if (fit) rep.rows.back().slope_so_far = fit->slope;
    }
    if (auto fit = fit_slope(rep.rows, rep.rows.size())) {
        rep.slope = fit->slope;
        rep.slope_ci = fit->ci;
        rep.status = "ok";
    } else {
        rep.status = "inconclusive";
    }
    return rep;
}

std::string convergence_csv(const WeakErrorReport& rep) {
    std::string out = "h,estimate,stderr,bias,slope-so-far\n";
    for (const auto& r : rep.rows) {
        out += num(r.h) + ',' + num(r.estimate) + ',' + num(r.stderr_) + ',' + num(r.bias) + ',';
        if (r.slope_so_far) out += num(*r.slope_so_far);
        out += '\n';
    }
    return out;
}

}  // namespace srkw
