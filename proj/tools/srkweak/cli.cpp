#include "cli.hpp"

#include "srkweak/conditions.hpp"
#include "srkweak/expansion.hpp"
#include "srkweak/simulate.hpp"
#include "srkweak/tableau.hpp"
#include "srkweak/trees.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace srkw::cli {

namespace {

// Limits that keep a single run within laptop resources.
constexpr double max_tree_order = 4.0;
constexpr int max_condition_order = 3;
constexpr int max_noise_dim = 4;
constexpr std::uint64_t max_samples = 1'000'000'000;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int to_halves(double order, const std::string& flag) {
    const double twice = 2 * order;
    const long r = std::lround(twice);
    if (order < 0 || std::abs(twice - static_cast<double>(r)) > 1e-9)
        throw UsageError(flag + " must be a non-negative multiple of 0.5");
    return static_cast<int>(r);
}

std::string rho_text(int halves) {
    return halves % 2 == 0 ? std::to_string(halves / 2) : std::to_string(halves / 2) + ".5";
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

Calculus calculus_flag(const std::string& text) {
    try {
        return parse_calculus(text);
    } catch (const std::exception&) {
        throw UsageError("--calculus must be ito or strat, got '" + text + "'");
    }
}

Tableau scheme_flag(const std::string& name) {
    try {
        return load_scheme(name);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

SdeProblem problem_flag(const std::string& name) {
    try {
        return load_problem(name);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

TestFunctional functional_flag(const std::string& id, int d) {
    try {
        return make_functional(id, d);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

template <class T>
std::vector<T> list_flag(const std::string& text, const std::string& flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(flag + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(flag + " is empty");
    return out;
}

void check_order_and_m(int order, int m) {
    if (order < 0 || order > max_condition_order)
        throw UsageError("--order must lie in 0.." + std::to_string(max_condition_order));
    if (m < 1 || m > max_noise_dim) throw UsageError("--m must lie in 1.." + std::to_string(max_noise_dim));
}

std::string tree_table(const std::string& set, int max_halves) {
    std::ostringstream os;
    if (set == "delta") {
        os << "tree,rho,alpha_delta,gamma\n";
        for (const auto& e : enumerate_ts_delta(max_halves))
            os << csv_quote(e.tree.to_string()) << ',' << rho_text(e.tree.rho_halves()) << ',' << e.alpha_delta << ','
               << e.tree.gamma_density() << '\n';
    } else if (set == "ito" || set == "strat") {
        const auto c = parse_calculus(set);
        os << "tree,rho,alpha\n";
        for (const auto& e : enumerate_ts_star(c, max_halves))
            os << csv_quote(e.tree.to_string()) << ',' << rho_text(e.tree.rho_halves()) << ','
               << (c == Calculus::ito ? e.alpha_ito : e.alpha_strat) << '\n';
    } else {
        os << "tree,rho,alpha_ito,alpha_strat\n";
        for (const auto& e : enumerate_ts_star(Calculus::strat, max_halves))
            os << csv_quote(e.tree.to_string()) << ',' << rho_text(e.tree.rho_halves()) << ',' << e.alpha_ito << ','
               << e.alpha_strat << '\n';
    }
    return os.str();
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weak order conditions and simulation for stochastic Runge-Kutta schemes", "srkweak"};
    app.require_subcommand(1);

    // trees
    auto* trees = app.add_subcommand("trees", "Tree tables");
    trees->require_subcommand(1);
    auto* trees_enum = trees->add_subcommand("enumerate", "List tree classes up to an order");
    std::string tree_set = "star";
    double tree_order = 2.0;
    std::string out_path;
    trees_enum->add_option("--set", tree_set, "delta, ito, strat or star")
        ->check(CLI::IsMember({"delta", "ito", "strat", "star"}));
    trees_enum->add_option("--max-order", tree_order, "Largest order (multiple of 0.5)");
    trees_enum->add_option("--out", out_path, "Output CSV path");

    // conditions
    auto* conds = app.add_subcommand("conditions", "Order conditions");
    conds->require_subcommand(1);
    std::string scheme_name, calculus_name, format = "text";
    int order = 2, m = 1;
    bool failures_only = false;
    auto* gen = conds->add_subcommand("generate", "List the conditions for an order");
    gen->add_option("--calculus", calculus_name, "ito or strat")->required();
    gen->add_option("--order", order, "Weak order p");
    gen->add_option("--m", m, "Noise dimension");
    gen->add_option("--out", out_path, "Output CSV path");
    CLI::App* verify_like[2];
    verify_like[0] = conds->add_subcommand("verify", "Check a scheme against the conditions");
    verify_like[1] = conds->add_subcommand("oracle", "Per concrete-index tree comparison");
    for (auto* sub : verify_like) {
        sub->add_option("--scheme", scheme_name, "Built-in name or JSON file")->required();
        sub->add_option("--calculus", calculus_name, "ito or strat (default: the scheme's)");
        sub->add_option("--order", order, "Weak order p");
        sub->add_option("--m", m, "Noise dimension");
        sub->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
        sub->add_flag("--failures-only", failures_only, "List violated conditions only");
        sub->add_option("--out", out_path, "Output path");
    }

    // expand
    auto* expand = app.add_subcommand("expand", "Truncated expansion of E f(X)");
    expand->require_subcommand(1);
    auto* exact = expand->add_subcommand("exact", "Compare the truncated expansion with closed-form moments");
    std::string problem_name = "gbm", f_id = "x2", dt_grid = "0.125,0.0625,0.03125,0.015625,0.0078125";
    exact->add_option("--problem", problem_name, "Built-in problem or JSON file");
    exact->add_option("--f", f_id, "x, x2 or norm2");
    exact->add_option("--order", order, "Truncation order p");
    exact->add_option("--dt-grid", dt_grid, "Comma-separated step sizes");
    exact->add_option("--out", out_path, "Output CSV path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs");
    simulate->require_subcommand(1);
    auto* conv = simulate->add_subcommand("convergence", "Weak error against step size");
    double T = 1.0;
    std::string steps_text = "2,4,8,16,32";
    SimulationConfig cfg;
    conv->add_option("--scheme", scheme_name, "Built-in name or JSON file")->required();
    conv->add_option("--problem", problem_name, "Built-in problem or JSON file");
    conv->add_option("--f", f_id, "x, x2 or norm2");
    conv->add_option("--T", T, "Final time");
    conv->add_option("--steps", steps_text, "Comma-separated step counts");
    conv->add_option("--samples", cfg.samples, "Trajectories per step size");
    conv->add_option("--seed", cfg.seed, "Base seed");
    conv->add_option("--threads", cfg.threads, "Worker threads");
    conv->add_option("--chunk", cfg.chunk, "Trajectories per random stream");
    conv->add_option("--out", out_path, "Output CSV path");

    // scheme
    auto* scheme = app.add_subcommand("scheme", "Scheme files");
    scheme->require_subcommand(1);
    auto* show = scheme->add_subcommand("show", "Print a scheme");
    show->add_option("--scheme", scheme_name, "Built-in name or JSON file")->required();
    std::string show_format = "text";
    show->add_option("--format", show_format, "text or json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? ok : usage;
    }

    try {
        if (trees_enum->parsed()) {
            const int halves = to_halves(tree_order, "--max-order");
            if (tree_order > max_tree_order) throw UsageError("--max-order is capped at " + rho_text(2 * static_cast<int>(max_tree_order)));
            emit(tree_table(tree_set, halves), out_path, out);
            return ok;
        }
        if (gen->parsed()) {
            const auto c = calculus_flag(calculus_name);
            check_order_and_m(order, m);
            emit(conditions_csv(generate_conditions(c, order, m)), out_path, out);
            return ok;
        }
        for (auto* sub : verify_like) {
            if (!sub->parsed()) continue;
            const Tableau tab = scheme_flag(scheme_name);
            const Calculus c = calculus_name.empty() ? tab.calculus : calculus_flag(calculus_name);
            check_order_and_m(order, m);
            const auto rep = sub == verify_like[0] ? verify_tableau(tab, c, order, m)
                                                    : concrete_coefficient_check(tab, c, order, m);
            emit(format == "csv" ? report_csv(rep, failures_only) : report_text(rep, failures_only), out_path, out);
            if (!out_path.empty()) out << report_text(rep, true);
            return rep.all_satisfied() ? ok : violations;
        }
        if (exact->parsed()) {
            const SdeProblem prob = problem_flag(problem_name);
            const TestFunctional f = functional_flag(f_id, prob.d);
            if (order < 0 || order > max_condition_order)
                throw UsageError("--order must lie in 0.." + std::to_string(max_condition_order));
            const auto dts = list_flag<double>(dt_grid, "--dt-grid");
            for (double dt : dts)
                if (!(dt > 0)) throw UsageError("--dt-grid values must be positive");
            emit(expansion_csv(expansion_table(*prob.linear, f, order, dts)), out_path, out);
            return ok;
        }
        if (conv->parsed()) {
            const Tableau tab = scheme_flag(scheme_name);
            SdeProblem prob = problem_flag(problem_name);
            const TestFunctional f = functional_flag(f_id, prob.d);
            const auto steps = list_flag<int>(steps_text, "--steps");
            for (int n : steps)
                if (n < 1) throw UsageError("--steps values must be positive");
            if (!(T > 0)) throw UsageError("--T must be positive");
            if (cfg.samples < 1 || cfg.samples > max_samples) throw UsageError("--samples must lie in 1..1e9");
            if (cfg.threads < 1) throw UsageError("--threads must be positive");
            if (cfg.chunk < 1) throw UsageError("--chunk must be positive");
            if (prob.calculus != tab.calculus) {
                if (prob.calculus != Calculus::strat)
                    throw UsageError("scheme '" + tab.name + "' is for Stratonovich SDEs but problem '" + prob.name +
                                     "' is Ito");
                err << "note: converting Stratonovich problem '" << prob.name << "' to Ito form\n";
                prob = stratonovich_to_ito(prob);
            }
            const auto rep = convergence_study(tab, prob, f, T, steps, cfg);
            emit(convergence_csv(rep), out_path, out);
            err << tab.name << " on " << prob.name << ", f = " << f.id << ": status " << rep.status;
            if (rep.slope) err << ", slope " << *rep.slope;
            if (rep.slope_ci) err << " (95% CI " << rep.slope_ci->first << " .. " << rep.slope_ci->second << ")";
            err << '\n';
            return rep.status == "ok" ? ok : violations;
        }
        if (show->parsed()) {
            const Tableau tab = scheme_flag(scheme_name);
            out << (show_format == "json" ? tableau_to_json(tab) : describe(tab));
            return ok;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    return usage;
}

}  // namespace srkw::cli
