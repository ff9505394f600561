#include "srkweak/tableau.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace srkw {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw SchemeError("scheme field '" + path + "': " + what);
}

const ordered_json& need(const ordered_json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) field_error(path + "." + key, "missing");
    return j.at(key);
}

std::string get_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) field_error(path, "expected a string");
    return j.get<std::string>();
}

std::string opt_string(const ordered_json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return {};
    return get_string(j.at(key), path + "." + key);
}

int get_int(const ordered_json& j, const std::string& path) {
    if (!j.is_number_integer()) field_error(path, "expected an integer");
    return j.get<int>();
}

Rational get_rational(const ordered_json& j, const std::string& path) {
    try {
        if (j.is_number_integer()) return Rational(j.get<long>());
        if (j.is_string()) return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        field_error(path, e.what());
    }
    field_error(path, "expected a rational string \"p/q\"");
}

std::vector<Rational> get_vector(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) field_error(path, "expected an array");
    std::vector<Rational> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_rational(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

RMatrix get_matrix(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) field_error(path, "expected an array of rows");
    RMatrix m;
    for (std::size_t i = 0; i < j.size(); ++i) m.push_back(get_vector(j[i], path + "[" + std::to_string(i) + "]"));
    return m;
}

std::vector<std::string> get_strings(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) field_error(path, "expected an array of strings");
    std::vector<std::string> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

template <class T, class F>
T wrap(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const SchemeError&) {
        throw;
    } catch (const std::exception& e) {
        field_error(path, e.what());
    }
}

ordered_json rational_json(const Rational& q) { return to_string(q); }

ordered_json vector_json(std::vector<Rational> v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
    ordered_json a = ordered_json::array();
    for (const auto& x : v) a.push_back(rational_json(x));
    return a;
}

ordered_json matrix_json(const RMatrix& m) {
    ordered_json a = ordered_json::array();
    for (const auto& row : m) a.push_back(vector_json(row));
    while (!a.empty() && a.back().empty()) a.erase(a.size() - 1);
    return a;
}

SymbolFamily symbol_family(const ordered_json& j, const std::string& path) {
    SymbolFamily f;
    f.name = get_string(need(j, "name", path), path + ".name");
    if (j.contains("args")) f.args = get_strings(j.at("args"), path + ".args");
    const auto& cases = need(j, "cases", path);
    if (!cases.is_array() || cases.empty()) field_error(path + ".cases", "expected a non-empty array");
    for (std::size_t i = 0; i < cases.size(); ++i) {
        std::string p = path + ".cases[" + std::to_string(i) + "]";
        f.cases.push_back({opt_string(cases[i], "when", p), get_string(need(cases[i], "expr", p), p + ".expr")});
    }
    return f;
}

ordered_json symbol_family_json(const SymbolFamily& f) {
    ordered_json j;
    j["name"] = f.name;
    j["args"] = f.args;
    ordered_json cases = ordered_json::array();
    for (const auto& c : f.cases) {
        ordered_json cj;
        if (!c.when.empty()) cj["when"] = c.when;
        cj["expr"] = c.expr;
        cases.push_back(cj);
    }
    j["cases"] = cases;
    return j;
}

RVModelSpec model_from(const ordered_json& j, const std::string& path) {
    RVModelSpec m;
    const auto& prims = need(j, "primitives", path);
    if (!prims.is_array()) field_error(path + ".primitives", "expected an array");
    for (std::size_t i = 0; i < prims.size(); ++i) {
        std::string p = path + ".primitives[" + std::to_string(i) + "]";
        PrimitiveFamily f;
        f.name = get_string(need(prims[i], "name", p), p + ".name");
        if (prims[i].contains("args")) f.args = get_strings(prims[i].at("args"), p + ".args");
        f.when = opt_string(prims[i], "when", p);
        const auto& sup = need(prims[i], "support", p);
        if (!sup.is_array() || sup.empty()) field_error(p + ".support", "expected a non-empty array");
        for (std::size_t k = 0; k < sup.size(); ++k) {
            std::string q = p + ".support[" + std::to_string(k) + "]";
            SupportPoint sp;
            sp.coef = get_rational(need(sup[k], "coef", q), q + ".coef");
            sp.radicand = sup[k].contains("radicand") ? get_rational(sup[k].at("radicand"), q + ".radicand") : Rational(1);
            sp.h_halves = sup[k].contains("h_halves") ? get_int(sup[k].at("h_halves"), q + ".h_halves") : 0;
            sp.prob = get_rational(need(sup[k], "prob", q), q + ".prob");
            f.support.push_back(sp);
        }
        m.primitives.push_back(std::move(f));
    }
    if (j.contains("derived")) {
        const auto& d = j.at("derived");
        if (!d.is_array()) field_error(path + ".derived", "expected an array");
        for (std::size_t i = 0; i < d.size(); ++i)
            m.derived.push_back(symbol_family(d[i], path + ".derived[" + std::to_string(i) + "]"));
    }
    const auto& th = need(j, "theta", path);
    if (!th.is_array()) field_error(path + ".theta", "expected an array");
    for (std::size_t i = 0; i < th.size(); ++i)
        m.theta.push_back(symbol_family(th[i], path + ".theta[" + std::to_string(i) + "]"));
    return m;
}

ordered_json model_json(const RVModelSpec& m) {
    ordered_json j;
    ordered_json prims = ordered_json::array();
    for (const auto& f : m.primitives) {
        ordered_json pj;
        pj["name"] = f.name;
        pj["args"] = f.args;
        if (!f.when.empty()) pj["when"] = f.when;
        ordered_json sup = ordered_json::array();
        for (const auto& sp : f.support) {
            ordered_json s;
            s["coef"] = to_string(sp.coef);
            if (sp.radicand != 1) s["radicand"] = to_string(sp.radicand);
            s["h_halves"] = sp.h_halves;
            s["prob"] = to_string(sp.prob);
            sup.push_back(s);
        }
        pj["support"] = sup;
        prims.push_back(pj);
    }
    j["primitives"] = prims;
    ordered_json derived = ordered_json::array();
    for (const auto& f : m.derived) derived.push_back(symbol_family_json(f));
    j["derived"] = derived;
    ordered_json theta = ordered_json::array();
    for (const auto& f : m.theta) theta.push_back(symbol_family_json(f));
    j["theta"] = theta;
    return j;
}

}  // namespace

Tableau tableau_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw SchemeError(std::string("scheme file is not valid JSON: ") + e.what());
    }
    const std::string root = "$";
    Tableau t;
    t.name = get_string(need(j, "name", root), "name");
    t.description = opt_string(j, "description", root);
    t.calculus = wrap<Calculus>("calculus", [&] { return parse_calculus(get_string(need(j, "calculus", root), "calculus")); });
    t.order = get_int(need(j, "order", root), "order");
    t.stages = get_int(need(j, "stages", root), "stages");
    for (const auto& f : get_strings(need(j, "families", root), "families"))
        t.families.push_back(wrap<FamilyPattern>("families", [&] { return FamilyPattern::parse(f); }));
    t.alpha = get_vector(need(j, "alpha", root), "alpha");

    auto matrix_rules = [&](const char* key, bool with_theta) {
        std::vector<MatrixRule> out;
        if (!j.contains(key)) return out;
        const auto& arr = j.at(key);
        if (!arr.is_array()) field_error(key, "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string p = std::string(key) + "[" + std::to_string(i) + "]";
            MatrixRule r;
            if (with_theta)
                r.theta = wrap<ThetaRef>(p + ".theta",
                                         [&] { return ThetaRef::parse(get_string(need(arr[i], "theta", p), p + ".theta")); });
            r.row = wrap<FamilyPattern>(p + ".row", [&] { return FamilyPattern::parse(get_string(need(arr[i], "row", p), p + ".row")); });
            if (with_theta)
                r.col = wrap<FamilyPattern>(p + ".col", [&] { return FamilyPattern::parse(get_string(need(arr[i], "col", p), p + ".col")); });
            r.when = opt_string(arr[i], "when", p);
            r.matrix = get_matrix(need(arr[i], "matrix", p), p + ".matrix");
            out.push_back(std::move(r));
        }
        return out;
    };
    t.A = matrix_rules("A", false);
    t.B = matrix_rules("B", true);
    if (j.contains("gamma")) {
        const auto& arr = j.at("gamma");
        if (!arr.is_array()) field_error("gamma", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string p = "gamma[" + std::to_string(i) + "]";
            VectorRule r;
            r.theta = wrap<ThetaRef>(p + ".theta", [&] { return ThetaRef::parse(get_string(need(arr[i], "theta", p), p + ".theta")); });
            r.family = wrap<FamilyPattern>(p + ".family",
                                           [&] { return FamilyPattern::parse(get_string(need(arr[i], "family", p), p + ".family")); });
            r.when = opt_string(arr[i], "when", p);
            r.values = get_vector(need(arr[i], "vector", p), p + ".vector");
            t.gamma.push_back(std::move(r));
        }
    }
    t.model = model_from(need(j, "rv_model", root), "rv_model");
    wrap<int>("stages", [&] {
        t.normalize();
        return 0;
    });
    return t;
}

std::string tableau_to_json(const Tableau& tab) {
    ordered_json j;
    j["name"] = tab.name;
    if (!tab.description.empty()) j["description"] = tab.description;
    j["calculus"] = to_string(tab.calculus);
    j["order"] = tab.order;
    j["stages"] = tab.stages;
    ordered_json fams = ordered_json::array();
    for (const auto& f : tab.families) fams.push_back(f.to_string());
    j["families"] = fams;
    j["alpha"] = vector_json(tab.alpha);
    ordered_json a = ordered_json::array();
    for (const auto& r : tab.A) {
        ordered_json rj;
        rj["row"] = r.row.to_string();
        if (!r.when.empty()) rj["when"] = r.when;
        rj["matrix"] = matrix_json(r.matrix);
        a.push_back(rj);
    }
    j["A"] = a;
    ordered_json b = ordered_json::array();
    for (const auto& r : tab.B) {
        ordered_json rj;
        rj["theta"] = r.theta.to_string();
        rj["row"] = r.row.to_string();
        rj["col"] = r.col.to_string();
        if (!r.when.empty()) rj["when"] = r.when;
        rj["matrix"] = matrix_json(r.matrix);
        b.push_back(rj);
    }
    j["B"] = b;
    ordered_json g = ordered_json::array();
    for (const auto& r : tab.gamma) {
        ordered_json rj;
        rj["theta"] = r.theta.to_string();
        rj["family"] = r.family.to_string();
        if (!r.when.empty()) rj["when"] = r.when;
        rj["vector"] = vector_json(r.values);
        g.push_back(rj);
    }
    j["gamma"] = g;
    j["rv_model"] = model_json(tab.model);
    return j.dump(2) + "\n";
}

Tableau load_tableau_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemeError("cannot open scheme file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return tableau_from_json(ss.str());
    } catch (const SchemeError& e) {
        throw SchemeError(path + ": " + e.what());
    }
}

Tableau load_scheme(const std::string& name_or_path) {
    std::string n = name_or_path;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == "ri1wm") return ri1wm();
    if (n == "rs1wm") return rs1wm();
    if (n == "euler" || n == "em") return euler_maruyama(false);
    if (n == "euler3") return euler_maruyama(true);
    return load_tableau_file(name_or_path);
}

}  // namespace srkw
