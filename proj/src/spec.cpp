#include "qcd/spec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qcd {

using nlohmann::json;

namespace {

const char* kind_name(GateKind k) {
    switch (k) {
        case GateKind::one_qubit_constant: return "one_qubit_constant";
        case GateKind::one_qubit_parametrized: return "one_qubit_parametrized";
        case GateKind::two_qubit: return "two_qubit";
        case GateKind::local_product: return "local_product";
    }
    return "?";
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SpecError(where, "expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw SpecError(where, "unknown key '" + key + "'");
    }
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw SpecError(where, "expected an integer");
    return j.get<int>();
}

double get_angle(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            return parse_angle(j.get<std::string>());
        } catch (const std::exception& e) {
            throw SpecError(where, e.what());
        }
    }
    throw SpecError(where, "expected a number or an angle string like \"pi/4\"");
}

std::vector<double> get_angles(const json& j, const std::string& where) {
    // Empty is allowed here; an angle the gate never reads may stay empty.
    if (!j.is_array()) throw SpecError(where, "expected an array of angles");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_angle(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

AngleGrid grid_from_json(const json& j, const std::string& where, const AngleGrid& fallback) {
    check_keys(j, where, {"theta", "phi", "lambda"});
    AngleGrid g = fallback;
    if (j.contains("theta")) g.theta = get_angles(j["theta"], where + ".theta");
    if (j.contains("phi")) g.phi = get_angles(j["phi"], where + ".phi");
    if (j.contains("lambda")) g.lambda = get_angles(j["lambda"], where + ".lambda");
    return g;
}

// Angles a parametrized base actually reads must have candidates.
void check_grid_for(const std::string& base, const AngleGrid& g, const std::string& where) {
    if (g.theta.empty()) throw SpecError(where + ".theta", "expected a non-empty array of angles");
    if (base != "U3") return;
    if (g.phi.empty()) throw SpecError(where + ".phi", "expected a non-empty array of angles");
    if (g.lambda.empty()) throw SpecError(where + ".lambda", "expected a non-empty array of angles");
}

json grid_to_json(const AngleGrid& g) { return {{"theta", g.theta}, {"phi", g.phi}, {"lambda", g.lambda}}; }

Complex phase_from_json(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "1" || s == "+1") return {1, 0};
        if (s == "-1") return {-1, 0};
        if (s == "i" || s == "+i") return {0, 1};
        if (s == "-i") return {0, -1};
        throw SpecError(where, "unknown phase '" + s + "' (use 1, -1, i, -i or [re, im])");
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        const Complex c(j[0].get<double>(), j[1].get<double>());
        if (std::abs(std::abs(c) - 1.0) > 1e-9) throw SpecError(where, "phase must have modulus 1");
        return c;
    }
    throw SpecError(where, "expected [re, im] or one of \"1\", \"-1\", \"i\", \"-i\"");
}

bool same_grid(const AngleGrid& a, const AngleGrid& b) { return a == b; }

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        json rr = json::array(), ir = json::array();
        for (std::size_t k = 0; k < m.dim(); ++k) {
            rr.push_back(m(i, k).real());
            ir.push_back(m(i, k).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return json::array({re, im});
}

ComplexMatrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw SpecError(where, "expected [re_rows, im_rows]");
    const json& re = j[0];
    const json& im = j[1];
    if (!re.is_array() || !im.is_array() || re.size() != im.size() || re.empty())
        throw SpecError(where, "re and im must be non-empty arrays of equal length");
    const std::size_t n = re.size();
    std::vector<Complex> entries;
    entries.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row = where + " row " + std::to_string(i);
        if (!re[i].is_array() || !im[i].is_array() || re[i].size() != n || im[i].size() != n)
            throw SpecError(row, "expected " + std::to_string(n) + " entries");
        for (std::size_t k = 0; k < n; ++k) {
            if (!re[i][k].is_number() || !im[i][k].is_number()) throw SpecError(row, "entries must be numbers");
            entries.emplace_back(re[i][k].get<double>(), im[i][k].get<double>());
        }
    }
    try {
        return ComplexMatrix::from_entries(entries);
    } catch (const std::exception& e) {
        throw SpecError(where, e.what());
    }
}

json gate_to_json(const GateDef& g) {
    json j{{"name", g.name}, {"kind", kind_name(g.kind)}, {"base", g.base}, {"placement", g.placement}};
    if (g.angles) j["angles"] = {{"theta", g.angles->theta}, {"phi", g.angles->phi}, {"lambda", g.angles->lambda}};
    if (g.discretization) j["discretization"] = grid_to_json(*g.discretization);
    if (!g.factors.empty()) {
        json f = json::array();
        for (const auto& x : g.factors) f.push_back(gate_to_json(x));
        j["factors"] = f;
    }
    return j;
}

GateDef gate_from_json(const json& j, const std::string& where) {
    auto parse = [&](const std::string& text) {
        try {
            return parse_gate(text);
        } catch (const std::exception& e) {
            throw SpecError(where, e.what());
        }
    };
    if (j.is_string()) return parse(j.get<std::string>());
    check_keys(j, where, {"name", "kind", "base", "placement", "angles", "discretization", "factors"});

    GateDef g;
    if (j.contains("factors")) {
        const json& f = j["factors"];
        if (!f.is_array() || f.size() < 2) throw SpecError(where + ".factors", "expected two or more gates");
        std::string text;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const GateDef part = gate_from_json(f[i], where + ".factors[" + std::to_string(i) + "]");
            text += (i ? "x" : "") + gate_name(part);
        }
        g = parse(text);
    } else if (j.contains("base")) {
        if (!j["base"].is_string()) throw SpecError(where + ".base", "expected a string");
        std::string text = j["base"].get<std::string>();
        if (j.contains("placement")) {
            const json& p = j["placement"];
            if (!p.is_array()) throw SpecError(where + ".placement", "expected an array of qubit indices");
            for (std::size_t i = 0; i < p.size(); ++i)
                text += "_" + std::to_string(get_int(p[i], where + ".placement[" + std::to_string(i) + "]"));
        }
        g = parse(text);
    } else if (j.contains("name")) {
        if (!j["name"].is_string()) throw SpecError(where + ".name", "expected a string");
        g = parse(j["name"].get<std::string>());
    } else {
        throw SpecError(where, "needs one of name, base or factors");
    }

    if (j.contains("kind")) {
        if (!j["kind"].is_string() || j["kind"].get<std::string>() != kind_name(g.kind))
            throw SpecError(where + ".kind", std::string("does not match the gate (expected ") + kind_name(g.kind) + ")");
    }
    if (j.contains("angles") && j.contains("discretization"))
        throw SpecError(where, "give either angles or discretization, not both");
    if (j.contains("angles") || j.contains("discretization")) {
        if (g.kind != GateKind::one_qubit_parametrized) throw SpecError(where, "gate '" + g.name + "' takes no angles");
    }
    if (j.contains("angles")) {
        const json& a = j["angles"];
        const std::string w = where + ".angles";
        check_keys(a, w, {"theta", "phi", "lambda"});
        if (!a.contains("theta")) throw SpecError(w, "missing theta");
        Angles v;
        v.theta = get_angle(a["theta"], w + ".theta");
        if (a.contains("phi")) v.phi = get_angle(a["phi"], w + ".phi");
        if (a.contains("lambda")) v.lambda = get_angle(a["lambda"], w + ".lambda");
        g.angles = v;
        g.name = gate_name(g);
    }
    if (j.contains("discretization")) {
        g.angles.reset();
        g.discretization = grid_from_json(j["discretization"], where + ".discretization", AngleGrid::standard());
        check_grid_for(g.base, *g.discretization, where + ".discretization");
        g.name = gate_name(g);
    }
    if (j.contains("name") && (j.contains("base") || j.contains("factors"))) {
        if (!j["name"].is_string()) throw SpecError(where + ".name", "expected a string");
        g.name = j["name"].get<std::string>();
    }
    return g;
}

bool same_gate(const GateDef& a, const GateDef& b) {
    if (a.name != b.name || a.kind != b.kind || a.base != b.base || a.placement != b.placement) return false;
    if (a.angles != b.angles || a.discretization.has_value() != b.discretization.has_value()) return false;
    if (a.discretization && !same_grid(*a.discretization, *b.discretization)) return false;
    if (a.factors.size() != b.factors.size()) return false;
    for (std::size_t k = 0; k < a.factors.size(); ++k)
        if (!same_gate(a.factors[k], b.factors[k])) return false;
    return true;
}

DecompositionSpec parse_spec(const json& j) {
    check_keys(j, "", {"n_qubits", "max_depth", "input_gates", "target", "discretization", "variant", "phase_set",
                       "symmetry", "u3_convention", "run"});
    for (const char* key : {"n_qubits", "max_depth", "input_gates", "target"})
        if (!j.contains(key)) throw SpecError(key, "missing");

    DecompositionSpec s;
    s.n_qubits = get_int(j["n_qubits"], "n_qubits");
    if (s.n_qubits < 1 || s.n_qubits > 6) throw SpecError("n_qubits", "must be between 1 and 6");
    s.max_depth = get_int(j["max_depth"], "max_depth");
    if (s.max_depth < 1) throw SpecError("max_depth", "must be at least 1");

    if (j.contains("discretization")) s.discretization = grid_from_json(j["discretization"], "discretization", s.discretization);

    const json& gates = j["input_gates"];
    if (!gates.is_array() || gates.empty()) throw SpecError("input_gates", "expected a non-empty array");
    for (std::size_t i = 0; i < gates.size(); ++i)
        s.input_gates.push_back(gate_from_json(gates[i], "input_gates[" + std::to_string(i) + "]"));
    for (const auto& g : s.input_gates)
        if (g.kind == GateKind::one_qubit_parametrized && !g.angles && !g.discretization)
            check_grid_for(g.base, s.discretization, "discretization");

    const json& t = j["target"];
    if (t.is_string()) {
        s.target = t.get<std::string>();
    } else if (t.is_object()) {
        check_keys(t, "target", {"name", "matrix"});
        if (t.contains("name")) {
            if (!t["name"].is_string()) throw SpecError("target.name", "expected a string");
            s.target = t["name"].get<std::string>();
        }
        if (!t.contains("matrix")) throw SpecError("target", "object form needs a matrix");
        s.target_matrix = matrix_from_json(t["matrix"], "target.matrix");
        if (s.target.empty()) s.target = "custom";
    } else {
        throw SpecError("target", "expected a name or {name, matrix}");
    }

    if (j.contains("variant")) {
        if (!j["variant"].is_string()) throw SpecError("variant", "expected a string");
        try {
            s.variant = parse_variant(j["variant"].get<std::string>());
        } catch (const std::exception& e) {
            throw SpecError("variant", e.what());
        }
    }
    if (j.contains("phase_set")) {
        const json& p = j["phase_set"];
        if (!p.is_array() || p.empty()) throw SpecError("phase_set", "expected a non-empty array");
        s.phase_set.clear();
        for (std::size_t i = 0; i < p.size(); ++i)
            s.phase_set.push_back(phase_from_json(p[i], "phase_set[" + std::to_string(i) + "]"));
    }
    if (j.contains("symmetry")) {
        const json& v = j["symmetry"];
        if (v.is_boolean()) s.symmetry = v.get<bool>();
        else if (v == "on") s.symmetry = true;
        else if (v == "off") s.symmetry = false;
        else throw SpecError("symmetry", "expected \"on\", \"off\" or a boolean");
    }
    if (j.contains("u3_convention")) {
        const json& v = j["u3_convention"];
        if (v == "as_printed") s.convention = U3Convention::as_printed;
        else if (v == "half_angle") s.convention = U3Convention::half_angle;
        else throw SpecError("u3_convention", "expected \"as_printed\" or \"half_angle\"");
    }
    return s;
}

DecompositionSpec parse_spec_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        const auto nl = text.substr(0, upto).rfind('\n');
        const std::size_t col = nl == std::string_view::npos ? upto + 1 : upto - nl;
        throw SpecError("line " + std::to_string(line) + ", column " + std::to_string(col), "invalid JSON");
    }
    return parse_spec(j);
}

DecompositionSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError(path.string(), "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str());
}

json spec_to_json(const DecompositionSpec& s) {
    json gates = json::array();
    for (const auto& g : s.input_gates) gates.push_back(gate_to_json(g));
    json phases = json::array();
    for (const auto& p : s.phase_set) phases.push_back({p.real(), p.imag()});
    json j{{"n_qubits", s.n_qubits},
           {"max_depth", s.max_depth},
           {"input_gates", gates},
           {"discretization", grid_to_json(s.discretization)},
           {"variant", variant_name(s.variant)},
           {"phase_set", phases},
           {"symmetry", s.symmetry ? "on" : "off"},
           {"u3_convention", s.convention == U3Convention::as_printed ? "as_printed" : "half_angle"}};
    if (s.target_matrix) j["target"] = {{"name", s.target}, {"matrix", matrix_to_json(*s.target_matrix)}};
    else j["target"] = s.target;
    return j;
}

bool same_spec(const DecompositionSpec& a, const DecompositionSpec& b) {
    if (a.n_qubits != b.n_qubits || a.max_depth != b.max_depth || a.target != b.target) return false;
    if (a.input_gates.size() != b.input_gates.size()) return false;
    for (std::size_t k = 0; k < a.input_gates.size(); ++k)
        if (!same_gate(a.input_gates[k], b.input_gates[k])) return false;
    if (a.target_matrix.has_value() != b.target_matrix.has_value()) return false;
    if (a.target_matrix && a.target_matrix->max_abs_diff(*b.target_matrix) != 0.0) return false;
    return same_grid(a.discretization, b.discretization) && a.convention == b.convention && a.variant == b.variant &&
           a.phase_set == b.phase_set && a.symmetry == b.symmetry;
}

GateCatalog build_catalog(const DecompositionSpec& spec) {
    InputSetOptions opts;
    opts.default_grid = spec.discretization;
    opts.convention = spec.convention;
    const ComplexMatrix target = spec.target_matrix ? *spec.target_matrix : target_lookup(spec.target, spec.n_qubits);
    return make_catalog(spec.input_gates, spec.n_qubits, spec.target, target, opts);
}

CircuitModel build_model(const DecompositionSpec& spec) {
    AssembleOptions ao;
    ao.phase_set = spec.phase_set;
    ao.symmetry = spec.symmetry;
    return assemble(build_catalog(spec), spec.max_depth, spec.variant, ao);
}

json catalog_to_json(const GateCatalog& c) {
    json gates = json::array();
    for (const auto& e : c.inputs) gates.push_back(gate_to_json(e.def));
    return {{"n_qubits", c.n_qubits},
            {"gates", gates},
            {"target", {{"name", c.target_name}, {"matrix", matrix_to_json(c.target)}}}};
}

GateCatalog catalog_from_json(const json& j) {
    check_keys(j, "", {"n_qubits", "gates", "target", "u3_convention"});
    if (!j.contains("n_qubits") || !j.contains("gates") || !j.contains("target"))
        throw SpecError("", "catalog needs n_qubits, gates and target");
    const int n = get_int(j["n_qubits"], "n_qubits");
    std::vector<GateDef> defs;
    const json& g = j["gates"];
    if (!g.is_array()) throw SpecError("gates", "expected an array");
    for (std::size_t i = 0; i < g.size(); ++i) defs.push_back(gate_from_json(g[i], "gates[" + std::to_string(i) + "]"));
    InputSetOptions opts;
    if (j.contains("u3_convention") && j["u3_convention"] == "half_angle") opts.convention = U3Convention::half_angle;
    const json& t = j["target"];
    std::string name;
    ComplexMatrix target;
    if (t.is_string()) {
        name = t.get<std::string>();
        target = target_lookup(name, n);
    } else {
        check_keys(t, "target", {"name", "matrix"});
        name = t.value("name", std::string("custom"));
        target = matrix_from_json(t.at("matrix"), "target.matrix");
    }
    return make_catalog(defs, n, name, target, opts);
}

}  // namespace qcd
