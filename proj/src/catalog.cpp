#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "qcd/gates.hpp"

namespace qcd {

namespace {

std::vector<GateDef> expand(const GateDef& def, const InputSetOptions& options) {
    if (def.kind != GateKind::one_qubit_parametrized || def.angles) return {def};
    const AngleGrid& grid = def.discretization ? *def.discretization : options.default_grid;
    std::vector<GateDef> out;
    const bool single = def.base != "U3";
    if (grid.theta.empty() || (!single && (grid.phi.empty() || grid.lambda.empty())))
        throw std::invalid_argument("empty angle discretization for '" + def.name + "'");
    const std::vector<double> zero{0.0};
    const auto& phis = single ? zero : grid.phi;
    const auto& lams = single ? zero : grid.lambda;
    for (double t : grid.theta)
        for (double p : phis)
            for (double l : lams) {
                GateDef g = def;
                g.discretization.reset();
                g.angles = Angles{t, p, l};
                g.name = gate_name(g);
                out.push_back(std::move(g));
            }
    return out;
}

std::string normalize_target(std::string_view name) {
    std::string s;
    for (char c : name)
        if (c != '-' && c != '_' && c != ' ')
            s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return s;
}

struct NamedTarget {
    std::vector<std::string> aliases;
    int n_qubits;
    ComplexMatrix (*build)();
};

const std::vector<NamedTarget>& library() {
    using M = ComplexMatrix;
    static const std::vector<NamedTarget> lib{
        {{"Reverse-CNOT", "RevCNOT"}, 2, [] { return lift_controlled(one_qubit_matrix("X"), 2, 1, 2); }},
        {{"Magic"}, 2,
         [] {
             const double h = 1.0 / std::numbers::sqrt2;
             const Complex i(0, h);
             return M::from_rows({{h, i, 0, 0}, {0, 0, i, h}, {0, 0, i, -h}, {h, -i, 0, 0}});
         }},
        {{"Toffoli", "CCX"}, 3,
         [] {
             M m = M::identity(3);
             m.set(6, 6, 0);
             m.set(7, 7, 0);
             m.set(6, 7, 1);
             m.set(7, 6, 1);
             return m;
         }},
        {{"Fredkin", "CSWAP"}, 3,
         [] {
             M m = M::identity(3);
             m.set(5, 5, 0);
             m.set(6, 6, 0);
             m.set(5, 6, 1);
             m.set(6, 5, 1);
             return m;
         }},
        {{"Margolus"}, 3,
         [] {
             M m = M::identity(3);
             m.set(5, 5, -1);
             m.set(6, 6, 0);
             m.set(7, 7, 0);
             m.set(6, 7, 1);
             m.set(7, 6, 1);
             return m;
         }},
        {{"Controlled-V", "CV"}, 2, [] { return lift_controlled(one_qubit_matrix("SX"), 1, 2, 2); }},
        {{"Controlled-Z", "CZ"}, 2, [] { return lift_controlled(one_qubit_matrix("Z"), 1, 2, 2); }},
        {{"Controlled-H", "CH"}, 2, [] { return lift_controlled(one_qubit_matrix("H"), 1, 2, 2); }},
        {{"QFT", "QFT2"}, 2,
         [] {
             const Complex i(0, 0.5);
             return M::from_rows({{0.5, 0.5, 0.5, 0.5},
                                  {0.5, i, -0.5, -i},
                                  {0.5, -0.5, 0.5, -0.5},
                                  {0.5, -i, -0.5, i}});
         }},
        {{"iSwap"}, 2,
         [] {
             const Complex i(0, 1);
             return M::from_rows({{1, 0, 0, 0}, {0, 0, i, 0}, {0, i, 0, 0}, {0, 0, 0, 1}});
         }},
        {{"Grover-Diffusion", "Grover"}, 2,
         [] {
             return M::from_rows({{-0.5, 0.5, 0.5, 0.5},
                                  {0.5, -0.5, 0.5, 0.5},
                                  {0.5, 0.5, -0.5, 0.5},
                                  {0.5, 0.5, 0.5, -0.5}});
         }},
        {{"W"}, 2,
         [] {
             const double h = 1.0 / std::numbers::sqrt2;
             return M::from_rows({{1, 0, 0, 0}, {0, h, h, 0}, {0, h, -h, 0}, {0, 0, 0, 1}});
         }},
        {{"SWAP"}, 2, [] { return lift_gate(parse_gate("SWAP_1_2"), 2); }},
        {{"Hadamard"}, 2, [] { return lift_one_qubit(one_qubit_matrix("H"), 1, 2); }},
        {{"S", "Phase"}, 2, [] { return lift_one_qubit(one_qubit_matrix("S"), 1, 2); }},
    };
    return lib;
}

}  // namespace

bool GateCatalog::has_cnot() const {
    return std::any_of(inputs.begin(), inputs.end(), [](const CatalogEntry& e) { return e.def.is_cnot(); });
}

std::vector<std::string> GateCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(inputs.size());
    for (const auto& e : inputs) out.push_back(e.def.name);
    return out;
}

GateCatalog build_input_set(std::span<const GateDef> defs, int n, const InputSetOptions& options) {
    if (n < 1) throw std::invalid_argument("register needs at least one qubit");
    std::vector<GateDef> expanded;
    for (const auto& d : defs) {
        auto e = expand(d, options);
        expanded.insert(expanded.end(), std::make_move_iterator(e.begin()), std::make_move_iterator(e.end()));
    }
    std::set<std::string> seen;
    for (const auto& g : expanded)
        if (!seen.insert(g.name).second) throw NamingError("duplicate input gate '" + g.name + "'");

    GateCatalog cat;
    cat.n_qubits = n;
    const ComplexMatrix id = ComplexMatrix::identity(n);
    std::optional<std::size_t> identity;
    for (auto& g : expanded) {
        ComplexMatrix m = lift_gate(g, n, options.convention);
        if (!m.is_unitary(kUnitaryTol)) throw std::invalid_argument("input gate '" + g.name + "' is not unitary");
        const bool dup = std::any_of(cat.inputs.begin(), cat.inputs.end(),
                                     [&](const CatalogEntry& e) { return e.matrix.approx_equal(m, kDedupTol); });
        if (dup) continue;
        if (m.approx_equal(id, kDedupTol)) {
            identity = cat.inputs.size();
            g = parse_gate("I");
            m = id;
        }
        cat.inputs.push_back({std::move(g), std::move(m)});
    }
    if (!identity) {
        identity = cat.inputs.size();
        cat.inputs.push_back({parse_gate("I"), id});
    }
    cat.identity_index = *identity;
    return cat;
}

ComplexMatrix target_lookup(std::string_view name, int n) {
    const std::string key = normalize_target(name);
    for (const auto& t : library()) {
        for (const auto& alias : t.aliases) {
            if (normalize_target(alias) != key) continue;
            if (t.n_qubits != n)
                throw LookupError("target '" + std::string(name) + "' acts on " +
                                  std::to_string(t.n_qubits) + " qubits, not " + std::to_string(n));
            return t.build();
        }
    }
    GateDef g;
    try {
        g = parse_gate(name);
    } catch (const NamingError&) {
        throw LookupError("unknown target gate '" + std::string(name) + "'");
    }
    if (g.kind == GateKind::one_qubit_parametrized && !g.angles)
        throw LookupError("target '" + std::string(name) + "' needs explicit angles");
    try {
        return lift_gate(g, n);
    } catch (const PlacementError& e) {
        throw LookupError(std::string("target '") + std::string(name) + "': " + e.what());
    }
}

std::vector<std::string> target_names() {
    std::vector<std::string> out;
    for (const auto& t : library()) out.push_back(t.aliases.front());
    return out;
}

GateCatalog make_catalog(std::span<const GateDef> defs, int n, std::string target_name,
                         const ComplexMatrix& target, const InputSetOptions& options) {
    if (target.n_qubits() != n) throw std::invalid_argument("target acts on the wrong number of qubits");
    if (!target.is_unitary(kUnitaryTol)) throw std::invalid_argument("target is not unitary");
    GateCatalog cat = build_input_set(defs, n, options);
    cat.target_name = std::move(target_name);
    cat.target = target;
    return cat;
}

}  // namespace qcd
