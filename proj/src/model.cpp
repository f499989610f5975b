#include "qcd/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <iostream>

namespace qcd {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::minlp: return "minlp";
        case Variant::milp: return "milp";
        case Variant::nlp: return "nlp";
        case Variant::lp: return "lp";
    }
    return "?";
}

Variant parse_variant(std::string_view text) {
    std::string s;
    for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "minlp") return Variant::minlp;
    if (s == "milp") return Variant::milp;
    if (s == "nlp") return Variant::nlp;
    if (s == "lp") return Variant::lp;
    throw std::invalid_argument("unknown model variant '" + std::string(text) + "'");
}

VariableLayout::VariableLayout(std::size_t n_gates, int max_depth, std::size_t embed_dim, bool with_aux)
    : k_(n_gates), d_(max_depth), m_(embed_dim), with_aux_(with_aux) {}

std::string VariableLayout::name(std::size_t index) const {
    auto s = [](std::size_t v) { return std::to_string(v + 1); };
    if (index < z_count()) return "z_" + s(index % k_) + "_" + s(index / k_);
    index -= z_count();
    if (index < ghat_count()) {
        const std::size_t d = index / (m_ * m_);
        const std::size_t r = index % (m_ * m_);
        return "G_" + s(d) + "_" + s(r / m_) + "_" + s(r % m_);
    }
    index -= ghat_count();
    if (index >= aux_count()) throw std::out_of_range("variable index out of range");
    const std::size_t k = index % k_;
    index /= k_;
    const std::size_t l = index % m_;
    index /= m_;
    const std::size_t i = index % m_;
    const std::size_t d = index / m_ + 2;
    return "w_" + std::to_string(d) + "_" + s(i) + "_" + s(l) + "_" + s(k);
}

RealEmbedding CircuitModel::target_for_phase(std::size_t p) const {
    return RealEmbedding(target_matrix.scaled(phase_set.at(p)));
}

CircuitModel assemble(const GateCatalog& catalog, int max_depth, Variant variant,
                      const AssembleOptions& options) {
    if (catalog.n_qubits < 1) throw std::invalid_argument("catalog has no qubits");
    if (catalog.size() < 2) throw std::invalid_argument("need at least two input gates");
    if (max_depth < 1) throw std::invalid_argument("maximum depth must be at least 1");
    if (catalog.target.n_qubits() != catalog.n_qubits)
        throw std::invalid_argument("catalog target missing or on the wrong register");
    if (options.phase_set.empty()) throw std::invalid_argument("phase set is empty");
    for (const Complex& p : options.phase_set)
        if (std::fabs(std::abs(p) - 1.0) > 1e-12) throw std::invalid_argument("phase is not a unit complex number");
    if (catalog.n_qubits > 4)
        std::cerr << "warning: " << catalog.n_qubits << " qubits is beyond the tested range\n";

    CircuitModel m;
    m.n_qubits = catalog.n_qubits;
    m.max_depth = max_depth;
    m.n_gates = catalog.size();
    m.identity_index = catalog.identity_index;
    m.variant = variant;
    m.phase_set = options.phase_set;
    for (const auto& e : catalog.inputs) {
        m.inputs.emplace_back(e.matrix);
        m.gate_names.push_back(e.def.name);
        m.gate_matrices.push_back(e.matrix);
    }
    m.target_matrix = catalog.target;
    m.target_name = catalog.target_name;
    m.target = RealEmbedding(catalog.target);
    m.initial = RealEmbedding(ComplexMatrix::identity(catalog.n_qubits));
    m.layout = VariableLayout(m.n_gates, max_depth, m.initial.dim(), is_linearized(variant));
    if (options.symmetry) m.symmetry = generate_symmetry_constraints(catalog, max_depth);
    return m;
}

// ---------------------------------------------------------------------------
// Symmetry cuts

namespace {

ComplexMatrix product_of(std::span<const ComplexMatrix> gates, std::span<const std::size_t> seq, int n) {
    ComplexMatrix p = ComplexMatrix::identity(n);
    for (std::size_t k : seq) p = p * gates[k];
    return p;
}

bool one_qubit_on(const CatalogEntry& e, int qubit) {
    return (e.def.kind == GateKind::one_qubit_constant || e.def.kind == GateKind::one_qubit_parametrized) &&
           !e.def.is_identity() && e.def.placement.size() == 1 && e.def.placement[0] == qubit;
}

}  // namespace

bool window_is_reducible(std::span<const ComplexMatrix> gates, std::size_t identity_index,
                         std::span<const std::size_t> window) {
    if (window.empty()) return false;
    const int n = gates[window[0]].n_qubits();
    std::vector<std::size_t> alphabet;
    std::size_t cost = 0;
    for (std::size_t k : window) {
        if (k == identity_index) continue;
        ++cost;
        if (std::find(alphabet.begin(), alphabet.end(), k) == alphabet.end()) alphabet.push_back(k);
    }
    if (cost == 0) return false;
    const ComplexMatrix target = product_of(gates, window, n);
    std::vector<std::size_t> seq;
    for (std::size_t len = 0; len < cost; ++len) {
        seq.assign(len, 0);
        std::vector<std::size_t> digit(len, 0);
        while (true) {
            for (std::size_t t = 0; t < len; ++t) seq[t] = alphabet[digit[t]];
            if (product_of(gates, seq, n).approx_equal(target, 1e-9)) return true;
            std::size_t pos = 0;
            while (pos < len && ++digit[pos] == alphabet.size()) digit[pos++] = 0;
            if (pos == len) break;
        }
    }
    return false;
}

std::vector<SymmetryConstraint> generate_symmetry_constraints(const GateCatalog& catalog, int max_depth) {
    std::vector<SymmetryConstraint> out;
    if (max_depth < 4) return out;
    std::vector<ComplexMatrix> gates;
    for (const auto& e : catalog.inputs) gates.push_back(e.matrix);
    const int n = catalog.n_qubits;

    std::vector<std::array<std::size_t, 4>> patterns;
    for (std::size_t c = 0; c < catalog.size(); ++c) {
        const auto& cdef = catalog.inputs[c].def;
        if (!cdef.is_cnot()) continue;
        const int ctrl = cdef.placement[0];
        const int tgt = cdef.placement[1];
        for (std::size_t a = 0; a < catalog.size(); ++a) {
            if (!one_qubit_on(catalog.inputs[a], ctrl)) continue;
            for (std::size_t b = 0; b < catalog.size(); ++b) {
                if (!one_qubit_on(catalog.inputs[b], tgt)) continue;
                const std::array<std::array<std::size_t, 4>, 6> family{{
                    {a, c, a, c},
                    {c, a, c, a},
                    {c, b, c, b},
                    {b, c, a, c},
                    {c, a, c, b},
                    {c, b, c, a},
                }};
                const std::array<std::size_t, 4> alphabet{a, b, c, catalog.identity_index};
                for (const auto& pat : family) {
                    if (std::find(patterns.begin(), patterns.end(), pat) != patterns.end()) continue;
                    // Keep the cut only if another arrangement survives it.
                    const ComplexMatrix prod = product_of(gates, pat, n);
                    bool valid = false;
                    std::array<std::size_t, 4> alt{};
                    for (std::size_t code = 0; code < 256 && !valid; ++code) {
                        for (std::size_t t = 0; t < 4; ++t) alt[t] = alphabet[(code >> (2 * t)) & 3];
                        if (alt == pat) continue;
                        if (std::find(family.begin(), family.end(), alt) != family.end()) continue;
                        valid = product_of(gates, alt, n).approx_equal(prod, 1e-9);
                    }
                    if (valid) patterns.push_back(pat);
                }
            }
        }
    }
    for (const auto& pat : patterns)
        for (int d = 1; d <= max_depth - 3; ++d) {
            SymmetryConstraint s;
            s.depth = d;
            for (int t = 0; t < 4; ++t) s.terms.emplace_back(pat[t], t);
            s.bound = 3;
            out.push_back(std::move(s));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Registry

std::vector<Row> mccormick_envelope(std::size_t g_var, std::size_t z_var, std::size_t aux_var,
                                    const std::string& tag) {
    std::vector<Row> rows(4);
    // w + z >= 0
    rows[0] = {"mc1_" + tag, {{aux_var, 1.0}, {z_var, 1.0}}, {}, Sense::ge, 0.0};
    // w - g - z >= -1
    rows[1] = {"mc2_" + tag, {{aux_var, 1.0}, {g_var, -1.0}, {z_var, -1.0}}, {}, Sense::ge, -1.0};
    // w - z <= 0
    rows[2] = {"mc3_" + tag, {{aux_var, 1.0}, {z_var, -1.0}}, {}, Sense::le, 0.0};
    // w - g + z <= 1
    rows[3] = {"mc4_" + tag, {{aux_var, 1.0}, {g_var, -1.0}, {z_var, 1.0}}, {}, Sense::le, 1.0};
    return rows;
}

Interval mccormick_interval(double g, double z) {
    return {std::max(-z, g + z - 1.0), std::min(z, g - z + 1.0)};
}

ConstraintRegistry build_registry(const CircuitModel& model, std::size_t phase) {
    const VariableLayout& L = model.layout;
    const std::size_t K = model.n_gates;
    const int D = model.max_depth;
    const std::size_t m = L.embed_dim();
    const bool linear = is_linearized(model.variant);
    constexpr double kZero = 1e-15;

    ConstraintRegistry reg;
    const std::size_t nv = L.total();
    reg.var_names.reserve(nv);
    for (std::size_t v = 0; v < nv; ++v) reg.var_names.push_back(L.name(v));
    reg.lower.assign(nv, -1.0);
    reg.upper.assign(nv, 1.0);
    reg.binary.assign(nv, false);
    for (std::size_t v = 0; v < L.z_count(); ++v) {
        reg.lower[v] = 0.0;
        reg.binary[v] = is_integer(model.variant);
    }
    for (int d = 1; d <= D; ++d)
        for (std::size_t k = 0; k < K; ++k)
            if (model.objective_coeff(k) != 0.0) reg.objective.push_back({L.z_index(k, d), model.objective_coeff(k)});

    for (int d = 1; d <= D; ++d) {
        Row r{"onehot_" + std::to_string(d), {}, {}, Sense::eq, 1.0};
        for (std::size_t k = 0; k < K; ++k) r.lin.push_back({L.z_index(k, d), 1.0});
        reg.rows.push_back(std::move(r));
    }

    const RealEmbedding target = model.target_for_phase(phase);
    // G0 * M_k for the first depth.
    std::vector<RealEmbedding> first;
    for (const auto& mk : model.inputs) first.push_back(model.initial * mk);

    auto row_name = [](int d, std::size_t i, std::size_t j) {
        return "prod_" + std::to_string(d) + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
    };

    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            Row r{row_name(1, i, j), {}, {}, Sense::eq, 0.0};
            if (D >= 2) r.lin.push_back({L.ghat_index(1, i, j), 1.0});
            for (std::size_t k = 0; k < K; ++k) {
                const double c = first[k](i, j);
                if (std::fabs(c) > kZero) r.lin.push_back({L.z_index(k, 1), D >= 2 ? -c : c});
            }
            if (D == 1) r.rhs = target(i, j);
            reg.rows.push_back(std::move(r));
        }

    for (int d = 2; d <= D; ++d) {
        const bool last = d == D;
        const double sign = last ? 1.0 : -1.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                Row r{row_name(d, i, j), {}, {}, Sense::eq, last ? target(i, j) : 0.0};
                if (!last) r.lin.push_back({L.ghat_index(d, i, j), 1.0});
                for (std::size_t l = 0; l < m; ++l)
                    for (std::size_t k = 0; k < K; ++k) {
                        const double c = model.inputs[k](l, j);
                        if (std::fabs(c) <= kZero) continue;
                        if (linear)
                            r.lin.push_back({L.aux_index(d, i, l, k), sign * c});
                        else
                            r.quad.push_back({L.ghat_index(d - 1, i, l), L.z_index(k, d), sign * c});
                    }
                reg.rows.push_back(std::move(r));
            }
    }

    if (linear) {
        for (int d = 2; d <= D; ++d)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t l = 0; l < m; ++l)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::size_t w = L.aux_index(d, i, l, k);
                        auto rows = mccormick_envelope(L.ghat_index(d - 1, i, l), L.z_index(k, d), w,
                                                       reg.var_names[w].substr(2));
                        for (auto& r : rows) reg.rows.push_back(std::move(r));
                    }
    }

    std::size_t sym_id = 0;
    for (const auto& s : model.symmetry) {
        Row r{"sym_" + std::to_string(++sym_id), {}, {}, Sense::le, static_cast<double>(s.bound)};
        for (const auto& [k, off] : s.terms) r.lin.push_back({L.z_index(k, s.depth + off), 1.0});
        reg.rows.push_back(std::move(r));
    }
    return reg;
}

}  // namespace qcd
