#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qcd/gates.hpp"

namespace qcd {

/// MINLP: binary z, bilinear products. MILP: binary z, products replaced by
/// McCormick envelopes. NLP and LP are their continuous relaxations.
enum class Variant { minlp, milp, nlp, lp };

std::string variant_name(Variant v);
/// Accepts minlp/milp/nlp/lp in any case; throws std::invalid_argument.
Variant parse_variant(std::string_view text);

inline bool is_integer(Variant v) { return v == Variant::minlp || v == Variant::milp; }
inline bool is_linearized(Variant v) { return v == Variant::milp || v == Variant::lp; }

/// Sum of z_{k, depth + offset} over `terms` <= bound, with terms given as
/// (gate index k, depth offset).
struct SymmetryConstraint {
    int depth = 1;
    std::vector<std::pair<std::size_t, int>> terms;
    int bound = 0;
    bool operator==(const SymmetryConstraint&) const = default;
};

/// Flat column indices. z_{k,d} come first (depth-major), then the entries
/// of the cumulative products Ghat_1..Ghat_{D-1}, then (linearized variants
/// only) one auxiliary w per (Ghat_{d-1} entry, z_{k,d}) product.
class VariableLayout {
  public:
    VariableLayout() = default;
    VariableLayout(std::size_t n_gates, int max_depth, std::size_t embed_dim, bool with_aux);

    /// k is 0-based, d is 1-based.
    std::size_t z_index(std::size_t k, int d) const { return (d - 1) * k_ + k; }
    /// Ghat_d entry (i, j), d in 1..D-1.
    std::size_t ghat_index(int d, std::size_t i, std::size_t j) const {
        return z_count() + (d - 1) * m_ * m_ + i * m_ + j;
    }
    /// Auxiliary for Ghat_{d-1}(i, l) * z_{k,d}, d in 2..D.
    std::size_t aux_index(int d, std::size_t i, std::size_t l, std::size_t k) const {
        return z_count() + ghat_count() + (((d - 2) * m_ + i) * m_ + l) * k_ + k;
    }

    std::size_t z_count() const { return k_ * static_cast<std::size_t>(d_); }
    std::size_t ghat_count() const { return static_cast<std::size_t>(d_ - 1) * m_ * m_; }
    std::size_t aux_count() const { return with_aux_ ? static_cast<std::size_t>(d_ - 1) * m_ * m_ * k_ : 0; }
    std::size_t total() const { return z_count() + ghat_count() + aux_count(); }

    std::size_t n_gates() const { return k_; }
    int max_depth() const { return d_; }
    std::size_t embed_dim() const { return m_; }

    /// z_k_d, G_d_i_j or w_d_i_l_k (all 1-based).
    std::string name(std::size_t index) const;

  private:
    std::size_t k_ = 0;
    int d_ = 0;
    std::size_t m_ = 0;
    bool with_aux_ = false;
};

struct CircuitModel {
    int n_qubits = 0;
    int max_depth = 0;
    std::size_t n_gates = 0;
    std::vector<RealEmbedding> inputs;
    RealEmbedding target;
    RealEmbedding initial;
    std::size_t identity_index = 0;
    Variant variant = Variant::minlp;
    std::vector<Complex> phase_set;
    std::vector<SymmetryConstraint> symmetry;
    VariableLayout layout;

    // Complex forms and labels carried along for solvers and reporting.
    std::vector<std::string> gate_names;
    std::vector<ComplexMatrix> gate_matrices;
    ComplexMatrix target_matrix;
    std::string target_name;

    /// Embedding of phase_set[p] * T.
    RealEmbedding target_for_phase(std::size_t p) const;
    /// 1 for every non-identity gate, 0 for the identity.
    double objective_coeff(std::size_t k) const { return k == identity_index ? 0.0 : 1.0; }
};

struct AssembleOptions {
    std::vector<Complex> phase_set{Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)};
    bool symmetry = true;
};

/// Builds the model for a catalog at maximum depth D. Infeasibility (e.g.
/// D too small) is left for the solvers to discover.
CircuitModel assemble(const GateCatalog& catalog, int max_depth, Variant variant,
                      const AssembleOptions& options = {});

/// Reverse-commutation cuts for every (gate on a CNOT's control qubit, gate
/// on its target qubit, CNOT) triple, keeping only patterns whose product is
/// reproduced by another four-gate arrangement of the same gates.
std::vector<SymmetryConstraint> generate_symmetry_constraints(const GateCatalog& catalog, int max_depth);

/// True when the window's product equals (exactly, no phase) a product of
/// strictly fewer non-identity gates drawn from the window's own gates. A
/// minimum-cost sequence never contains such a window.
bool window_is_reducible(std::span<const ComplexMatrix> gates, std::size_t identity_index,
                         std::span<const std::size_t> window);

// ---------------------------------------------------------------------------
// Constraint registry

struct LinTerm {
    std::size_t var;
    double coef;
};
struct QuadTerm {
    std::size_t a;
    std::size_t b;
    double coef;
};
enum class Sense { eq, le, ge };

struct Row {
    std::string name;
    std::vector<LinTerm> lin;
    std::vector<QuadTerm> quad;
    Sense sense = Sense::eq;
    double rhs = 0.0;
};

struct ConstraintRegistry {
    std::vector<std::string> var_names;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> binary;
    std::vector<LinTerm> objective;
    std::vector<Row> rows;

    std::size_t n_vars() const { return var_names.size(); }
};

/// The four rows linking w = g * z when g in [-1, 1] and z in [0, 1]:
/// w >= -z, w >= g + z - 1, w <= z, w <= g - z + 1.
std::vector<Row> mccormick_envelope(std::size_t g_var, std::size_t z_var, std::size_t aux_var,
                                    const std::string& tag);

struct Interval {
    double lo;
    double hi;
};
/// Feasible w for fixed (g, z) under the envelope rows.
Interval mccormick_interval(double g, double z);

/// Every row of the chosen variant, with the target multiplied by phase_set[phase].
ConstraintRegistry build_registry(const CircuitModel& model, std::size_t phase = 0);

/// Writes the model in CPLEX LP text format. Bilinear terms use the
/// bracketed quadratic syntax.
void write_lp(const ConstraintRegistry& reg, std::ostream& out, const std::string& comment = {});
void export_model(const CircuitModel& model, const std::filesystem::path& path, std::size_t phase = 0);

struct LpSummary {
    std::size_t variables = 0;
    std::size_t binaries = 0;
    std::size_t rows = 0;
    std::size_t quadratic_rows = 0;
};
/// Counts distinct variables, binaries and rows in LP text.
LpSummary scan_lp(std::istream& in);

}  // namespace qcd
