#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qcd/gates.hpp"
#include "qcd/model.hpp"

namespace qcd {

/// Malformed decomposition spec or catalog document. `where` is a field
/// path such as "input_gates[2].placement", or "line 4, column 7" for JSON
/// syntax errors.
class SpecError : public std::invalid_argument {
  public:
    SpecError(std::string where, const std::string& what)
        : std::invalid_argument(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

  private:
    std::string where_;
};

/// Everything needed to assemble one model.
struct DecompositionSpec {
    int n_qubits = 0;
    int max_depth = 0;
    std::vector<GateDef> input_gates;
    /// Library name, or a label when target_matrix is given.
    std::string target;
    std::optional<ComplexMatrix> target_matrix;
    /// Grid for parametrized gates without their own.
    AngleGrid discretization = AngleGrid::standard();
    U3Convention convention = U3Convention::as_printed;
    Variant variant = Variant::minlp;
    std::vector<Complex> phase_set = AssembleOptions{}.phase_set;
    bool symmetry = true;
};

nlohmann::json gate_to_json(const GateDef& g);
/// Accepts a gate expression string ("CNOT_1_2") or a descriptor object.
GateDef gate_from_json(const nlohmann::json& j, const std::string& where = "gate");
bool same_gate(const GateDef& a, const GateDef& b);

/// Keys: n_qubits, max_depth, input_gates, target, discretization, variant,
/// phase_set, symmetry, u3_convention. A "run" object is ignored here.
DecompositionSpec parse_spec(const nlohmann::json& j);
DecompositionSpec parse_spec_text(std::string_view text);
DecompositionSpec load_spec(const std::filesystem::path& path);
nlohmann::json spec_to_json(const DecompositionSpec& spec);
bool same_spec(const DecompositionSpec& a, const DecompositionSpec& b);

GateCatalog build_catalog(const DecompositionSpec& spec);
CircuitModel build_model(const DecompositionSpec& spec);

/// Expanded catalog: concrete gates plus the target matrix.
nlohmann::json catalog_to_json(const GateCatalog& catalog);
GateCatalog catalog_from_json(const nlohmann::json& j);

/// [re_rows, im_rows], each a list of rows.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j, const std::string& where = "matrix");

}  // namespace qcd
