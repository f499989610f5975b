#include <numbers>

#include "doctest.h"
#include "qcd/spec.hpp"

using namespace qcd;
using nlohmann::json;
constexpr double pi = std::numbers::pi;

namespace {

std::string where_of(const std::string& text) {
    try {
        parse_spec_text(text);
    } catch (const SpecError& e) {
        return e.where();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("minimal spec gets defaults") {
    const auto s = parse_spec_text(R"({"n_qubits": 2, "max_depth": 5,
        "input_gates": ["H_1xH_2", "H_1", "CNOT_1_2", "I"], "target": "Reverse-CNOT"})");
    CHECK(s.n_qubits == 2);
    CHECK(s.max_depth == 5);
    CHECK(s.input_gates.size() == 4);
    CHECK(s.variant == Variant::minlp);
    CHECK(s.symmetry);
    CHECK(s.phase_set.size() == 4);
    CHECK(s.discretization == AngleGrid::standard());
    const CircuitModel m = build_model(s);
    CHECK(m.n_gates == 4);
    CHECK(m.layout.z_count() == 20);
}

TEST_CASE("descriptor objects, angles and options") {
    const auto s = parse_spec_text(R"({
        "n_qubits": 2, "max_depth": 3,
        "input_gates": [
            {"base": "U3", "placement": [1], "discretization": {"theta": ["pi/4"], "phi": [0], "lambda": ["-pi/2", "pi/2", "pi"]}},
            {"name": "U3_2", "angles": {"theta": "pi/4", "phi": 0, "lambda": "pi"}},
            {"base": "CNOT", "placement": [1, 2], "kind": "two_qubit"}
        ],
        "target": "Hadamard", "variant": "nlp", "phase_set": ["1", "-1"], "symmetry": "off",
        "u3_convention": "as_printed"})");
    REQUIRE(s.input_gates.size() == 3);
    REQUIRE(s.input_gates[0].discretization);
    CHECK(s.input_gates[0].discretization->lambda.size() == 3);
    REQUIRE(s.input_gates[1].angles);
    CHECK(s.input_gates[1].angles->theta == doctest::Approx(pi / 4));
    CHECK(s.input_gates[1].name == "U3_2(pi/4,0,pi)");
    CHECK(s.variant == Variant::nlp);
    CHECK(s.phase_set == std::vector<Complex>{{1, 0}, {-1, 0}});
    CHECK_FALSE(s.symmetry);
    const CircuitModel m = build_model(s);
    // 3 U3_1 + 1 U3_2 + CNOT + I
    CHECK(m.n_gates == 6);
    CHECK(m.symmetry.empty());
}

TEST_CASE("explicit target matrix") {
    const auto s = parse_spec_text(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["S_1"],
        "target": {"name": "Z", "matrix": [[[1, 0], [0, -1]], [[0, 0], [0, 0]]]}})");
    REQUIRE(s.target_matrix);
    CHECK(s.target == "Z");
    const GateCatalog c = build_catalog(s);
    CHECK(c.target(1, 1) == Complex(-1, 0));
}

TEST_CASE("spec round trip through JSON is exact") {
    DecompositionSpec s;
    s.n_qubits = 3;
    s.max_depth = 7;
    GateDef ry = parse_gate("RY_3");
    ry.discretization = AngleGrid{{-pi / 2, -pi / 4, pi / 4, pi / 2, pi}, {}, {}};
    s.input_gates = {ry, parse_gate("CNOT_1_3"), parse_gate("H_1xT_2"), parse_gate("U3_2(0.3,0.1,-0.2)")};
    s.target = "Margolus";
    s.variant = Variant::lp;
    s.phase_set = {{1, 0}, {0, -1}};
    s.symmetry = false;
    s.convention = U3Convention::half_angle;
    s.discretization.theta = {0.1, 0.2};
    const auto back = parse_spec(spec_to_json(s));
    CHECK(same_spec(s, back));
    CHECK(spec_to_json(back) == spec_to_json(s));

    s.target_matrix = target_lookup("Margolus", 3);
    CHECK(same_spec(s, parse_spec_text(spec_to_json(s).dump())));

    DecompositionSpec t = s;
    t.input_gates[3].angles->theta += 1e-12;
    CHECK_FALSE(same_spec(s, t));
}

TEST_CASE("malformed specs name the offending field or line") {
    CHECK(where_of("{\"n_qubits\": 2,\n \"max_depth\": }") == "line 2, column 15");
    CHECK(where_of(R"({"max_depth": 3, "input_gates": ["H_1"], "target": "H_1"})") == "n_qubits");
    CHECK(where_of(R"({"n_qubits": "two", "max_depth": 3, "input_gates": ["H_1"], "target": "H_1"})") == "n_qubits");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 0, "input_gates": ["H_1"], "target": "H_1"})") == "max_depth");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1", "Bogus_1"], "target": "H_1"})") ==
          "input_gates[1]");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": [{"base": "U3", "placement": [1],
        "discretization": {"theta": []}}], "target": "H_1"})") == "input_gates[0].discretization.theta");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": [{"name": "H_1", "angles": {"theta": 1}}],
        "target": "H_1"})") == "input_gates[0]");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"], "target": "H_1", "colour": 1})") == "");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"], "target": "H_1",
        "phase_set": ["j"]})") == "phase_set[0]");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"], "target": "H_1", "symmetry": 3})") ==
          "symmetry");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"], "target": "H_1", "variant": "qp"})") ==
          "variant");
    CHECK(where_of(R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"],
        "target": {"matrix": [[[1, 0]], [[0, 0]]]}})") == "target.matrix row 0");
}

TEST_CASE("catalog documents round trip") {
    DecompositionSpec s;
    s.n_qubits = 2;
    s.max_depth = 3;
    GateDef u = parse_gate("U3_1");
    u.discretization = AngleGrid{{pi / 4}, {0}, {-pi / 2, pi / 2, pi}};
    s.input_gates = {u, parse_gate("CNOT_1_2"), parse_gate("H_1xH_2")};
    s.target = "Hadamard";
    const GateCatalog c = build_catalog(s);
    const GateCatalog back = catalog_from_json(catalog_to_json(c));
    REQUIRE(back.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        CHECK(back.inputs[k].def.name == c.inputs[k].def.name);
        CHECK(back.inputs[k].matrix.max_abs_diff(c.inputs[k].matrix) == 0.0);
    }
    CHECK(back.target.max_abs_diff(c.target) == 0.0);
    CHECK(back.identity_index == c.identity_index);
}

TEST_CASE("gate descriptors") {
    for (const char* n : {"H_1", "CNOT_2_1", "H_1xS_2", "U3_1(pi/2,0,pi/4)", "RZ_2(pi/4)", "I", "CVdg_1_3"}) {
        CAPTURE(n);
        const GateDef g = parse_gate(n);
        CHECK(same_gate(gate_from_json(gate_to_json(g)), g));
        CHECK(same_gate(gate_from_json(json(n)), g));
    }
    CHECK_THROWS_AS(gate_from_json(json{{"base", "CNOT"}, {"placement", {1, 2}}, {"kind", "one_qubit_constant"}}),
                    SpecError);
    CHECK_THROWS_AS(gate_from_json(json::object()), SpecError);
    CHECK_THROWS_AS(gate_from_json(json(3)), SpecError);
}
