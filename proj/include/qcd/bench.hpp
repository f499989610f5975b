#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcd/exact.hpp"
#include "qcd/nlp.hpp"
#include "qcd/spec.hpp"

namespace qcd {

enum class Tier { required, extended };
std::string tier_name(Tier t);

struct BenchCase {
    /// Short key, e.g. "reverse_cnot" or "magic_param".
    std::string name;
    /// Display title, e.g. "Magic (param)".
    std::string title;
    DecompositionSpec spec;
    /// Input-gate count listed for the case (after expansion and dedup).
    std::size_t listed_gates = 0;
    int expected_optimal_depth = 0;
    Tier tier = Tier::required;

    int n_qubits() const { return spec.n_qubits; }
    int max_depth() const { return spec.max_depth; }
};

/// 10 Clifford+T cases followed by 7 parametrized ones.
std::vector<BenchCase> builtin_suite();
std::vector<BenchCase> suite_tier(Tier t);
/// Case-insensitive; '-' and '_' are interchangeable. Throws LookupError.
BenchCase find_case(std::string_view name);

struct ExactOutcome {
    SolveStatus status = SolveStatus::infeasible;
    int objective = -1;
    int lower_bound = 0;
    std::size_t nodes_expanded = 0;
    double wall_time_s = 0.0;
};

struct NlpOutcome {
    int n_starts = 0;
    /// Starts that finished before the time limit.
    int completed = 0;
    int feasible = 0;
    /// Feasible starts whose rounded point verified.
    int rounded = 0;
    /// Rounded solutions at the expected depth.
    int rounded_at_expected = 0;
    std::optional<int> best_objective;
    /// Wall time of the selected start.
    double best_time_s = 0.0;
    double total_time_s = 0.0;
    double max_feasible_gap = 0.0;
    bool timed_out = false;
};

struct CaseReport {
    std::string name;
    std::string title;
    Tier tier = Tier::required;
    int n_qubits = 0;
    std::size_t n_gates = 0;
    std::size_t listed_gates = 0;
    int max_depth = 0;
    int expected = 0;
    std::optional<ExactOutcome> exact;
    std::optional<NlpOutcome> nlp;
    /// Every solver that ran returned the expected depth.
    bool match = false;
    /// Set when the case could not be built or a solver threw.
    std::string error;
};

struct BenchReport {
    std::vector<CaseReport> cases;
    double mean_exact_time_s = 0.0;
    double mean_nlp_time_s = 0.0;
    /// mean exact time / mean nlp best-start time, over cases where both ran.
    double speedup = 0.0;
    /// Cases ran concurrently; times are not comparable.
    bool parallel = false;
};

struct SuiteOptions {
    bool run_exact = true;
    bool run_nlp = false;
    /// Per case and per solver.
    double budget_s = 300.0;
    std::uint64_t seed = 0;
    int n_starts = 100;
    NlpOptions nlp;
    SearchOptions search;
    bool parallel = false;
    /// One line per finished case, when set.
    std::ostream* progress = nullptr;
};

BenchReport run_suite(const std::vector<BenchCase>& cases, const SuiteOptions& options = {});

/// name,tier,n_qubits,n_gates,listed_gates,max_depth,expected,exact_status,
/// exact_objective,exact_time_s,nlp_feasible,nlp_starts,nlp_best_objective,
/// nlp_best_time_s,nlp_total_time_s,match,error
void write_report_csv(const BenchReport& report, std::ostream& out);
nlohmann::json report_to_json(const BenchReport& report);

}  // namespace qcd
