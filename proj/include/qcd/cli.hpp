#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcd/bench.hpp"
#include "qcd/exact.hpp"
#include "qcd/spec.hpp"

namespace qcd::cli {

enum class Command { decompose, export_model, bench };
enum class SolverChoice { exact, nlp, both };

std::string command_name(Command c);
std::string solver_name(SolverChoice s);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitBudget = 3;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command = Command::decompose;
    /// "builtin:<name>" or a spec file path; empty for bench.
    std::string source;
    /// Resolved problem for decompose/export, after flag overrides.
    DecompositionSpec spec;
    SolverChoice solver = SolverChoice::exact;
    int n_starts = 100;
    std::uint64_t seed = 0;
    double budget_s = 300.0;
    /// 0 quiet, 1 normal, 2 adds per-start NLP trace.
    int verbosity = 1;
    bool dump_spec = false;

    // Outputs. Empty means "do not write".
    std::string solution_json;
    std::string stats_csv;
    std::string model_path;
    std::size_t phase_index = 0;
    std::string report_csv;
    std::string report_json;

    // bench
    std::string tier = "required";
    std::vector<std::string> cases;
    bool parallel = false;
};

/// Parses argv (argv[0] is the program). Throws UsageError with a message
/// suitable for printing; --help text is returned through `help` when
/// requested, in which case the returned config should not be run.
RunConfig parse_args(int argc, const char* const* argv, std::string* help = nullptr);
/// Checks invariants (n_starts >= 1 with nlp, budget > 0). Throws UsageError.
void validate(const RunConfig& config);

/// Spec plus a "run" object with command, solver, n_starts, seed, budget_s.
nlohmann::json dump_config(const RunConfig& config);
/// Fields compared by the --dump-spec round trip: the resolved spec and the run options.
bool same_config(const RunConfig& a, const RunConfig& b);

int exit_code(SolveStatus status);

/// One column per depth, left to right. Identities are plain wire.
std::string render_circuit(std::span<const std::size_t> sequence, const CircuitModel& model);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);
/// parse_args + validate + run, with usage errors mapped to exit code 1.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qcd::cli
