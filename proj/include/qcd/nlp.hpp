#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcd/exact.hpp"
#include "qcd/model.hpp"

namespace qcd {

/// How multistart assigns target phases. `all` solves every phase from the
/// same start and keeps the best feasible outcome; `cycle` gives start i the
/// phase i mod |phase set| only.
enum class PhasePolicy { all, cycle };

struct NlpOptions {
    double rho0 = 10.0;
    double rho_growth = 10.0;
    double rho_max = 1e12;
    int max_inner = 500;
    int max_outer = 50;
    double feas_tol = 1e-6;
    double pg_tol = 1e-6;
    double armijo = 1e-4;
    /// Armijo compares against the max of this many recent values (1: monotone).
    int nonmonotone_memory = 10;
    PhasePolicy phase_policy = PhasePolicy::all;
    /// Per-outer-iteration progress lines, when set.
    std::ostream* trace = nullptr;
    /// Multistart stops launching starts after this many seconds (0: no limit).
    /// Starts already running finish.
    double time_limit_s = 0.0;
    /// Worker threads for multistart; 0 picks QCD_WORKERS or the hardware concurrency.
    unsigned workers = 0;
};

/// Relaxed point: z in depth-major blocks of K (each on the unit simplex)
/// and the entries of Ghat_1..Ghat_{D-1} in [-1, 1].
struct NlpState {
    std::vector<double> z;
    std::vector<double> ghat;
    /// One per scalar product constraint, D blocks of m*m.
    std::vector<double> multipliers;
    double penalty = 10.0;
    /// Index into the model's phase set for the target.
    std::size_t phase = 0;
    int outer_iterations = 0;
    int inner_iterations = 0;
};

struct StartSample {
    std::vector<double> z0;
    std::vector<double> ghat0;
    std::uint64_t seed = 0;
    std::size_t phase = 0;
};

/// A random vertex per depth simplex and Ghat ~ U(-1, 1), from mt19937_64(seed).
StartSample random_start(const CircuitModel& model, std::uint64_t seed, std::size_t phase = 0);
/// Binary z for the sequence and its exact cumulative products.
StartSample start_from_sequence(const CircuitModel& model, std::span<const std::size_t> sequence,
                                std::size_t phase);

NlpState initial_state(const StartSample& start, const CircuitModel& model, const NlpOptions& options = {});

enum class LocalStatus { feasible, stalled, diverged };
std::string local_status_name(LocalStatus s);

struct LocalResult {
    LocalStatus status = LocalStatus::stalled;
    double objective = 0.0;
    double residual_inf = 0.0;
    double integrality_gap = 0.0;
    /// Max-norm of x - P(x - grad L) at the last inner iterate.
    double projected_gradient = 0.0;
    NlpState state;
    int iterations = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

/// All product-constraint violations, depth by depth, row-major m*m each.
std::vector<double> residuals(const NlpState& state, const CircuitModel& model);
double relaxed_objective(std::span<const double> z, const CircuitModel& model);
/// f + lambda^T c + (rho / 2) |c|^2 at the state's multipliers and penalty.
double augmented_lagrangian(const NlpState& state, const CircuitModel& model);
/// Gradient of augmented_lagrangian with respect to [z, ghat].
std::vector<double> lagrangian_gradient(const NlpState& state, const CircuitModel& model);

/// Euclidean projection onto {x >= 0, sum x = 1}.
void project_simplex(std::span<double> block);
/// Projects every z block onto its simplex and clips ghat to [-1, 1].
NlpState project(NlpState state, const CircuitModel& model);

LocalResult solve_local(const StartSample& start, const CircuitModel& model, const NlpOptions& options = {});

struct MultistartResult {
    /// Feasible run of least objective; ties by wall time, then seed.
    std::optional<LocalResult> best;
    /// Completed starts in seed order.
    std::vector<LocalResult> runs;
    /// Starts not launched because the time limit passed.
    int skipped = 0;
};

/// One start from seed `seed` under the options' phase policy. Time and
/// iterations are summed over the phases tried.
LocalResult solve_start(const CircuitModel& model, std::uint64_t seed, int index, const NlpOptions& options = {});

/// Seeds base_seed .. base_seed + n - 1.
MultistartResult multistart(const CircuitModel& model, int n_starts, std::uint64_t base_seed,
                            const NlpOptions& options = {});

double integrality_gap(std::span<const double> z);

struct RoundOutcome {
    std::optional<Solution> solution;
    double gap = 0.0;
    double max_error = 0.0;
    std::string reason;
    bool ok() const { return solution.has_value(); }
};

/// Rounds each depth block to its largest entry and verifies the product.
/// Rejects results that are not feasible or whose gap exceeds 1e-2.
RoundOutcome round_and_verify(const LocalResult& result, const CircuitModel& model);

/// seed,status,objective,residual_inf,integrality_gap,iterations,wall_time_s
void write_stats_csv(std::span<const LocalResult> runs, std::ostream& out);

}  // namespace qcd
