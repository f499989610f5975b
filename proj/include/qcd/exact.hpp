#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcd/model.hpp"

namespace qcd {

/// `feasible`: verified but not proven optimal (e.g. a rounded relaxation point).
enum class SolveStatus { optimal, feasible, infeasible, budget_exhausted };
std::string status_name(SolveStatus s);

struct SearchBudget {
    double time_limit_s = 300.0;
    /// Stop after this many stored states (0: no limit).
    std::size_t node_limit = 0;
};

struct SearchOptions {
    /// Grid used to key cumulative products for deduplication.
    double quant_step = 1e-6;
    /// Skip extensions whose last four gates form a reducible symmetry pattern.
    bool symmetry_pruning = true;
    /// Grow cost layers from both the identity and the target and join them.
    /// When false the search only grows forward from the identity.
    bool bidirectional = true;
    /// Stored-state cap; past it the search continues depth-first.
    std::size_t frontier_cap = 20'000'000;
    /// Cap on bytes held by frontier matrices; past it the search continues depth-first.
    std::size_t matrix_bytes_cap = std::size_t{1} << 31;
    /// 0 picks QCD_WORKERS or the hardware concurrency.
    unsigned workers = 0;
};

struct Solution {
    /// Gate index per depth 1..D; identities trail the non-identity gates.
    std::vector<std::size_t> sequence;
    /// Number of non-identity gates; -1 when no sequence is known.
    int objective = -1;
    Complex matched_phase{1.0, 0.0};
    ComplexMatrix product;
    SolveStatus status = SolveStatus::infeasible;
    double max_error = 0.0;
    /// No sequence cheaper than this exists (proven by the layers explored).
    int lower_bound = 0;
    std::size_t nodes_expanded = 0;
    std::size_t states_stored = 0;
    bool depth_first_fallback = false;
    double wall_time_s = 0.0;
};

struct Verification {
    bool ok = false;
    Complex phase{1.0, 0.0};
    /// Smallest max-abs deviation over the phase set.
    double max_error = 0.0;
};

/// Multiplies the sequence's gates in order and compares against phase * T
/// for every phase in the model's phase set.
Verification verify_solution(std::span<const std::size_t> sequence, const CircuitModel& model,
                             double tol = 1e-6);

/// Minimum-cost sequence of at most D gates whose product matches the
/// target up to a listed phase. Layers are explored in nondecreasing cost,
/// so the first match is optimal. Requires an integer model variant.
Solution solve_global(const CircuitModel& model, const SearchBudget& budget = {},
                      const SearchOptions& options = {});

/// Tries all K^D sequences without deduplication or pruning and returns the
/// minimum cost among verifying ones with cost <= max_cost (nullopt if none).
/// Throws std::length_error when K^D exceeds 10^6.
std::optional<int> enumerate_bruteforce(const CircuitModel& model, int max_cost);

/// Pads with identities to length D, moving identities behind the other gates.
std::vector<std::size_t> canonical_sequence(std::span<const std::size_t> gates, const CircuitModel& model);

nlohmann::json solution_to_json(const Solution& s, const CircuitModel& model);

}  // namespace qcd
