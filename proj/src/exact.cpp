#include "qcd/exact.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>
#include <unordered_set>

#include "qcd/simd/kernels.hpp"

namespace qcd {

std::string status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

Verification verify_solution(std::span<const std::size_t> sequence, const CircuitModel& model, double tol) {
    if (sequence.size() > static_cast<std::size_t>(model.max_depth))
        throw std::invalid_argument("sequence has more slots than the maximum depth");
    ComplexMatrix p = ComplexMatrix::identity(model.n_qubits);
    for (std::size_t k : sequence) p = p * model.gate_matrices.at(k);
    Verification v;
    v.max_error = std::numeric_limits<double>::infinity();
    for (const Complex& phase : model.phase_set) {
        const double err = p.max_abs_diff(model.target_matrix.scaled(phase));
        if (err < v.max_error) {
            v.max_error = err;
            v.phase = phase;
        }
    }
    v.ok = v.max_error <= tol;
    return v;
}

std::vector<std::size_t> canonical_sequence(std::span<const std::size_t> gates, const CircuitModel& model) {
    std::vector<std::size_t> out;
    for (std::size_t k : gates)
        if (k != model.identity_index) out.push_back(k);
    if (out.size() > static_cast<std::size_t>(model.max_depth))
        throw std::invalid_argument("sequence longer than the maximum depth");
    out.resize(model.max_depth, model.identity_index);
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

struct Fingerprint {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    bool operator==(const Fingerprint&) const = default;
};

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Maps a matrix to a fixed representative of its orbit under multiplication
// by the k-th roots of unity, then hashes its quantized entries.
class Keyer {
  public:
    Keyer(std::size_t dim, int fold, double step) : len_(dim * dim), fold_(fold), inv_step_(1.0 / step) {}

    Fingerprint key(const double* re, const double* im, std::int32_t* scratch) const {
        std::size_t pivot = len_;
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t t = 0; t < len_; ++t) {
            const double mag = re[t] * re[t] + im[t] * im[t];
            if (mag > 0.04) {
                pivot = t;
                break;
            }
            if (mag > best_mag) {
                best_mag = mag;
                best = t;
            }
        }
        if (pivot == len_) pivot = best;
        int j = 0;
        if (fold_ > 1) {
            const double sector = 2.0 * std::numbers::pi / fold_;
            const double start = -std::numbers::pi / fold_ + 0.1234;
            const double arg = std::atan2(im[pivot], re[pivot]);
            j = static_cast<int>(std::floor((arg - start) / sector));
            j = ((j % fold_) + fold_) % fold_;
        }
        // Rotate by exp(-2 pi i j / k) into scratch as interleaved (re, im) integers.
        const double ang = -2.0 * std::numbers::pi * j / std::max(fold_, 1);
        double c = std::cos(ang), s = std::sin(ang);
        if (fold_ == 4 || fold_ == 2) {
            static constexpr double cs[4] = {1, 0, -1, 0};
            static constexpr double sn[4] = {0, -1, 0, 1};
            const int q = fold_ == 2 ? 2 * j : j;
            c = cs[q];
            s = sn[q];
        }
        buf_.resize(2 * len_);
        for (std::size_t t = 0; t < len_; ++t) {
            buf_[t] = re[t] * c - im[t] * s;
            buf_[len_ + t] = re[t] * s + im[t] * c;
        }
        simd::quantize(2 * len_, buf_.data(), inv_step_, scratch);
        std::uint64_t h1 = 0x243f6a8885a308d3ULL, h2 = 0x13198a2e03707344ULL;
        for (std::size_t t = 0; t < 2 * len_; ++t) {
            const auto v = static_cast<std::uint64_t>(static_cast<std::uint32_t>(scratch[t]));
            h1 = mix(h1 ^ v);
            h2 = mix(h2 + v * 0x9fb21c651e98df25ULL + t);
        }
        return {h1, h2};
    }

  private:
    std::size_t len_;
    int fold_;
    double inv_step_;
    mutable std::vector<double> buf_;
};

struct Node {
    Fingerprint fp;
    std::uint32_t parent;
    std::uint16_t gate;
    std::uint8_t cost;
};

// Open-addressing set of node ids keyed by fingerprint.
class NodeTable {
  public:
    explicit NodeTable(const std::vector<Node>& nodes) : nodes_(nodes), slots_(1024, 0) {}

    std::uint32_t find(const Fingerprint& fp) const {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t s = fp.a & mask;; s = (s + 1) & mask) {
            const std::uint32_t v = slots_[s];
            if (v == 0) return kNoParent;
            if (nodes_[v - 1].fp == fp) return v - 1;
        }
    }
    void insert(std::uint32_t id) {
        if (2 * (count_ + 1) > slots_.size()) grow();
        place(id);
        ++count_;
    }
    std::size_t bytes() const { return slots_.size() * sizeof(std::uint32_t); }

  private:
    void place(std::uint32_t id) {
        const std::size_t mask = slots_.size() - 1;
        std::size_t s = nodes_[id].fp.a & mask;
        while (slots_[s] != 0) s = (s + 1) & mask;
        slots_[s] = id + 1;
    }
    void grow() {
        std::vector<std::uint32_t> old(slots_.size() * 2, 0);
        old.swap(slots_);
        for (std::uint32_t v : old)
            if (v != 0) place(v - 1);
    }
    const std::vector<Node>& nodes_;
    std::vector<std::uint32_t> slots_;
    std::size_t count_ = 0;
};

struct Side {
    std::vector<Node> nodes;
    NodeTable table{nodes};
    // Matrices of the newest cost layer, 2 * n^2 doubles per node (re block, im block).
    std::vector<std::uint32_t> frontier;
    std::vector<double> arena;
    int radius = 0;
    bool exhausted = false;
};

std::uint64_t pack(std::span<const std::size_t> w) {
    std::uint64_t v = 0;
    for (std::size_t k : w) v = (v << 16) | static_cast<std::uint64_t>(k);
    return v;
}

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QCD_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

bool is_root_group(std::span<const Complex> phases, int& k) {
    k = static_cast<int>(phases.size());
    for (int j = 0; j < k; ++j) {
        const Complex w = std::polar(1.0, 2.0 * std::numbers::pi * j / k);
        const bool present = std::any_of(phases.begin(), phases.end(),
                                         [&](const Complex& p) { return std::abs(p - w) < 1e-12; });
        if (!present) return false;
    }
    return true;
}

class Search {
  public:
    Search(const CircuitModel& model, const SearchBudget& budget, const SearchOptions& options)
        : model_(model),
          budget_(budget),
          options_(options),
          dim_(model.target_matrix.dim()),
          stride_(2 * dim_ * dim_),
          workers_(resolve_workers(options.workers)),
          start_(Clock::now()) {
        int k = 1;
        fold_ = is_root_group(model.phase_set, k) ? k : 1;
        for (std::size_t g = 0; g < model.n_gates; ++g) {
            if (g == model.identity_index) continue;
            moves_.push_back(g);
            adjoints_.push_back(model.gate_matrices[g].adjoint());
        }
        if (options.symmetry_pruning) {
            for (const auto& s : model.symmetry) {
                if (s.terms.size() != 4) continue;
                std::array<std::size_t, 4> w{};
                for (const auto& [kk, off] : s.terms) w[off] = kk;
                const std::uint64_t key = pack(w);
                if (reducible_.count(key) || checked_.count(key)) continue;
                if (window_is_reducible(model.gate_matrices, model.identity_index, w))
                    reducible_.insert(key);
                else
                    checked_.insert(key);
            }
        }
    }

    Solution run();

  private:
    void seed(Side& side, const ComplexMatrix& m) {
        const Keyer keyer(dim_, fold_, options_.quant_step);
        std::vector<std::int32_t> scratch(stride_);
        const Fingerprint fp = keyer.key(m.re().data(), m.im().data(), scratch.data());
        if (side.table.find(fp) != kNoParent) return;
        const auto id = static_cast<std::uint32_t>(side.nodes.size());
        side.nodes.push_back({fp, kNoParent, 0, 0});
        side.table.insert(id);
        side.frontier.push_back(id);
        side.arena.insert(side.arena.end(), m.re().begin(), m.re().end());
        side.arena.insert(side.arena.end(), m.im().begin(), m.im().end());
    }

    // Gates along the parent chain, newest first, at most `count` of them.
    std::vector<std::size_t> chain(const Side& side, std::uint32_t id, std::size_t count) const {
        std::vector<std::size_t> out;
        while (id != kNoParent && out.size() < count) {
            const Node& n = side.nodes[id];
            if (n.parent == kNoParent) break;
            out.push_back(n.gate);
            id = n.parent;
        }
        return out;
    }

    bool pruned(bool forward, std::span<const std::size_t> recent, std::size_t g) const {
        if (reducible_.empty() || recent.size() < 3) return false;
        std::array<std::size_t, 4> w{};
        if (forward) {
            w = {recent[2], recent[1], recent[0], g};
        } else {
            w = {g, recent[0], recent[1], recent[2]};
        }
        return reducible_.count(pack(w)) != 0;
    }

    bool out_of_time() const {
        return std::chrono::duration<double>(Clock::now() - start_).count() > budget_.time_limit_s;
    }

    // Grows one cost layer of `side`, recording joins with `other`.
    // Returns false when a budget or cap interrupts the layer.
    bool grow(Side& side, const Side& other, bool forward);

    std::vector<std::size_t> sequence_of(std::uint32_t fwd, std::uint32_t bwd) const {
        std::vector<std::size_t> f = chain(fwd_, fwd, std::numeric_limits<std::size_t>::max());
        std::reverse(f.begin(), f.end());
        const std::vector<std::size_t> b = chain(bwd_, bwd, std::numeric_limits<std::size_t>::max());
        f.insert(f.end(), b.begin(), b.end());
        return f;
    }

    bool depth_first(int cost, std::vector<std::size_t>& found);

    const CircuitModel& model_;
    SearchBudget budget_;
    SearchOptions options_;
    std::size_t dim_;
    std::size_t stride_;
    unsigned workers_;
    Clock::time_point start_;
    int fold_ = 1;
    std::vector<std::size_t> moves_;
    std::vector<ComplexMatrix> adjoints_;
    std::unordered_set<std::uint64_t> reducible_;
    std::unordered_set<std::uint64_t> checked_;
    Side fwd_;
    Side bwd_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> hits_;
    std::size_t expanded_ = 0;
    bool interrupted_by_cap_ = false;
};

bool Search::grow(Side& side, const Side& other, bool forward) {
    const std::size_t G = moves_.size();
    const std::size_t chunk = std::max<std::size_t>(1, (std::size_t{8} << 20) / (G * stride_ * sizeof(double)));
    const auto next_cost = static_cast<std::uint8_t>(side.radius + 1);
    std::vector<std::uint32_t> next_frontier;
    std::vector<double> next_arena;

    std::vector<double> child(chunk * G * stride_);
    std::vector<Fingerprint> fps(chunk * G);
    std::vector<char> keep(chunk * G);

    const std::size_t n2 = dim_ * dim_;
    auto work = [&](std::size_t begin, std::size_t end, std::size_t base) {
        const Keyer keyer(dim_, fold_, options_.quant_step);
        std::vector<std::int32_t> scratch(stride_);
        for (std::size_t t = begin; t < end; ++t) {
            const std::uint32_t id = side.frontier[base + t];
            const double* pr = side.arena.data() + (base + t) * stride_;
            const double* pi = pr + n2;
            const std::vector<std::size_t> recent = chain(side, id, 3);
            for (std::size_t gi = 0; gi < G; ++gi) {
                const std::size_t slot = t * G + gi;
                keep[slot] = !pruned(forward, recent, moves_[gi]);
                if (!keep[slot]) continue;
                const ComplexMatrix& m = forward ? model_.gate_matrices[moves_[gi]] : adjoints_[gi];
                double* cr = child.data() + slot * stride_;
                double* ci = cr + n2;
                simd::cmatmul(dim_, pr, pi, m.re().data(), m.im().data(), cr, ci);
                fps[slot] = keyer.key(cr, ci, scratch.data());
            }
        }
    };

    for (std::size_t base = 0; base < side.frontier.size(); base += chunk) {
        if (out_of_time()) return false;
        const std::size_t count = std::min(chunk, side.frontier.size() - base);
        const unsigned nw = static_cast<unsigned>(std::min<std::size_t>(workers_, count));
        if (nw <= 1) {
            work(0, count, base);
        } else {
            std::vector<std::thread> pool;
            const std::size_t per = (count + nw - 1) / nw;
            for (unsigned w = 0; w < nw; ++w) {
                const std::size_t b = w * per, e = std::min(count, b + per);
                if (b < e) pool.emplace_back(work, b, e, base);
            }
            for (auto& th : pool) th.join();
        }
        expanded_ += count;
        // Merge in frontier order so results do not depend on the worker count.
        for (std::size_t t = 0; t < count; ++t) {
            const std::uint32_t parent = side.frontier[base + t];
            for (std::size_t gi = 0; gi < G; ++gi) {
                const std::size_t slot = t * G + gi;
                if (!keep[slot] || side.table.find(fps[slot]) != kNoParent) continue;
                const auto id = static_cast<std::uint32_t>(side.nodes.size());
                side.nodes.push_back({fps[slot], parent, static_cast<std::uint16_t>(moves_[gi]), next_cost});
                side.table.insert(id);
                next_frontier.push_back(id);
                const double* src = child.data() + slot * stride_;
                next_arena.insert(next_arena.end(), src, src + stride_);
                const std::uint32_t match = other.table.find(fps[slot]);
                if (match != kNoParent) {
                    if (forward)
                        hits_.emplace_back(id, match);
                    else
                        hits_.emplace_back(match, id);
                }
            }
        }
        const std::size_t stored = fwd_.nodes.size() + bwd_.nodes.size();
        if (budget_.node_limit > 0 && stored > budget_.node_limit) return false;
        const std::size_t bytes = (next_arena.size() + side.arena.size() + other.arena.size()) * sizeof(double);
        if (stored > options_.frontier_cap || bytes > options_.matrix_bytes_cap) {
            interrupted_by_cap_ = true;
            return false;
        }
    }
    side.frontier = std::move(next_frontier);
    side.arena = std::move(next_arena);
    side.radius += 1;
    side.exhausted = side.frontier.empty();
    return true;
}

bool Search::depth_first(int cost, std::vector<std::size_t>& found) {
    const Keyer keyer(dim_, fold_, options_.quant_step);
    std::vector<std::int32_t> scratch(stride_);
    std::vector<Fingerprint> goals;
    for (std::uint32_t id = 0; id < bwd_.nodes.size(); ++id)
        if (bwd_.nodes[id].cost == 0) goals.push_back(bwd_.nodes[id].fp);

    const std::size_t n2 = dim_ * dim_;
    std::vector<std::vector<double>> stack(cost + 1, std::vector<double>(stride_));
    const ComplexMatrix id = ComplexMatrix::identity(model_.n_qubits);
    std::copy(id.re().begin(), id.re().end(), stack[0].begin());
    std::copy(id.im().begin(), id.im().end(), stack[0].begin() + n2);
    std::vector<std::size_t> seq(cost);
    std::vector<std::size_t> choice(cost + 1, 0);
    std::size_t leaves = 0;
    int level = 0;
    while (level >= 0) {
        if (level == cost) {
            const Fingerprint fp = keyer.key(stack[level].data(), stack[level].data() + n2, scratch.data());
            if (std::find(goals.begin(), goals.end(), fp) != goals.end()) {
                found = seq;
                return true;
            }
            if ((++leaves & 4095) == 0 && out_of_time()) return false;
            --level;
            continue;
        }
        if (choice[level] == moves_.size()) {
            choice[level] = 0;
            --level;
            continue;
        }
        const std::size_t g = moves_[choice[level]++];
        if (level >= 3) {
            const std::array<std::size_t, 3> recent{seq[level - 1], seq[level - 2], seq[level - 3]};
            if (pruned(true, recent, g)) continue;
        }
        seq[level] = g;
        const ComplexMatrix& m = model_.gate_matrices[g];
        simd::cmatmul(dim_, stack[level].data(), stack[level].data() + n2, m.re().data(), m.im().data(),
                      stack[level + 1].data(), stack[level + 1].data() + n2);
        ++expanded_;
        ++level;
    }
    return false;
}

Solution Search::run() {
    Solution sol;
    seed(fwd_, ComplexMatrix::identity(model_.n_qubits));
    if (fold_ > 1) {
        seed(bwd_, model_.target_matrix);
    } else {
        for (const Complex& p : model_.phase_set) seed(bwd_, model_.target_matrix.scaled(p));
    }
    for (std::uint32_t b = 0; b < bwd_.nodes.size(); ++b)
        if (fwd_.table.find(bwd_.nodes[b].fp) != kNoParent) hits_.emplace_back(0, b);

    auto finish = [&](SolveStatus status) {
        sol.status = status;
        sol.nodes_expanded = expanded_;
        sol.states_stored = fwd_.nodes.size() + bwd_.nodes.size();
        sol.wall_time_s = std::chrono::duration<double>(Clock::now() - start_).count();
        return sol;
    };
    auto accept = [&](std::vector<std::size_t> seq) {
        sol.sequence = canonical_sequence(seq, model_);
        const Verification v = verify_solution(sol.sequence, model_);
        sol.objective = static_cast<int>(seq.size());
        sol.matched_phase = v.phase;
        sol.max_error = v.max_error;
        sol.lower_bound = sol.objective;
        ComplexMatrix p = ComplexMatrix::identity(model_.n_qubits);
        for (std::size_t k : sol.sequence) p = p * model_.gate_matrices[k];
        sol.product = std::move(p);
        return v.ok;
    };

    const int D = model_.max_depth;
    while (true) {
        if (!hits_.empty()) {
            std::vector<std::size_t> best;
            bool have = false;
            for (const auto& [f, b] : hits_) {
                std::vector<std::size_t> s = sequence_of(f, b);
                if (static_cast<int>(s.size()) > D) continue;
                if (!have || s.size() < best.size() || (s.size() == best.size() && s < best)) {
                    best = std::move(s);
                    have = true;
                }
            }
            // A key collision that fails verification is discarded and the search goes on.
            if (have && accept(best)) return finish(SolveStatus::optimal);
            hits_.clear();
        }
        const int explored = fwd_.radius + bwd_.radius;
        sol.lower_bound = explored + 1;
        if (explored >= D || fwd_.exhausted || bwd_.exhausted) {
            sol.lower_bound = std::max(sol.lower_bound, D + 1);
            return finish(SolveStatus::infeasible);
        }
        const bool forward = !options_.bidirectional || fwd_.frontier.size() <= bwd_.frontier.size();
        Side& side = forward ? fwd_ : bwd_;
        const Side& other = forward ? bwd_ : fwd_;
        if (!grow(side, other, forward)) break;
    }

    if (!interrupted_by_cap_) return finish(SolveStatus::budget_exhausted);

    // Too many states to keep layering: fall back to depth-first search over
    // full sequences, one cost at a time, starting at the proven bound.
    sol.depth_first_fallback = true;
    hits_.clear();
    fwd_.arena.clear();
    fwd_.arena.shrink_to_fit();
    bwd_.arena.clear();
    bwd_.arena.shrink_to_fit();
    for (int cost = sol.lower_bound; cost <= D; ++cost) {
        std::vector<std::size_t> seq;
        if (depth_first(cost, seq)) {
            if (accept(seq)) return finish(SolveStatus::optimal);
        }
        if (out_of_time()) return finish(SolveStatus::budget_exhausted);
        sol.lower_bound = cost + 1;
    }
    return finish(SolveStatus::infeasible);
}

}  // namespace

Solution solve_global(const CircuitModel& model, const SearchBudget& budget, const SearchOptions& options) {
    if (!is_integer(model.variant))
        throw std::invalid_argument("the exact solver needs an integer model variant (minlp or milp)");
    if (options.quant_step <= 0.0 || options.quant_step > 1e-3)
        throw std::invalid_argument("quantization step must lie in (0, 1e-3]");
    if (model.n_gates > 65535) throw std::invalid_argument("too many input gates");
    if (model.max_depth > 250) throw std::invalid_argument("maximum depth too large");
    Search search(model, budget, options);
    return search.run();
}

std::optional<int> enumerate_bruteforce(const CircuitModel& model, int max_cost) {
    const std::size_t K = model.n_gates;
    const int D = model.max_depth;
    double total = 1.0;
    for (int d = 0; d < D; ++d) total *= static_cast<double>(K);
    if (total > 1e6) throw std::length_error("brute force needs K^D <= 10^6");

    std::optional<int> best;
    std::vector<std::size_t> digit(D, 0);
    const auto count = static_cast<std::size_t>(total);
    for (std::size_t it = 0; it < count; ++it) {
        int cost = 0;
        for (std::size_t k : digit) cost += k != model.identity_index;
        if (cost <= max_cost && (!best || cost < *best)) {
            ComplexMatrix p = ComplexMatrix::identity(model.n_qubits);
            for (std::size_t k : digit) p = p * model.gate_matrices[k];
            for (const Complex& phase : model.phase_set) {
                if (p.max_abs_diff(model.target_matrix.scaled(phase)) <= 1e-6) {
                    best = cost;
                    break;
                }
            }
        }
        for (int pos = D - 1; pos >= 0; --pos) {
            if (++digit[pos] < K) break;
            digit[pos] = 0;
        }
    }
    return best;
}

nlohmann::json solution_to_json(const Solution& s, const CircuitModel& model) {
    nlohmann::json j;
    j["status"] = status_name(s.status);
    j["target"] = model.target_name;
    j["max_depth"] = model.max_depth;
    j["objective"] = s.objective;
    j["lower_bound"] = s.lower_bound;
    nlohmann::json names = nlohmann::json::array();
    nlohmann::json idx = nlohmann::json::array();
    for (std::size_t k : s.sequence) {
        names.push_back(model.gate_names[k]);
        idx.push_back(k);
    }
    j["sequence"] = names;
    j["sequence_indices"] = idx;
    j["matched_phase"] = {s.matched_phase.real(), s.matched_phase.imag()};
    j["max_error"] = s.max_error;
    j["nodes_expanded"] = s.nodes_expanded;
    j["states_stored"] = s.states_stored;
    j["depth_first_fallback"] = s.depth_first_fallback;
    j["wall_time_s"] = s.wall_time_s;
    return j;
}

}  // namespace qcd
