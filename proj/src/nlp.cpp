#include "qcd/nlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <tuple>
#include <ostream>
#include <random>
#include <thread>

#include "qcd/simd/kernels.hpp"

namespace qcd {

namespace {

using Clock = std::chrono::steady_clock;

// Residuals and augmented-Lagrangian gradients over a flat x = [z, ghat].
class Evaluator {
  public:
    Evaluator(const CircuitModel& model, std::size_t phase)
        : K_(model.n_gates),
          D_(model.max_depth),
          m_(model.initial.dim()),
          mm_(m_ * m_),
          model_(model),
          target_(model.target_for_phase(phase)),
          G_(D_ * mm_),
          C_(D_ * mm_),
          Y_(D_ * mm_),
          dG_(D_ * mm_),
          tmp_(mm_) {
        for (std::size_t k = 0; k < K_; ++k) cost_.push_back(model.objective_coeff(k));
    }

    std::size_t nz() const { return K_ * D_; }
    std::size_t ng() const { return (D_ - 1) * mm_; }
    std::size_t n() const { return nz() + ng(); }

    const double* ghat(const double* x, int d) const {
        return d == 0 ? model_.initial.data().data() : x + nz() + (d - 1) * mm_;
    }

    // Fills G_ and C_.
    void constraints(const double* x) {
        for (int d = 0; d < D_; ++d) {
            double* g = G_.data() + d * mm_;
            std::fill(g, g + mm_, 0.0);
            for (std::size_t k = 0; k < K_; ++k) {
                const double w = x[d * K_ + k];
                if (w != 0.0) simd::axpy(mm_, w, model_.inputs[k].data().data(), g);
            }
        }
        const double* t = target_.data().data();
        for (int d = 1; d <= D_; ++d) {
            double* c = C_.data() + (d - 1) * mm_;
            simd::matmul(m_, ghat(x, d - 1), G_.data() + (d - 1) * mm_, c);
            if (d == D_) {
                for (std::size_t e = 0; e < mm_; ++e) c[e] -= t[e];
            } else {
                const double* gh = ghat(x, d);
                for (std::size_t e = 0; e < mm_; ++e) c[e] = gh[e] - c[e];
            }
        }
    }

    double value(const double* x, const std::vector<double>& lambda, double rho) {
        constraints(x);
        double f = 0.0;
        for (int d = 0; d < D_; ++d)
            for (std::size_t k = 0; k < K_; ++k) f += cost_[k] * x[d * K_ + k];
        const std::size_t len = D_ * mm_;
        return f + simd::dot(len, lambda.data(), C_.data()) + 0.5 * rho * simd::dot(len, C_.data(), C_.data());
    }

    // Value and gradient; grad must have n() entries.
    double value_grad(const double* x, const std::vector<double>& lambda, double rho, double* grad) {
        const double L = value(x, lambda, rho);
        const std::size_t len = D_ * mm_;
        for (std::size_t e = 0; e < len; ++e) Y_[e] = lambda[e] + rho * C_[e];
        std::fill(grad + nz(), grad + n(), 0.0);
        for (int d = 1; d <= D_; ++d) {
            const double* Y = Y_.data() + (d - 1) * mm_;
            double* dG = dG_.data() + (d - 1) * mm_;
            // Product term is +/- Ghat_{d-1} * G_d depending on which side it sits.
            const double sign = d == D_ ? 1.0 : -1.0;
            simd::matmul_tn(m_, ghat(x, d - 1), Y, dG);
            if (sign < 0)
                for (std::size_t e = 0; e < mm_; ++e) dG[e] = -dG[e];
            if (d < D_) {
                double* gd = grad + nz() + (d - 1) * mm_;
                for (std::size_t e = 0; e < mm_; ++e) gd[e] += Y[e];
            }
            if (d >= 2) {
                // d/dGhat_{d-1} of <Y_d, sign * Ghat_{d-1} G_d> is sign * Y_d G_d^T.
                simd::matmul_nt(m_, Y, G_.data() + (d - 1) * mm_, tmp_.data());
                simd::axpy(mm_, sign, tmp_.data(), grad + nz() + (d - 2) * mm_);
            }
            for (std::size_t k = 0; k < K_; ++k)
                grad[(d - 1) * K_ + k] = cost_[k] + simd::dot(mm_, model_.inputs[k].data().data(), dG);
        }
        return L;
    }

    const std::vector<double>& last_constraints() const { return C_; }
    std::size_t K() const { return K_; }
    int D() const { return D_; }

  private:
    std::size_t K_;
    int D_;
    std::size_t m_;
    std::size_t mm_;
    const CircuitModel& model_;
    RealEmbedding target_;
    std::vector<double> cost_;
    std::vector<double> G_, C_, Y_, dG_, tmp_;
};

void check_state(const NlpState& s, const CircuitModel& model) {
    const std::size_t m = model.initial.dim();
    if (s.z.size() != model.n_gates * model.max_depth ||
        s.ghat.size() != static_cast<std::size_t>(model.max_depth - 1) * m * m)
        throw std::invalid_argument("state dimensions do not match the model");
    if (s.phase >= model.phase_set.size()) throw std::invalid_argument("phase index out of range");
}

std::vector<double> flatten(const NlpState& s) {
    std::vector<double> x(s.z);
    x.insert(x.end(), s.ghat.begin(), s.ghat.end());
    return x;
}

void unflatten(const std::vector<double>& x, NlpState& s) {
    std::copy(x.begin(), x.begin() + s.z.size(), s.z.begin());
    std::copy(x.begin() + s.z.size(), x.end(), s.ghat.begin());
}

void project_flat(std::vector<double>& x, std::size_t K, int D) {
    for (int d = 0; d < D; ++d) project_simplex(std::span<double>(x.data() + d * K, K));
    for (std::size_t i = K * D; i < x.size(); ++i) x[i] = std::clamp(x[i], -1.0, 1.0);
}

double projected_gradient_inf(const std::vector<double>& x, const std::vector<double>& g, std::size_t K, int D,
                              std::vector<double>& scratch) {
    scratch.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = x[i] - g[i];
    project_flat(scratch, K, D);
    return simd::max_abs_diff(x.size(), x.data(), scratch.data());
}

double max_abs(const std::vector<double>& v) { return v.empty() ? 0.0 : simd::max_abs(v.size(), v.data()); }

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QCD_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::string local_status_name(LocalStatus s) {
    switch (s) {
        case LocalStatus::feasible: return "feasible";
        case LocalStatus::stalled: return "stalled";
        case LocalStatus::diverged: return "diverged";
    }
    return "?";
}

StartSample random_start(const CircuitModel& model, std::uint64_t seed, std::size_t phase) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, model.n_gates - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    StartSample s;
    s.seed = seed;
    s.phase = phase;
    s.z0.assign(model.n_gates * model.max_depth, 0.0);
    for (int d = 0; d < model.max_depth; ++d) s.z0[d * model.n_gates + pick(rng)] = 1.0;
    const std::size_t m = model.initial.dim();
    s.ghat0.resize(static_cast<std::size_t>(model.max_depth - 1) * m * m);
    for (double& v : s.ghat0) v = unit(rng);
    return s;
}

StartSample start_from_sequence(const CircuitModel& model, std::span<const std::size_t> sequence,
                                std::size_t phase) {
    if (sequence.size() != static_cast<std::size_t>(model.max_depth))
        throw std::invalid_argument("sequence length must equal the maximum depth");
    StartSample s;
    s.phase = phase;
    s.z0.assign(model.n_gates * model.max_depth, 0.0);
    const std::size_t m = model.initial.dim();
    RealEmbedding acc = model.initial;
    for (int d = 0; d < model.max_depth; ++d) {
        s.z0[d * model.n_gates + sequence[d]] = 1.0;
        acc = acc * model.inputs.at(sequence[d]);
        if (d + 1 < model.max_depth) s.ghat0.insert(s.ghat0.end(), acc.data().begin(), acc.data().end());
    }
    (void)m;
    return s;
}

NlpState initial_state(const StartSample& start, const CircuitModel& model, const NlpOptions& options) {
    NlpState s;
    s.z = start.z0;
    s.ghat = start.ghat0;
    s.phase = start.phase;
    s.penalty = options.rho0;
    const std::size_t m = model.initial.dim();
    s.multipliers.assign(static_cast<std::size_t>(model.max_depth) * m * m, 0.0);
    check_state(s, model);
    return s;
}

std::vector<double> residuals(const NlpState& state, const CircuitModel& model) {
    check_state(state, model);
    Evaluator ev(model, state.phase);
    const std::vector<double> x = flatten(state);
    ev.constraints(x.data());
    return ev.last_constraints();
}

double relaxed_objective(std::span<const double> z, const CircuitModel& model) {
    double f = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) f += model.objective_coeff(i % model.n_gates) * z[i];
    return f;
}

double augmented_lagrangian(const NlpState& state, const CircuitModel& model) {
    check_state(state, model);
    Evaluator ev(model, state.phase);
    const std::vector<double> x = flatten(state);
    return ev.value(x.data(), state.multipliers, state.penalty);
}

std::vector<double> lagrangian_gradient(const NlpState& state, const CircuitModel& model) {
    check_state(state, model);
    Evaluator ev(model, state.phase);
    const std::vector<double> x = flatten(state);
    std::vector<double> g(ev.n());
    ev.value_grad(x.data(), state.multipliers, state.penalty, g.data());
    return g;
}

void project_simplex(std::span<double> v) {
    if (v.empty()) return;
    // Shift-invariant; subtracting the max first keeps large BB steps from
    // cancelling away the sum.
    const double top = *std::max_element(v.begin(), v.end());
    for (double& x : v) x -= top;
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
}

NlpState project(NlpState state, const CircuitModel& model) {
    check_state(state, model);
    for (int d = 0; d < model.max_depth; ++d)
        project_simplex(std::span<double>(state.z.data() + d * model.n_gates, model.n_gates));
    for (double& v : state.ghat) v = std::clamp(v, -1.0, 1.0);
    return state;
}

double integrality_gap(std::span<const double> z) {
    double gap = 0.0;
    for (double v : z) gap = std::max(gap, std::min(v, 1.0 - v));
    return gap;
}

LocalResult solve_local(const StartSample& start, const CircuitModel& model, const NlpOptions& options) {
    const auto t0 = Clock::now();
    LocalResult res;
    res.seed = start.seed;
    NlpState st = initial_state(start, model, options);
    st = project(std::move(st), model);
    Evaluator ev(model, st.phase);
    const std::size_t K = model.n_gates;
    const int D = model.max_depth;
    const std::size_t n = ev.n();

    std::vector<double> x = flatten(st);
    std::vector<double> g(n), xn(n), gn(n), scratch;
    double prev_cinf = std::numeric_limits<double>::infinity();
    double pg = 0.0;
    res.status = LocalStatus::stalled;

    for (int outer = 1; outer <= options.max_outer; ++outer) {
        st.outer_iterations = outer;
        double L = ev.value_grad(x.data(), st.multipliers, st.penalty, g.data());
        double step = 1.0 / std::max(1.0, max_abs(g));
        const int memory = std::max(1, options.nonmonotone_memory);
        std::vector<double> recent(memory, L);
        for (int it = 0; it < options.max_inner; ++it) {
            const double Lref = *std::max_element(recent.begin(), recent.end());
            pg = projected_gradient_inf(x, g, K, D, scratch);
            if (pg <= options.pg_tol) break;
            bool accepted = false;
            double Ln = 0.0;
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] - step * g[i];
                project_flat(xn, K, D);
                double descent = 0.0;
                for (std::size_t i = 0; i < n; ++i) descent += g[i] * (xn[i] - x[i]);
                Ln = ev.value(xn.data(), st.multipliers, st.penalty);
                if (Ln <= Lref + options.armijo * descent) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            ++st.inner_iterations;
            if (!accepted) break;
            Ln = ev.value_grad(xn.data(), st.multipliers, st.penalty, gn.data());
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = xn[i] - x[i];
                const double y = gn[i] - g[i];
                ss += s * s;
                sy += s * y;
            }
            step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(step * 4.0, 1e12);
            x.swap(xn);
            g.swap(gn);
            L = Ln;
            recent[it % memory] = L;
        }
        pg = projected_gradient_inf(x, g, K, D, scratch);
        ev.constraints(x.data());
        const std::vector<double>& c = ev.last_constraints();
        const double cinf = max_abs(c);
        if (options.trace)
            *options.trace << "seed " << start.seed << " phase " << st.phase << " outer " << outer << " rho "
                           << st.penalty << " inner " << st.inner_iterations << " pg " << pg << " c " << cinf
                           << '\n';
        if (cinf <= options.feas_tol && pg <= options.pg_tol) {
            res.status = LocalStatus::feasible;
            break;
        }
        simd::axpy(c.size(), st.penalty, c.data(), st.multipliers.data());
        if (cinf > 0.25 * prev_cinf) {
            st.penalty *= options.rho_growth;
            if (st.penalty > options.rho_max) {
                res.status = LocalStatus::diverged;
                break;
            }
        }
        prev_cinf = cinf;
    }

    unflatten(x, st);
    ev.constraints(x.data());
    res.residual_inf = max_abs(ev.last_constraints());
    res.projected_gradient = pg;
    res.objective = relaxed_objective(st.z, model);
    res.integrality_gap = integrality_gap(st.z);
    res.iterations = st.inner_iterations;
    res.state = std::move(st);
    res.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
}

LocalResult solve_start(const CircuitModel& model, std::uint64_t seed, int index, const NlpOptions& options) {
    const std::size_t P = model.phase_set.size();
    if (options.phase_policy == PhasePolicy::cycle)
        return solve_local(random_start(model, seed, static_cast<std::size_t>(index) % P), model, options);
    std::optional<LocalResult> best;
    double total_time = 0.0;
    int total_iterations = 0;
    for (std::size_t p = 0; p < P; ++p) {
        LocalResult r = solve_local(random_start(model, seed, p), model, options);
        total_time += r.wall_time_s;
        total_iterations += r.iterations;
        const bool better = [&] {
            if (!best) return true;
            const bool rf = r.status == LocalStatus::feasible, bf = best->status == LocalStatus::feasible;
            if (rf != bf) return rf;
            if (rf) return r.objective < best->objective - 1e-9;
            return r.residual_inf < best->residual_inf;
        }();
        if (better) best = std::move(r);
    }
    best->wall_time_s = total_time;
    best->iterations = total_iterations;
    return *best;
}

MultistartResult multistart(const CircuitModel& model, int n_starts, std::uint64_t base_seed,
                            const NlpOptions& options) {
    if (n_starts < 1) throw std::invalid_argument("need at least one start");
    MultistartResult out;
    std::vector<std::optional<LocalResult>> slots(n_starts);
    const auto t0 = Clock::now();
    const bool limited = options.time_limit_s > 0.0;
    auto run_one = [&](int i) {
        if (limited && std::chrono::duration<double>(Clock::now() - t0).count() >= options.time_limit_s) return;
        slots[i] = solve_start(model, base_seed + i, i, options);
    };
    const unsigned nw = std::min<unsigned>(resolve_workers(options.workers), static_cast<unsigned>(n_starts));
    if (nw <= 1) {
        for (int i = 0; i < n_starts; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nw; ++w)
            pool.emplace_back([&, w] {
                for (int i = static_cast<int>(w); i < n_starts; i += static_cast<int>(nw)) run_one(i);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& r : slots)
        if (r) out.runs.push_back(std::move(*r));
    out.skipped = n_starts - static_cast<int>(out.runs.size());
    const auto key = [](const LocalResult& a) { return std::tuple(std::llround(a.objective * 1e6), a.wall_time_s, a.seed); };
    for (const auto& r : out.runs)
        if (r.status == LocalStatus::feasible && (!out.best || key(r) < key(*out.best))) out.best = r;
    return out;
}

RoundOutcome round_and_verify(const LocalResult& result, const CircuitModel& model) {
    RoundOutcome out;
    out.gap = integrality_gap(result.state.z);
    if (result.status != LocalStatus::feasible) {
        out.reason = "local solve ended " + local_status_name(result.status);
        return out;
    }
    if (out.gap > 1e-2) {
        out.reason = "integrality gap " + std::to_string(out.gap) + " exceeds 1e-2";
        return out;
    }
    std::vector<std::size_t> seq;
    for (int d = 0; d < model.max_depth; ++d) {
        const auto first = result.state.z.begin() + d * model.n_gates;
        seq.push_back(static_cast<std::size_t>(std::max_element(first, first + model.n_gates) - first));
    }
    const Verification v = verify_solution(seq, model);
    out.max_error = v.max_error;
    if (!v.ok) {
        out.reason = "rounded sequence misses the target by " + std::to_string(v.max_error);
        return out;
    }
    Solution s;
    s.sequence = canonical_sequence(seq, model);
    s.objective = static_cast<int>(std::count_if(seq.begin(), seq.end(),
                                                 [&](std::size_t k) { return k != model.identity_index; }));
    s.matched_phase = v.phase;
    s.max_error = v.max_error;
    s.status = SolveStatus::feasible;
    ComplexMatrix p = ComplexMatrix::identity(model.n_qubits);
    for (std::size_t k : s.sequence) p = p * model.gate_matrices[k];
    s.product = std::move(p);
    s.wall_time_s = result.wall_time_s;
    out.solution = std::move(s);
    return out;
}

void write_stats_csv(std::span<const LocalResult> runs, std::ostream& out) {
    out << "seed,status,objective,residual_inf,integrality_gap,iterations,wall_time_s\n";
    const auto old = out.precision(10);
    for (const auto& r : runs)
        out << r.seed << ',' << local_status_name(r.status) << ',' << r.objective << ',' << r.residual_inf << ','
            << r.integrality_gap << ',' << r.iterations << ',' << r.wall_time_s << '\n';
    out.precision(old);
}

}  // namespace qcd
