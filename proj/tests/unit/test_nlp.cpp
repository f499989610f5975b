#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qcd/nlp.hpp"

using namespace qcd;

namespace {

CircuitModel model_of(std::vector<std::string> gates, int n, const std::string& target, int depth,
                      Variant v = Variant::nlp) {
    std::vector<GateDef> defs;
    for (const auto& g : gates) defs.push_back(parse_gate(g));
    return assemble(make_catalog(defs, n, target, target_lookup(target, n)), depth, v);
}

CircuitModel reverse_cnot(Variant v = Variant::nlp) {
    return model_of({"H_1xH_2", "H_1", "CNOT_1_2", "I"}, 2, "Reverse-CNOT", 5, v);
}

NlpState random_state(const CircuitModel& m, std::mt19937_64& rng, std::size_t phase = 0) {
    std::uniform_real_distribution<double> u(-1, 1), pos(0.05, 1);
    const std::size_t mm = m.target.dim() * m.target.dim();
    NlpState s;
    s.z.resize(m.max_depth * m.n_gates);
    for (auto& x : s.z) x = pos(rng);
    for (int d = 0; d < m.max_depth; ++d) {
        double sum = 0;
        for (std::size_t k = 0; k < m.n_gates; ++k) sum += s.z[d * m.n_gates + k];
        for (std::size_t k = 0; k < m.n_gates; ++k) s.z[d * m.n_gates + k] /= sum;
    }
    s.ghat.resize((m.max_depth - 1) * mm);
    for (auto& x : s.ghat) x = u(rng);
    s.multipliers.resize(m.max_depth * mm);
    for (auto& x : s.multipliers) x = u(rng);
    s.penalty = 10.0;
    s.phase = phase;
    return s;
}

double oracle_al(const NlpState& s, const CircuitModel& m) {
    std::vector<std::vector<double>> in;
    for (const auto& g : m.gate_matrices) in.push_back(oracle::embed(oracle::from(g)));
    const auto t = oracle::embed(oracle::from(m.target_matrix.scaled(m.phase_set[s.phase])));
    return oracle::al_value(in, t, m.identity_index, m.max_depth, s.z, s.ghat, s.multipliers, s.penalty);
}

}  // namespace

TEST_CASE("simplex projection matches bisection") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 2);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + t % 9);
        for (auto& x : v) x = g(rng);
        auto p = v;
        project_simplex(p);
        const auto ref = oracle::simplex_bisect(v);
        double sum = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] == doctest::Approx(ref[i]).epsilon(1e-9));
            CHECK(p[i] >= 0.0);
            sum += p[i];
        }
        CHECK(sum == doctest::Approx(1.0));
        auto again = p;
        project_simplex(again);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(again[i] == doctest::Approx(p[i]).epsilon(1e-12));
    }
}

TEST_CASE("residuals are zero at an exact circuit") {
    const CircuitModel m = reverse_cnot();
    const std::size_t id = m.identity_index;
    const std::vector<std::size_t> seq{0, 2, 0, id, id};
    const StartSample s = start_from_sequence(m, seq, 0);
    NlpState st = initial_state(s, m);
    double worst = 0;
    for (double r : residuals(st, m)) worst = std::max(worst, std::abs(r));
    CHECK(worst < 1e-12);
    CHECK(relaxed_objective(st.z, m) == doctest::Approx(3.0));
    CHECK(integrality_gap(st.z) == 0.0);
    // Phase 1 (-1) does not match.
    st.phase = 1;
    worst = 0;
    for (double r : residuals(st, m)) worst = std::max(worst, std::abs(r));
    CHECK(worst > 0.5);
}

TEST_CASE("augmented Lagrangian value matches the oracle and its gradient matches finite differences") {
    std::mt19937_64 rng(11);
    const std::vector<CircuitModel> models{
        reverse_cnot(),
        model_of({"H_1", "H_2", "S_1xS_2", "S_1", "CNOT_1_2", "CNOT_2_1", "I"}, 2, "Magic", 4),
        model_of({"H_1", "T_1", "CNOT_1_2", "I"}, 2, "CZ", 3, Variant::lp)};
    for (const auto& m : models)
        for (int t = 0; t < 5; ++t) {
            const NlpState s = random_state(m, rng, t % m.phase_set.size());
            CHECK(augmented_lagrangian(s, m) == doctest::Approx(oracle_al(s, m)).epsilon(1e-12));
            const auto g = lagrangian_gradient(s, m);
            REQUIRE(g.size() == s.z.size() + s.ghat.size());
            double num = 0, den = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                NlpState a = s, b = s;
                const double h = 1e-5;
                double& xa = i < s.z.size() ? a.z[i] : a.ghat[i - s.z.size()];
                double& xb = i < s.z.size() ? b.z[i] : b.ghat[i - s.z.size()];
                xa += h;
                xb -= h;
                const double fd = (oracle_al(a, m) - oracle_al(b, m)) / (2 * h);
                num += (g[i] - fd) * (g[i] - fd);
                den += g[i] * g[i];
            }
            CHECK(std::sqrt(num) / std::max(1.0, std::sqrt(den)) <= 1e-6);
        }
}

TEST_CASE("integrality gap") {
    CHECK(integrality_gap(std::vector<double>{0, 1, 0, 0}) == 0.0);
    CHECK(integrality_gap(std::vector<double>{0.5, 0.5}) == 0.5);
    CHECK(integrality_gap(std::vector<double>{0.9, 0.1}) == doctest::Approx(0.1));
    CHECK(integrality_gap(std::vector<double>{}) == 0.0);
}

TEST_CASE("rounding rejects fractional or infeasible results") {
    const CircuitModel m = reverse_cnot();
    LocalResult r;
    r.status = LocalStatus::feasible;
    r.state = initial_state(random_start(m, 1), m);
    for (double& x : r.state.z) x = 1.0 / static_cast<double>(m.n_gates);
    const RoundOutcome frac = round_and_verify(r, m);
    CHECK_FALSE(frac.ok());
    CHECK(frac.gap == doctest::Approx(0.25));

    const std::size_t id = m.identity_index;
    const std::vector<std::size_t> seq{0, 2, 0, id, id};
    r.state = initial_state(start_from_sequence(m, seq, 0), m);
    const RoundOutcome good = round_and_verify(r, m);
    REQUIRE(good.ok());
    CHECK(good.solution->objective == 3);
    CHECK(good.solution->status == SolveStatus::feasible);

    r.status = LocalStatus::stalled;
    CHECK_FALSE(round_and_verify(r, m).ok());

    // Integral but wrong circuit.
    r.status = LocalStatus::feasible;
    r.state = initial_state(start_from_sequence(m, std::vector<std::size_t>{0, 2, id, id, id}, 0), m);
    CHECK_FALSE(round_and_verify(r, m).ok());
}

TEST_CASE("local solve from an exact circuit stays feasible") {
    const CircuitModel m = reverse_cnot();
    const std::size_t id = m.identity_index;
    const LocalResult r = solve_local(start_from_sequence(m, std::vector<std::size_t>{0, 2, 0, id, id}, 0), m);
    CHECK(r.status == LocalStatus::feasible);
    CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(round_and_verify(r, m).ok());
}

TEST_CASE("reported feasibility is real") {
    const CircuitModel m = reverse_cnot();
    NlpOptions o;
    o.workers = 1;
    const MultistartResult ms = multistart(m, 12, 0, o);
    CHECK(ms.runs.size() == 12);
    CHECK(ms.skipped == 0);
    for (const auto& r : ms.runs) {
        CAPTURE(r.seed);
        double worst = 0;
        for (double x : residuals(r.state, m)) worst = std::max(worst, std::abs(x));
        CHECK(worst == doctest::Approx(r.residual_inf).epsilon(1e-9));
        if (r.status == LocalStatus::feasible) CHECK(worst <= 1.1 * o.feas_tol);
        for (int d = 0; d < m.max_depth; ++d) {
            double sum = 0;
            for (std::size_t k = 0; k < m.n_gates; ++k) {
                CHECK(r.state.z[d * m.n_gates + k] >= 0.0);
                sum += r.state.z[d * m.n_gates + k];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        for (double g : r.state.ghat) CHECK(std::abs(g) <= 1.0);
    }
    if (ms.best) CHECK(ms.best->status == LocalStatus::feasible);
}

TEST_CASE("multistart is deterministic for a seed") {
    const CircuitModel m = reverse_cnot();
    NlpOptions one;
    one.workers = 1;
    NlpOptions two;
    two.workers = 2;
    const auto a = multistart(m, 6, 5, one), b = multistart(m, 6, 5, two);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].seed == 5 + i);
        CHECK(a.runs[i].seed == b.runs[i].seed);
        CHECK(a.runs[i].status == b.runs[i].status);
        CHECK(a.runs[i].objective == b.runs[i].objective);
        CHECK(a.runs[i].state.z == b.runs[i].state.z);
    }
    const StartSample s1 = random_start(m, 9), s2 = random_start(m, 9), s3 = random_start(m, 10);
    CHECK(s1.z0 == s2.z0);
    CHECK(s1.ghat0 == s2.ghat0);
    CHECK(s1.z0 != s3.z0);
}

TEST_CASE("phase policy and time limit") {
    const CircuitModel m = reverse_cnot();
    NlpOptions cyc;
    cyc.phase_policy = PhasePolicy::cycle;
    cyc.workers = 1;
    const LocalResult r = solve_start(m, 3, 2, cyc);
    CHECK(r.state.phase == 2);
    CHECK(r.seed == 3);

    NlpOptions lim;
    lim.workers = 1;
    lim.time_limit_s = 1e-9;
    const auto ms = multistart(m, 5, 0, lim);
    CHECK(ms.skipped + static_cast<int>(ms.runs.size()) == 5);
    CHECK(ms.skipped >= 1);
}

TEST_CASE("trace and stats CSV") {
    const CircuitModel m = reverse_cnot();
    std::ostringstream trace;
    NlpOptions o;
    o.trace = &trace;
    o.max_outer = 2;
    o.workers = 1;
    const LocalResult r = solve_local(random_start(m, 0), m, o);
    CHECK_FALSE(trace.str().empty());
    std::ostringstream csv;
    std::vector<LocalResult> runs{r};
    write_stats_csv(runs, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("seed,status,objective,residual_inf,integrality_gap,iterations,wall_time_s\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("malformed states are rejected") {
    const CircuitModel m = reverse_cnot();
    NlpState s = initial_state(random_start(m, 0), m);
    s.z.pop_back();
    CHECK_THROWS_AS(residuals(s, m), std::invalid_argument);
}
