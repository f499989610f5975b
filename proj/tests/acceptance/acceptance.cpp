// Acceptance run: one PASS/FAIL line per criterion, numbered 1..10.
// Usage: acceptance [criterion ...]   (default: all)
// Exit status is 1 when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "qcd/bench.hpp"
#include "qcd/exact.hpp"
#include "qcd/model.hpp"
#include "qcd/nlp.hpp"
#include "qcd/spec.hpp"

using namespace qcd;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
    std::vector<std::string> notes;
};

using Clock = std::chrono::steady_clock;

CircuitModel model_for(const BenchCase& c, Variant v = Variant::minlp, bool symmetry = true) {
    DecompositionSpec s = c.spec;
    s.variant = v;
    s.symmetry = symmetry;
    return build_model(s);
}

// Product of the chosen gates with the oracle's own multiply, compared to
// each allowed phase times the target.
bool oracle_verifies(const std::vector<std::size_t>& seq, const CircuitModel& m, double tol = 1e-6) {
    const std::size_t n = m.target_matrix.dim();
    oracle::Mat p = oracle::eye(n);
    for (std::size_t k : seq) p = oracle::mul(p, oracle::from(m.gate_matrices[k]));
    const oracle::Mat t = oracle::from(m.target_matrix);
    for (const auto& ph : m.phase_set) {
        double e = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::abs(p[i][j] - ph * t[i][j]));
        if (e <= tol) return true;
    }
    return false;
}

int count_non_identity(const std::vector<std::size_t>& seq, const CircuitModel& m) {
    return static_cast<int>(std::count_if(seq.begin(), seq.end(), [&](std::size_t k) { return k != m.identity_index; }));
}

// Shared between criteria 1 and 8.
std::map<std::string, Solution>& required_on() {
    static std::map<std::string, Solution> cache;
    return cache;
}

const Solution& solve_required(const BenchCase& c) {
    auto& cache = required_on();
    auto it = cache.find(c.name);
    if (it != cache.end()) return it->second;
    SearchBudget b;
    b.time_limit_s = 300;
    return cache[c.name] = solve_global(model_for(c), b);
}

// 1. Required tier optimal depths.
Verdict c1() {
    Verdict v;
    const std::map<std::string, int> table{{"reverse_cnot", 3}, {"magic", 3},   {"toffoli", 5}, {"cnot_1_3", 8},
                                           {"controlled_v", 6}, {"grover", 6},  {"fredkin", 7}, {"hadamard", 1},
                                           {"s", 1},            {"ch", 5}};
    std::ostringstream d;
    for (const auto& [name, depth] : table) {
        const BenchCase c = find_case(name);
        const CircuitModel m = model_for(c);
        const Solution& s = solve_required(c);
        const bool ok = s.status == SolveStatus::optimal && s.objective == depth && oracle_verifies(s.sequence, m) &&
                        count_non_identity(s.sequence, m) == depth;
        v.pass = v.pass && ok;
        d << name << "=" << s.objective << (ok ? "" : "(!)") << " ";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: %s depth %d in %.2f s", name.c_str(), status_name(s.status).c_str(),
                      s.objective, s.wall_time_s);
        v.notes.push_back(buf);
    }
    v.detail = d.str();
    return v;
}

// 2. Extended tier at 900 s per case.
Verdict c2() {
    Verdict v;
    const std::map<std::string, int> table{{"qft", 6}, {"iswap", 6}, {"cnot_4_1", 10},
                                           {"cz", 3},  {"w", 5},     {"margolus", 7}};
    std::ostringstream d;
    for (const auto& [name, depth] : table) {
        const BenchCase c = find_case(name);
        const CircuitModel m = model_for(c);
        SearchBudget b;
        b.time_limit_s = 900;
        const Solution s = solve_global(m, b);
        bool ok = false;
        if (s.status == SolveStatus::optimal)
            ok = s.objective == depth && oracle_verifies(s.sequence, m);
        else if (s.status == SolveStatus::budget_exhausted)
            ok = s.objective < 0 || s.objective >= depth;  // reported, not failed
        v.pass = v.pass && ok;
        d << name << "=" << s.objective << (s.status == SolveStatus::budget_exhausted ? "(budget)" : "")
          << (ok ? "" : "(!)") << " ";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: %s depth %d in %.2f s", name.c_str(), status_name(s.status).c_str(),
                      s.objective, s.wall_time_s);
        v.notes.push_back(buf);
    }
    v.detail = d.str();
    return v;
}

// 3. Search vs exhaustive enumeration.
Verdict c3() {
    Verdict v;
    int compared = 0;
    for (const auto& c : suite_tier(Tier::required)) {
        const CircuitModel m = model_for(c);
        if (std::pow(static_cast<double>(m.n_gates), m.max_depth) > 1e6) continue;
        const Solution s = solve_global(m);
        const auto bf = enumerate_bruteforce(m, m.max_depth);
        const int b = bf ? *bf : -1;
        ++compared;
        if (s.objective != b) {
            v.pass = false;
            v.notes.push_back(c.name + ": search " + std::to_string(s.objective) + " vs enumeration " +
                              std::to_string(b));
        }
    }
    const int required_compared = compared;

    const std::vector<std::string> pool{"H_1", "H_2", "S_1", "S_2", "T_1", "T_2", "X_1", "Z_2", "Tdg_1", "Sdg_2",
                                        "CNOT_1_2", "CNOT_2_1", "H_1xH_2", "CZ_1_2", "S_1xT_2"};
    std::mt19937_64 rng(20240601);
    int feasible = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k_real = 1 + rng() % 3;  // plus I: K <= 4
        std::vector<GateDef> defs;
        std::set<std::string> used;
        while (defs.size() < k_real) {
            const auto& g = pool[rng() % pool.size()];
            if (used.insert(g).second) defs.push_back(parse_gate(g));
        }
        defs.push_back(parse_gate("I"));
        const int depth = 1 + static_cast<int>(rng() % 5);
        ComplexMatrix t = ComplexMatrix::identity(2);
        if (trial % 5 == 4) {
            t = oracle::to(oracle::random_unitary(4, rng));  // almost surely unreachable
        } else {
            const int len = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < len; ++i) t = t * lift_gate(defs[rng() % k_real], 2);
        }
        const CircuitModel m = assemble(make_catalog(defs, 2, "toy", t), depth, Variant::minlp);
        const Solution s = solve_global(m);
        const auto bf = enumerate_bruteforce(m, depth);
        std::vector<oracle::Mat> mats;
        for (const auto& g : m.gate_matrices) mats.push_back(oracle::from(g));
        const int oc = oracle::brute_min_cost(mats, m.identity_index, oracle::from(m.target_matrix), m.phase_set, depth);
        const int b = bf ? *bf : -1;
        feasible += oc >= 0;
        if (s.objective != b || b != oc) {
            v.pass = false;
            v.notes.push_back("toy " + std::to_string(trial) + ": search " + std::to_string(s.objective) +
                              " enumeration " + std::to_string(b) + " oracle " + std::to_string(oc));
        }
    }
    v.detail = std::to_string(required_compared) + " required cases + 20 toys (" + std::to_string(feasible) +
               " feasible) agree";
    if (!v.pass) v.detail = "disagreement";
    return v;
}

// 4. NLP relaxation: integral, verified, optimal in most starts.
Verdict c4() {
    Verdict v;
    std::ostringstream d;
    for (const char* name : {"reverse_cnot", "magic", "toffoli", "controlled_v"}) {
        const BenchCase c = find_case(name);
        const CircuitModel m = model_for(c, Variant::nlp);
        const int optimum = c.expected_optimal_depth;
        const MultistartResult ms = multistart(m, 100, 0);
        int feasible = 0, rounded = 0, at_opt = 0, above = 0;
        bool bad = false;
        for (const auto& r : ms.runs) {
            if (r.status != LocalStatus::feasible) continue;
            ++feasible;
            const RoundOutcome ro = round_and_verify(r, m);
            if (ro.gap > 1e-2 || !ro.ok()) {
                bad = true;
                v.notes.push_back(std::string(name) + " seed " + std::to_string(r.seed) + ": " + ro.reason);
                continue;
            }
            ++rounded;
            const int obj = ro.solution->objective;
            if (!oracle_verifies(ro.solution->sequence, m)) {
                bad = true;
                v.notes.push_back(std::string(name) + " seed " + std::to_string(r.seed) + ": oracle rejects rounding");
            }
            if (obj == optimum) {
                ++at_opt;
            } else if (obj > optimum) {
                ++above;
            } else {
                bad = true;  // would contradict the exact optimum
                v.notes.push_back(std::string(name) + " seed " + std::to_string(r.seed) + ": below optimum");
            }
        }
        const bool a = feasible >= 1;
        // (c) with the "most cases" exception: strict majority optimal and
        // every other rounding verified at a larger depth.
        const bool cc = above == 0 || (2 * at_opt > rounded);
        const bool ok = a && !bad && cc;
        v.pass = v.pass && ok;
        d << name << " " << at_opt << "/" << rounded << "/" << feasible << (ok ? "" : "(!)") << " ";
        if (above > 0)
            v.notes.push_back(std::string("finding: ") + name + ": " + std::to_string(above) +
                              " verified integral starts at depth > " + std::to_string(optimum));
    }
    v.detail = "optimal/rounded/feasible per case: " + d.str();
    return v;
}

// 5. Gradient vs central differences of an independent evaluation.
Verdict c5() {
    Verdict v;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1), pos(0.05, 1);
    double worst = 0;
    for (const char* name : {"reverse_cnot", "controlled_v", "cnot_1_3"}) {
        const CircuitModel m = model_for(find_case(name), Variant::nlp);
        std::vector<std::vector<double>> in;
        for (const auto& g : m.gate_matrices) in.push_back(oracle::embed(oracle::from(g)));
        const std::size_t mm = m.target.dim() * m.target.dim();
        for (int t = 0; t < 20; ++t) {
            NlpState s;
            s.z.resize(m.max_depth * m.n_gates);
            for (auto& x : s.z) x = pos(rng);
            s.ghat.resize((m.max_depth - 1) * mm);
            for (auto& x : s.ghat) x = u(rng);
            s.multipliers.resize(m.max_depth * mm);
            for (auto& x : s.multipliers) x = u(rng);
            s.penalty = 10.0;
            s.phase = static_cast<std::size_t>(t) % m.phase_set.size();
            const auto target = oracle::embed(oracle::from(m.target_matrix.scaled(m.phase_set[s.phase])));
            const auto g = lagrangian_gradient(s, m);
            std::vector<double> x(s.z);
            x.insert(x.end(), s.ghat.begin(), s.ghat.end());
            const std::size_t nz = s.z.size();
            auto f = [&](const std::vector<double>& p) {
                const std::vector<double> z(p.begin(), p.begin() + nz), gh(p.begin() + nz, p.end());
                return oracle::al_value(in, target, m.identity_index, m.max_depth, z, gh, s.multipliers, s.penalty);
            };
            const double h = 1e-6;
            double num = 0, den = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double keep = x[i];
                x[i] = keep + h;
                const double fp = f(x);
                x[i] = keep - h;
                const double fm = f(x);
                x[i] = keep;
                const double fd = (fp - fm) / (2 * h);
                num += (g[i] - fd) * (g[i] - fd);
                den += g[i] * g[i];
            }
            worst = std::max(worst, std::sqrt(num) / std::max(1.0, std::sqrt(den)));
        }
    }
    v.pass = worst <= 1e-6;
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst relative error %.2e over 60 states", worst);
    v.detail = buf;
    return v;
}

// 6. McCormick rows pin w at binary z. The interval is rebuilt from the
// row coefficients, not taken from the library's helper.
Verdict c6() {
    Verdict v;
    const auto rows = mccormick_envelope(0, 1, 2, "t");
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double g = u(rng), z = static_cast<double>(rng() & 1);
        double lo = -1e300, hi = 1e300;
        for (const auto& r : rows) {
            double aw = 0, rest = 0;
            for (const auto& t : r.lin) {
                if (t.var == 2) aw += t.coef;
                else rest += t.coef * (t.var == 0 ? g : z);
            }
            if (aw == 0) continue;
            const double bound = (r.rhs - rest) / aw;
            // aw*w (sense) rhs - rest
            const bool upper = (r.sense == Sense::le) == (aw > 0);
            if (r.sense == Sense::eq) lo = std::max(lo, bound), hi = std::min(hi, bound);
            else if (upper) hi = std::min(hi, bound);
            else lo = std::max(lo, bound);
        }
        worst = std::max({worst, std::abs(lo - g * z), std::abs(hi - g * z)});
    }
    v.pass = rows.size() == 4 && worst <= 1e-12;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu rows, worst deviation %.1e", rows.size(), worst);
    v.detail = buf;
    return v;
}

// 7. embed(AB) = embed(A) embed(B).
Verdict c7() {
    Verdict v;
    std::mt19937_64 rng(7);
    double worst = 0, layout = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = std::size_t{2} << (i % 3);
        const oracle::Mat a = oracle::random_unitary(n, rng), b = oracle::random_unitary(n, rng);
        const RealEmbedding ea = embed_real(oracle::to(a)), eb = embed_real(oracle::to(b));
        const RealEmbedding eab = embed_real(oracle::to(oracle::mul(a, b)));
        const RealEmbedding prod = ea * eb;
        const auto ref = oracle::embed(a);
        for (std::size_t e = 0; e < eab.data().size(); ++e) {
            worst = std::max(worst, std::abs(eab.data()[e] - prod.data()[e]));
            layout = std::max(layout, std::abs(ea.data()[e] - ref[e]));
        }
    }
    v.pass = worst <= 1e-10 && layout == 0.0;
    char buf[80];
    std::snprintf(buf, sizeof buf, "max |embed(AB) - embed(A)embed(B)| = %.1e", worst);
    v.detail = buf;
    return v;
}

// 8. Symmetry pruning never changes the optimum.
Verdict c8() {
    Verdict v;
    std::ostringstream d;
    for (const auto& c : suite_tier(Tier::required)) {
        const Solution& on = solve_required(c);
        SearchBudget b;
        b.time_limit_s = 600;
        SearchOptions off;
        off.symmetry_pruning = false;
        const Solution s = solve_global(model_for(c, Variant::minlp, false), b, off);
        const bool ok = on.status == SolveStatus::optimal && s.status == SolveStatus::optimal &&
                        on.objective == s.objective;
        v.pass = v.pass && ok;
        if (!ok) d << c.name << " on=" << on.objective << " off=" << s.objective << " ";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: on %d (%.2f s), off %d (%.2f s)", c.name.c_str(), on.objective,
                      on.wall_time_s, s.objective, s.wall_time_s);
        v.notes.push_back(buf);
    }
    v.detail = v.pass ? "all required cases agree" : d.str();
    return v;
}

// 9. Reverse-CNOT variable counts: closed form vs names in the LP export.
Verdict c9() {
    Verdict v;
    const CircuitModel m = model_for(find_case("reverse_cnot"));
    const std::size_t N = 2, D = 5, K = 4;
    const std::size_t side = std::size_t{1} << (N + 1);
    const std::size_t z_formula = K * D, g_formula = (D - 1) * side * side;

    std::ostringstream lp;
    write_lp(build_registry(m), lp);
    const std::string text = lp.str();
    std::set<std::string> zs, gs;
    const std::regex zre(R"(\bz_\d+_\d+\b)"), gre(R"(\bG_\d+_\d+_\d+\b)");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), zre); it != std::sregex_iterator(); ++it)
        zs.insert(it->str());
    for (auto it = std::sregex_iterator(text.begin(), text.end(), gre); it != std::sregex_iterator(); ++it)
        gs.insert(it->str());

    v.pass = z_formula == 20 && g_formula == 256 && m.layout.z_count() == z_formula &&
             m.layout.ghat_count() == g_formula && zs.size() == z_formula && gs.size() == g_formula;
    v.detail = "layout " + std::to_string(m.layout.z_count()) + " z / " + std::to_string(m.layout.ghat_count()) +
               " G; LP text " + std::to_string(zs.size()) + " z / " + std::to_string(gs.size()) + " G";
    return v;
}

// 10. Same seed, same results, regardless of worker count.
Verdict c10() {
    Verdict v;
    const CircuitModel m = model_for(find_case("reverse_cnot"), Variant::nlp);
    NlpOptions a, b;
    a.workers = 1;
    b.workers = 3;
    const auto r1 = multistart(m, 30, 0, a), r2 = multistart(m, 30, 0, b);
    v.pass = r1.runs.size() == 30 && r2.runs.size() == 30;
    int feasible = 0;
    for (std::size_t i = 0; v.pass && i < r1.runs.size(); ++i) {
        v.pass = r1.runs[i].seed == r2.runs[i].seed && r1.runs[i].status == r2.runs[i].status &&
                 r1.runs[i].objective == r2.runs[i].objective;
        feasible += r1.runs[i].status == LocalStatus::feasible;
    }
    v.detail = "30 starts twice, identical (" + std::to_string(feasible) + " feasible)";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"required-tier optimal depths", c1},
        {"extended-tier optimal depths (900 s budget)", c2},
        {"search equals exhaustive enumeration", c3},
        {"NLP starts are integral, verified and optimal", c4},
        {"gradient matches central differences", c5},
        {"McCormick envelope exact at binary z", c6},
        {"embedding is a homomorphism", c7},
        {"symmetry pruning keeps the optimum", c8},
        {"Reverse-CNOT variable counts", c9},
        {"multistart determinism", c10},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    bool all_ok = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!pick.empty() && !pick.count(id)) continue;
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        for (const auto& n : v.notes) std::cout << "    " << n << '\n';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f s", secs);
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << v.detail << " ("
                  << buf << ")" << std::endl;
        all_ok = all_ok && v.pass;
    }
    return all_ok ? 0 : 1;
}
