#include "qcd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

namespace qcd {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<GateDef> gates(std::initializer_list<const char*> names) {
    std::vector<GateDef> out;
    for (const char* n : names) out.push_back(parse_gate(n));
    return out;
}

GateDef gridded(const char* name, AngleGrid grid) {
    GateDef g = parse_gate(name);
    g.discretization = std::move(grid);
    return g;
}

BenchCase make(std::string name, std::string title, int n, int depth, std::string target, std::vector<GateDef> inputs,
               std::size_t listed, int expected, Tier tier) {
    BenchCase c;
    c.name = std::move(name);
    c.title = std::move(title);
    c.spec.n_qubits = n;
    c.spec.max_depth = depth;
    c.spec.target = std::move(target);
    c.spec.input_gates = std::move(inputs);
    c.listed_gates = listed;
    c.expected_optimal_depth = expected;
    c.tier = tier;
    return c;
}

std::string key(std::string_view s) {
    std::string out;
    for (char ch : s) {
        if (ch == '-' || ch == ' ') ch = '_';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CaseReport run_case(const BenchCase& bc, const SuiteOptions& opt) {
    CaseReport r;
    r.name = bc.name;
    r.title = bc.title;
    r.tier = bc.tier;
    r.n_qubits = bc.n_qubits();
    r.listed_gates = bc.listed_gates;
    r.max_depth = bc.max_depth();
    r.expected = bc.expected_optimal_depth;
    try {
        DecompositionSpec spec = bc.spec;
        if (opt.run_exact) {
            spec.variant = Variant::minlp;
            const CircuitModel model = build_model(spec);
            r.n_gates = model.n_gates;
            SearchBudget budget;
            budget.time_limit_s = opt.budget_s;
            const Solution s = solve_global(model, budget, opt.search);
            r.exact = ExactOutcome{s.status, s.objective, s.lower_bound, s.nodes_expanded, s.wall_time_s};
        }
        if (opt.run_nlp) {
            spec.variant = Variant::nlp;
            const CircuitModel model = build_model(spec);
            r.n_gates = model.n_gates;
            NlpOptions nopt = opt.nlp;
            nopt.time_limit_s = opt.budget_s;
            const auto t0 = std::chrono::steady_clock::now();
            const MultistartResult ms = multistart(model, opt.n_starts, opt.seed, nopt);
            NlpOutcome o;
            o.total_time_s = seconds(t0);
            o.n_starts = opt.n_starts;
            o.completed = static_cast<int>(ms.runs.size());
            o.timed_out = ms.skipped > 0;
            for (const auto& run : ms.runs) {
                if (run.status != LocalStatus::feasible) continue;
                ++o.feasible;
                o.max_feasible_gap = std::max(o.max_feasible_gap, run.integrality_gap);
                const RoundOutcome ro = round_and_verify(run, model);
                if (!ro.ok()) continue;
                ++o.rounded;
                if (ro.solution->objective == bc.expected_optimal_depth) ++o.rounded_at_expected;
            }
            if (ms.best) {
                o.best_objective = static_cast<int>(std::llround(ms.best->objective));
                o.best_time_s = ms.best->wall_time_s;
            }
            r.nlp = o;
        }
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    const bool exact_ok = !r.exact || r.exact->objective == r.expected;
    const bool nlp_ok = !r.nlp || r.nlp->best_objective == r.expected;
    r.match = r.error.empty() && (r.exact || r.nlp) && exact_ok && nlp_ok;
    return r;
}

void print_progress(std::ostream& out, const CaseReport& r) {
    out << r.name << ": K=" << r.n_gates << " D=" << r.max_depth << " expected " << r.expected;
    if (r.exact)
        out << " | exact " << status_name(r.exact->status) << " " << r.exact->objective << " in " << r.exact->wall_time_s
            << " s";
    if (r.nlp) {
        out << " | nlp " << r.nlp->feasible << "/" << r.nlp->completed << " feasible, best ";
        if (r.nlp->best_objective) out << *r.nlp->best_objective;
        else out << "none";
        if (r.nlp->timed_out) out << " (time limit)";
    }
    if (!r.error.empty()) out << " | error: " << r.error;
    out << (r.match ? " | match" : " | MISMATCH") << std::endl;
}

}  // namespace

std::string tier_name(Tier t) { return t == Tier::required ? "required" : "extended"; }

std::vector<BenchCase> builtin_suite() {
    const Tier req = Tier::required, ext = Tier::extended;
    std::vector<BenchCase> s;
    // Clifford+T.
    s.push_back(make("reverse_cnot", "Reverse-CNOT", 2, 5, "Reverse-CNOT", gates({"H_1xH_2", "H_1", "CNOT_1_2", "I"}), 4, 3, req));
    s.push_back(make("magic", "Magic", 2, 5, "Magic",
                     gates({"H_1", "H_2", "S_1xS_2", "S_1", "CNOT_1_2", "CNOT_2_1", "I"}), 7, 3, req));
    s.push_back(make("toffoli", "Toffoli", 3, 5, "Toffoli",
                     gates({"CV_1_2", "CV_1_3", "CV_2_3", "CVdg_1_2", "CVdg_1_3", "CVdg_2_3", "CNOT_1_2", "CNOT_2_3", "I"}),
                     9, 5, req));
    s.push_back(make("cnot_1_3", "CNOT_1_3", 3, 8, "CNOT_1_3",
                     gates({"H_1", "H_2", "H_3", "CNOT_2_1", "CNOT_3_2", "I"}), 6, 8, req));
    s.push_back(make("controlled_v", "Controlled-V", 2, 7, "Controlled-V",
                     gates({"H_1", "H_2", "T_1", "T_2", "Tdg_1", "Tdg_2", "T_1xT_2", "CNOT_1_2", "I"}), 9, 6, req));
    s.push_back(make("qft", "QFT", 2, 8, "QFT",
                     gates({"H_1", "H_2", "T_1", "T_2", "T_1xTdg_2", "H_1xT_2", "CNOT_1_2", "CNOT_2_1", "I"}), 9, 6, ext));
    s.push_back(make("iswap", "iSwap", 2, 10, "iSwap",
                     gates({"H_1", "H_2", "T_1xT_2", "Tdg_1xTdg_2", "Tdg_2", "Z_2", "CNOT_1_2", "CNOT_2_1", "I"}), 9, 6,
                     ext));
    s.push_back(make("grover", "Grover Diffusion", 2, 6, "Grover-Diffusion",
                     gates({"H_1", "H_2", "H_1xH_2", "S_1xS_2", "Sdg_1", "T_1xT_2", "Tdg_1", "Tdg_1xTdg_2", "Tdg_2",
                            "CNOT_1_2", "CNOT_2_1", "I"}),
                     12, 6, req));
    s.push_back(make("cnot_4_1", "CNOT_4_1", 4, 10, "CNOT_4_1",
                     gates({"H_1", "H_2", "H_4", "CNOT_2_1", "CNOT_2_4", "I"}), 6, 10, ext));
    s.push_back(make("fredkin", "Fredkin", 3, 7, "Fredkin",
                     gates({"CV_1_2", "CV_1_3", "CV_2_3", "CVdg_1_2", "CVdg_1_3", "CVdg_2_3", "CNOT_1_2", "CNOT_3_2",
                            "CNOT_2_3", "CNOT_1_3", "I"}),
                     11, 7, req));

    // Parametrized; U3 angles read as printed (cos theta on the diagonal).
    const AngleGrid had{{pi / 4}, {0}, {-pi / 2, pi / 2, pi}};
    s.push_back(make("hadamard", "Hadamard (param)", 2, 3, "Hadamard",
                     {gridded("U3_1", had), gridded("U3_2", had), parse_gate("CNOT_1_2"), parse_gate("CNOT_2_1")}, 9, 1,
                     req));
    const AngleGrid sg{{0, pi / 4, pi / 2}, {0}, {-pi / 2, -pi / 4, pi / 4, pi / 2, pi}};
    s.push_back(make("s", "S", 2, 3, "S", {gridded("U3_1", sg), gridded("U3_2", sg), parse_gate("CNOT_1_2")}, 32, 1, req));
    s.push_back(make("ch", "Controlled-H", 2, 5, "Controlled-H",
                     {gridded("U3_1", sg), gridded("U3_2", sg), parse_gate("CNOT_1_2")}, 32, 5, req));
    const AngleGrid cz{{-pi / 2, -pi / 4, pi / 4, pi / 2, 3 * pi / 4}, {0},
                       {-pi / 2, -pi / 4, 0, pi / 4, pi / 2, 3 * pi / 4, pi}};
    s.push_back(make("cz", "Controlled-Z", 2, 4, "Controlled-Z",
                     {gridded("U3_1", cz), gridded("U3_2", cz), parse_gate("CNOT_1_2")}, 72, 3, ext));
    const AngleGrid mg{{-pi / 4, 0, pi / 4, pi / 2, 3 * pi / 4}, {0},
                       {-3 * pi / 4, -pi / 2, -pi / 4, pi / 4, pi / 2, 3 * pi / 4, pi}};
    s.push_back(make("magic_param", "Magic (param)", 2, 4, "Magic",
                     {gridded("U3_1", mg), gridded("U3_2", mg), parse_gate("CNOT_1_2"), parse_gate("CNOT_2_1")}, 73, 2,
                     ext));
    s.push_back(make("w", "W", 2, 6, "W",
                     {parse_gate("RY_1"), gridded("RY_2", {{-pi / 2, -pi / 4, pi / 4, pi / 2, 3 * pi / 4, pi}, {}, {}}),
                      parse_gate("CNOT_1_2"), parse_gate("CNOT_2_1")},
                     14, 5, ext));
    s.push_back(make("margolus", "Margolus", 3, 7, "Margolus",
                     {gridded("RY_3", {{-pi / 2, -pi / 4, pi / 4, pi / 2, pi}, {}, {}}),
                      gridded("RZ_3", {{-pi / 2, -pi / 4, pi / 4, pi / 2}, {}, {}}), parse_gate("CNOT_1_3"),
                      parse_gate("CNOT_2_3")},
                     12, 7, ext));
    return s;
}

std::vector<BenchCase> suite_tier(Tier t) {
    std::vector<BenchCase> out;
    for (auto& c : builtin_suite())
        if (c.tier == t) out.push_back(std::move(c));
    return out;
}

BenchCase find_case(std::string_view name) {
    const std::string k = key(name);
    for (auto& c : builtin_suite())
        if (c.name == k || key(c.title) == k) return c;
    throw LookupError("no builtin case '" + std::string(name) + "'");
}

BenchReport run_suite(const std::vector<BenchCase>& cases, const SuiteOptions& options) {
    if (!(options.budget_s > 0.0)) throw std::invalid_argument("budget must be positive");
    if (options.run_nlp && options.n_starts < 1) throw std::invalid_argument("need at least one start");
    BenchReport rep;
    rep.parallel = options.parallel;
    rep.cases.resize(cases.size());
    if (options.parallel && cases.size() > 1) {
        const unsigned nw = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                            static_cast<unsigned>(cases.size())));
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cases.size(); i = next++) rep.cases[i] = run_case(cases[i], options);
            });
        for (auto& t : pool) t.join();
        if (options.progress)
            for (const auto& r : rep.cases) print_progress(*options.progress, r);
    } else {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            rep.cases[i] = run_case(cases[i], options);
            if (options.progress) print_progress(*options.progress, rep.cases[i]);
        }
    }

    double ex = 0, nl = 0, both_ex = 0, both_nl = 0;
    int nex = 0, nnl = 0, nboth = 0;
    for (const auto& r : rep.cases) {
        if (r.exact) ex += r.exact->wall_time_s, ++nex;
        if (r.nlp && r.nlp->best_objective) nl += r.nlp->best_time_s, ++nnl;
        if (r.exact && r.nlp && r.nlp->best_objective) both_ex += r.exact->wall_time_s, both_nl += r.nlp->best_time_s, ++nboth;
    }
    rep.mean_exact_time_s = nex ? ex / nex : 0.0;
    rep.mean_nlp_time_s = nnl ? nl / nnl : 0.0;
    rep.speedup = (nboth && both_nl > 0) ? both_ex / both_nl : 0.0;
    return rep;
}

void write_report_csv(const BenchReport& report, std::ostream& out) {
    out << "name,tier,n_qubits,n_gates,listed_gates,max_depth,expected,exact_status,exact_objective,exact_time_s,"
           "nlp_feasible,nlp_starts,nlp_best_objective,nlp_best_time_s,nlp_total_time_s,match,error\n";
    for (const auto& r : report.cases) {
        out << r.name << ',' << tier_name(r.tier) << ',' << r.n_qubits << ',' << r.n_gates << ',' << r.listed_gates << ','
            << r.max_depth << ',' << r.expected << ',';
        if (r.exact) out << status_name(r.exact->status) << ',' << r.exact->objective << ',' << r.exact->wall_time_s << ',';
        else out << ",,,";
        if (r.nlp) {
            out << r.nlp->feasible << ',' << r.nlp->completed << ',';
            if (r.nlp->best_objective) out << *r.nlp->best_objective;
            out << ',' << r.nlp->best_time_s << ',' << r.nlp->total_time_s << ',';
        } else {
            out << ",,,,,";
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << (r.match ? "true" : "false") << ',' << err << '\n';
    }
}

nlohmann::json report_to_json(const BenchReport& report) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& r : report.cases) {
        nlohmann::json c{{"name", r.name},         {"title", r.title},       {"tier", tier_name(r.tier)},
                         {"n_qubits", r.n_qubits}, {"n_gates", r.n_gates},   {"listed_gates", r.listed_gates},
                         {"max_depth", r.max_depth}, {"expected", r.expected}, {"match", r.match}};
        if (r.exact)
            c["exact"] = {{"status", status_name(r.exact->status)},
                          {"objective", r.exact->objective},
                          {"lower_bound", r.exact->lower_bound},
                          {"nodes_expanded", r.exact->nodes_expanded},
                          {"wall_time_s", r.exact->wall_time_s}};
        if (r.nlp) {
            const auto& n = *r.nlp;
            c["nlp"] = {{"n_starts", n.n_starts},
                        {"completed", n.completed},
                        {"feasible", n.feasible},
                        {"rounded", n.rounded},
                        {"rounded_at_expected", n.rounded_at_expected},
                        {"best_objective", n.best_objective ? nlohmann::json(*n.best_objective) : nlohmann::json()},
                        {"best_time_s", n.best_time_s},
                        {"total_time_s", n.total_time_s},
                        {"max_feasible_gap", n.max_feasible_gap},
                        {"timed_out", n.timed_out}};
        }
        if (!r.error.empty()) c["error"] = r.error;
        cases.push_back(c);
    }
    return {{"cases", cases},
            {"mean_exact_time_s", report.mean_exact_time_s},
            {"mean_nlp_time_s", report.mean_nlp_time_s},
            {"speedup", report.speedup},
            {"parallel", report.parallel}};
}

}  // namespace qcd
