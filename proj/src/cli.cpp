#include "qcd/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qcd/nlp.hpp"

namespace qcd::cli {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<Complex> parse_phase_list(const std::string& text) {
    std::vector<Complex> out;
    for (const auto& tok : split(text, ',')) {
        if (tok == "1" || tok == "+1") out.emplace_back(1, 0);
        else if (tok == "-1") out.emplace_back(-1, 0);
        else if (tok == "i" || tok == "+i") out.emplace_back(0, 1);
        else if (tok == "-i") out.emplace_back(0, -1);
        else throw UsageError("--phase-set: unknown phase '" + tok + "' (use 1, -1, i, -i)");
    }
    if (out.empty()) throw UsageError("--phase-set: empty");
    return out;
}

// "theta=-pi/2,0,pi/4;phi=0;lambda=pi"; angles not listed keep their defaults.
AngleGrid parse_grid(const std::string& text, AngleGrid grid) {
    for (const auto& part : split(text, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw UsageError("--discretization: expected name=values in '" + part + "'");
        const std::string name = part.substr(0, eq);
        std::vector<double> vals;
        try {
            for (const auto& v : split(part.substr(eq + 1), ',')) vals.push_back(parse_angle(v));
        } catch (const std::exception& e) {
            throw UsageError(std::string("--discretization: ") + e.what());
        }
        if (vals.empty()) throw UsageError("--discretization: no values for " + name);
        if (name == "theta") grid.theta = vals;
        else if (name == "phi") grid.phi = vals;
        else if (name == "lambda") grid.lambda = vals;
        else throw UsageError("--discretization: unknown angle '" + name + "'");
    }
    return grid;
}

SolverChoice parse_solver(const std::string& s) {
    if (s == "exact") return SolverChoice::exact;
    if (s == "nlp") return SolverChoice::nlp;
    if (s == "both") return SolverChoice::both;
    throw UsageError("unknown solver '" + s + "'");
}

std::string phase_text(Complex p) {
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
    if (near(p.real(), 1) && near(p.imag(), 0)) return "1";
    if (near(p.real(), -1) && near(p.imag(), 0)) return "-1";
    if (near(p.real(), 0) && near(p.imag(), 1)) return "i";
    if (near(p.real(), 0) && near(p.imag(), -1)) return "-i";
    std::ostringstream o;
    o << std::setprecision(6) << p.real() << (p.imag() < 0 ? "-" : "+") << std::abs(p.imag()) << "i";
    return o.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

struct Sources {
    std::vector<std::string> positional;
    std::string spec_path;
    std::string builtin;
};

// Loads the decomposition spec file or builtin case; also returns the optional "run" section of a file.
DecompositionSpec resolve_source(const Sources& src, std::string& label, nlohmann::json& run_section) {
    std::string path = src.spec_path, name = src.builtin;
    const auto& pos = src.positional;
    if (!pos.empty()) {
        if (pos[0] == "builtin") {
            if (pos.size() != 2) throw UsageError("usage: builtin <case name>");
            name = pos[1];
        } else if (pos.size() == 1) {
            const std::string& p = pos[0];
            if (p.rfind("builtin:", 0) == 0) name = p.substr(8);
            else if (fs::exists(p) || p.find('/') != std::string::npos || p.ends_with(".json")) path = p;
            else name = p;
        } else {
            throw UsageError("too many positional arguments");
        }
    }
    if (path.empty() == name.empty()) throw UsageError("give exactly one of a spec file or a builtin case name");
    if (!name.empty()) {
        label = "builtin:" + name;
        try {
            return find_case(name).spec;
        } catch (const LookupError& e) {
            std::string known;
            for (const auto& c : builtin_suite()) known += " " + c.name;
            throw UsageError(std::string(e.what()) + "; known:" + known);
        }
    }
    label = path;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        const std::string text = ss.str();
        DecompositionSpec spec = parse_spec_text(text);
        const auto j = nlohmann::json::parse(text);
        if (j.contains("run")) run_section = j["run"];
        return spec;
    } catch (const SpecError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void apply_run_section(const nlohmann::json& run, RunConfig& cfg, const CLI::App& sub) {
    if (!run.is_object()) throw UsageError("spec 'run' must be an object");
    auto given = [&](const char* opt) { return sub.get_option_no_throw(opt) && sub.count(opt) > 0; };
    try {
        if (run.contains("solver") && !given("--solver")) cfg.solver = parse_solver(run["solver"].get<std::string>());
        if (run.contains("n_starts") && !given("--starts")) cfg.n_starts = run["n_starts"].get<int>();
        if (run.contains("seed") && !given("--seed")) cfg.seed = run["seed"].get<std::uint64_t>();
        if (run.contains("budget_s") && !given("--budget-s")) cfg.budget_s = run["budget_s"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("spec 'run': ") + e.what());
    }
}

// Cell text for one gate on each qubit row; "|" marks a wire crossed by a two-qubit gate.
std::vector<std::string> gate_cells(const std::string& name, int n) {
    std::vector<std::string> cells(n);
    GateDef g;
    try {
        g = parse_gate(name);
    } catch (const std::exception&) {
        std::fill(cells.begin(), cells.end(), name);
        return cells;
    }
    if (g.is_identity()) return cells;
    auto one = [](const GateDef& f) {
        std::string s = f.base;
        if (f.angles) {
            s += "(" + format_angle(f.angles->theta);
            if (f.base == "U3") s += "," + format_angle(f.angles->phi) + "," + format_angle(f.angles->lambda);
            s += ")";
        }
        return s;
    };
    if (g.kind == GateKind::local_product) {
        for (const auto& f : g.factors) cells[f.placement[0] - 1] = one(f);
    } else if (g.kind == GateKind::two_qubit) {
        const int a = g.placement[0] - 1, b = g.placement[1] - 1;
        for (int q = std::min(a, b) + 1; q < std::max(a, b); ++q) cells[q] = "|";
        if (g.base == "SWAP") {
            cells[a] = cells[b] = "x";
        } else {
            cells[a] = "*";
            std::string t = g.base.substr(1);
            if (t == "NOT") t = "X";
            cells[b] = t;
        }
    } else {
        cells[g.placement[0] - 1] = one(g);
    }
    return cells;
}

void print_solution(std::ostream& os, const char* label, const Solution& s, const CircuitModel& m) {
    std::ostringstream out;
    out << label << ": " << status_name(s.status);
    if (s.objective >= 0) {
        out << ", depth " << s.objective << ", phase " << phase_text(s.matched_phase) << ", max error " << std::scientific
            << std::setprecision(2) << s.max_error << std::defaultfloat;
    }
    out << ", " << std::fixed << std::setprecision(3) << s.wall_time_s << " s" << std::defaultfloat;
    if (s.nodes_expanded) out << ", " << s.nodes_expanded << " nodes";
    if (s.status == SolveStatus::budget_exhausted) out << " (lower bound " << s.lower_bound << ")";
    out << '\n';
    os << out.str();
    if (s.objective >= 0) os << render_circuit(s.sequence, m);
}

}  // namespace

std::string command_name(Command c) {
    switch (c) {
        case Command::decompose: return "decompose";
        case Command::export_model: return "export";
        case Command::bench: return "bench";
    }
    return "?";
}

std::string solver_name(SolverChoice s) {
    switch (s) {
        case SolverChoice::exact: return "exact";
        case SolverChoice::nlp: return "nlp";
        case SolverChoice::both: return "both";
    }
    return "?";
}

int exit_code(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal:
        case SolveStatus::feasible: return kExitOk;
        case SolveStatus::infeasible: return kExitInfeasible;
        case SolveStatus::budget_exhausted: return kExitBudget;
    }
    return kExitUsage;
}

std::string render_circuit(std::span<const std::size_t> sequence, const CircuitModel& model) {
    const int n = model.n_qubits;
    std::vector<std::vector<std::string>> cols;
    for (std::size_t k : sequence) cols.push_back(gate_cells(model.gate_names.at(k), n));
    std::vector<std::string> rows(n + 1);
    rows[0] = "     ";
    for (int q = 0; q < n; ++q) {
        std::string p = "q" + std::to_string(q + 1) + ":";
        rows[q + 1] = p + std::string(5 - std::min<std::size_t>(p.size(), 4), ' ');
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
        std::size_t w = 3;
        for (const auto& cell : cols[c]) w = std::max(w, cell.size() + 2);
        const std::string num = std::to_string(c + 1);
        rows[0] += num + std::string(w - num.size(), ' ');
        for (int q = 0; q < n; ++q) {
            const std::string& cell = cols[c][q];
            const std::size_t left = (w - cell.size()) / 2;
            rows[q + 1] += std::string(left, '-') + cell + std::string(w - cell.size() - left, '-');
        }
    }
    std::string out;
    for (const auto& r : rows) out += r + '\n';
    return out;
}

RunConfig parse_args(int argc, const char* const* argv, std::string* help) {
    CLI::App app{"Minimum-depth quantum circuit decomposition", "qcdecomp"};
    app.require_subcommand(1);
    RunConfig cfg;
    Sources src;
    std::string solver = "exact", variant, phases, grid, tier = "required";
    int max_depth = 0;
    // Flags are read back through count(): CLI11 resets a flag variable
    // shared by several subcommands when an unused one finalizes.

    auto add_source = [&](CLI::App* s) {
        s->add_option("source", src.positional, "Spec file, builtin case name, or 'builtin <name>'");
        s->add_option("--spec", src.spec_path, "Decomposition spec JSON");
        s->add_option("--builtin", src.builtin, "Builtin benchmark case");
        s->add_option("--variant", variant, "minlp, milp, nlp or lp");
        s->add_option("--phase-set", phases, "Allowed global phases, e.g. 1,-1,i,-i");
        s->add_flag("--no-symmetry", "Drop symmetry-breaking constraints and pruning");
        s->add_option("--discretization", grid, "Default angle grid, e.g. 'theta=0,pi/4;lambda=pi'");
        s->add_option("--max-depth", max_depth, "Override the maximum depth");
        s->add_flag("--dump-spec", "Print the resolved spec as JSON and exit");
    };
    auto add_solver = [&](CLI::App* s) {
        s->add_option("--solver", solver, "exact, nlp or both")->check(CLI::IsMember({"exact", "nlp", "both"}));
        s->add_option("--starts", cfg.n_starts, "NLP multi-starts");
        s->add_option("--seed", cfg.seed, "Base seed for NLP starts");
        s->add_option("--budget-s", cfg.budget_s, "Time budget per solver run, seconds");
        s->add_flag("-v,--verbose", "More output (repeatable)");
        s->add_flag("-q,--quiet", "Only errors");
    };

    CLI::App* dec = app.add_subcommand("decompose", "Find a minimum-depth sequence for a target");
    add_source(dec);
    add_solver(dec);
    dec->add_option("-o,--out", cfg.solution_json, "Write the solution JSON here");
    dec->add_option("--stats-csv", cfg.stats_csv, "Write per-start NLP statistics here");

    CLI::App* exp = app.add_subcommand("export", "Write the model in LP format");
    add_source(exp);
    exp->add_option("-o,--out", cfg.model_path, "Output .lp file");
    exp->add_option("--phase-index", cfg.phase_index, "Which phase of the phase set to bake into the target rows");

    CLI::App* ben = app.add_subcommand("bench", "Run the builtin benchmark suite");
    add_solver(ben);
    ben->add_option("--tier", tier, "required, extended or all")->check(CLI::IsMember({"required", "extended", "all"}));
    ben->add_option("--case", cfg.cases, "Run only these cases (repeatable)");
    ben->add_option("--csv", cfg.report_csv, "Write the report CSV here");
    ben->add_option("--json", cfg.report_json, "Write the report JSON here");
    ben->add_flag("--parallel", cfg.parallel, "Run cases concurrently (times not comparable)");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream o, eo;
        app.exit(e, o, eo);
        if (help) *help = o.str();
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    if (help) help->clear();

    CLI::App* sub = dec->parsed() ? dec : (exp->parsed() ? exp : ben);
    cfg.command = sub == dec ? Command::decompose : (sub == exp ? Command::export_model : Command::bench);
    cfg.solver = parse_solver(solver);
    const bool has_solver_opts = sub != exp;
    const int verbose = has_solver_opts ? static_cast<int>(sub->count("--verbose")) : 0;
    const bool quiet = has_solver_opts && sub->count("--quiet") > 0;
    const bool no_symmetry = sub != ben && sub->count("--no-symmetry") > 0;
    cfg.dump_spec = sub != ben && sub->count("--dump-spec") > 0;
    cfg.verbosity = quiet ? 0 : 1 + verbose;
    cfg.tier = tier;

    if (cfg.command != Command::bench) {
        nlohmann::json run_section;
        cfg.spec = resolve_source(src, cfg.source, run_section);
        if (!run_section.is_null()) apply_run_section(run_section, cfg, *sub);
        try {
            if (!variant.empty()) cfg.spec.variant = parse_variant(variant);
        } catch (const std::exception& e) {
            throw UsageError(std::string("--variant: ") + e.what());
        }
        if (!phases.empty()) cfg.spec.phase_set = parse_phase_list(phases);
        if (no_symmetry) cfg.spec.symmetry = false;
        if (!grid.empty()) cfg.spec.discretization = parse_grid(grid, cfg.spec.discretization);
        if (max_depth > 0) cfg.spec.max_depth = max_depth;
        if (cfg.command == Command::export_model && cfg.model_path.empty() && !cfg.dump_spec)
            throw UsageError("export needs -o/--out");
    }
    return cfg;
}

void validate(const RunConfig& c) {
    if (c.solver != SolverChoice::exact && c.n_starts < 1) throw UsageError("--starts must be at least 1");
    if (!(c.budget_s > 0.0)) throw UsageError("--budget-s must be positive");
    if (c.command != Command::bench) {
        if (c.spec.max_depth < 1) throw UsageError("max depth must be at least 1");
        if (c.phase_index >= c.spec.phase_set.size()) throw UsageError("--phase-index out of range");
    }
}

nlohmann::json dump_config(const RunConfig& c) {
    nlohmann::json j = spec_to_json(c.spec);
    j["run"] = {{"command", command_name(c.command)},
                {"solver", solver_name(c.solver)},
                {"n_starts", c.n_starts},
                {"seed", c.seed},
                {"budget_s", c.budget_s}};
    return j;
}

bool same_config(const RunConfig& a, const RunConfig& b) {
    return a.command == b.command && same_spec(a.spec, b.spec) && a.solver == b.solver && a.n_starts == b.n_starts &&
           a.seed == b.seed && a.budget_s == b.budget_s;
}

namespace {

int run_decompose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const bool want_exact = cfg.solver != SolverChoice::nlp;
    const bool want_nlp = cfg.solver != SolverChoice::exact;
    DecompositionSpec spec = cfg.spec;

    std::optional<Solution> exact;
    std::optional<CircuitModel> exact_model;
    if (want_exact) {
        if (!is_integer(spec.variant)) spec.variant = Variant::minlp;
        exact_model = build_model(spec);
        if (cfg.verbosity > 0)
            out << "target " << exact_model->target_name << ": N=" << exact_model->n_qubits << " K=" << exact_model->n_gates
                << " D=" << exact_model->max_depth << '\n';
        SearchBudget budget;
        budget.time_limit_s = cfg.budget_s;
        SearchOptions so;
        so.symmetry_pruning = spec.symmetry;
        exact = solve_global(*exact_model, budget, so);
        if (cfg.verbosity > 0) print_solution(out, "exact", *exact, *exact_model);
    }

    std::optional<Solution> nlp_solution;
    std::optional<CircuitModel> nlp_model;
    if (want_nlp) {
        spec.variant = Variant::nlp;
        nlp_model = build_model(spec);
        if (cfg.verbosity > 0 && !want_exact)
            out << "target " << nlp_model->target_name << ": N=" << nlp_model->n_qubits << " K=" << nlp_model->n_gates
                << " D=" << nlp_model->max_depth << '\n';
        NlpOptions no;
        no.time_limit_s = cfg.budget_s;
        if (cfg.verbosity > 1) no.trace = &err;
        const MultistartResult ms = multistart(*nlp_model, cfg.n_starts, cfg.seed, no);
        const int feasible = static_cast<int>(
            std::count_if(ms.runs.begin(), ms.runs.end(), [](const LocalResult& r) { return r.status == LocalStatus::feasible; }));
        if (cfg.verbosity > 0) {
            out << "nlp: " << feasible << " of " << ms.runs.size() << " starts feasible";
            if (ms.skipped) out << " (" << ms.skipped << " skipped at the time limit)";
            out << '\n';
        }
        if (ms.best) {
            const RoundOutcome ro = round_and_verify(*ms.best, *nlp_model);
            if (ro.ok()) {
                nlp_solution = ro.solution;
                if (cfg.verbosity > 0) {
                    std::ostringstream line;
                    line << "  best start seed " << ms.best->seed << ", integrality gap " << std::scientific
                         << std::setprecision(2) << ro.gap << '\n';
                    out << line.str();
                    print_solution(out, "nlp", *nlp_solution, *nlp_model);
                }
            } else if (cfg.verbosity > 0) {
                out << "nlp: best start rejected: " << ro.reason << '\n';
            }
        }
        if (!cfg.stats_csv.empty()) {
            std::ofstream f(cfg.stats_csv);
            if (!f) throw std::runtime_error("cannot write " + cfg.stats_csv);
            write_stats_csv(ms.runs, f);
        }
    }

    if (want_exact && want_nlp && cfg.verbosity > 0) {
        const bool match = exact->objective >= 0 && nlp_solution && nlp_solution->objective == exact->objective;
        out << (match ? "== MATCH: both solvers found depth " + std::to_string(exact->objective) + " =="
                      : "== MISMATCH: exact " + std::to_string(exact->objective) + ", nlp " +
                            (nlp_solution ? std::to_string(nlp_solution->objective) : std::string("none")) + " ==")
            << '\n';
    }

    if (!cfg.solution_json.empty()) {
        nlohmann::json j;
        if (want_exact && want_nlp) {
            j["exact"] = solution_to_json(*exact, *exact_model);
            j["nlp"] = nlp_solution ? solution_to_json(*nlp_solution, *nlp_model) : nlohmann::json();
        } else if (want_exact) {
            j = solution_to_json(*exact, *exact_model);
        } else if (nlp_solution) {
            j = solution_to_json(*nlp_solution, *nlp_model);
        } else {
            Solution none;
            none.status = SolveStatus::budget_exhausted;
            j = solution_to_json(none, *nlp_model);
        }
        write_text(cfg.solution_json, j.dump(2) + "\n");
    }

    if (want_exact) return exit_code(exact->status);
    // No verified point after all starts proves nothing about feasibility.
    return nlp_solution ? kExitOk : kExitBudget;
}

int run_export(const RunConfig& cfg, std::ostream& out) {
    const CircuitModel model = build_model(cfg.spec);
    export_model(model, cfg.model_path, cfg.phase_index);
    if (cfg.verbosity > 0) {
        std::ifstream in(cfg.model_path);
        const LpSummary s = scan_lp(in);
        out << "wrote " << cfg.model_path << ": " << variant_name(model.variant) << ", " << s.variables << " variables ("
            << s.binaries << " binary), " << s.rows << " rows, " << s.quadratic_rows << " quadratic\n";
    }
    return kExitOk;
}

int run_bench(const RunConfig& cfg, std::ostream& out) {
    std::vector<BenchCase> cases;
    if (!cfg.cases.empty()) {
        for (const auto& n : cfg.cases) {
            try {
                cases.push_back(find_case(n));
            } catch (const LookupError& e) {
                throw UsageError(e.what());
            }
        }
    } else if (cfg.tier == "all") {
        cases = builtin_suite();
    } else {
        cases = suite_tier(cfg.tier == "required" ? Tier::required : Tier::extended);
    }
    SuiteOptions so;
    so.run_exact = cfg.solver != SolverChoice::nlp;
    so.run_nlp = cfg.solver != SolverChoice::exact;
    so.budget_s = cfg.budget_s;
    so.seed = cfg.seed;
    so.n_starts = cfg.n_starts;
    so.parallel = cfg.parallel;
    if (cfg.verbosity > 0) so.progress = &out;
    const BenchReport rep = run_suite(cases, so);
    if (!cfg.report_csv.empty()) {
        std::ofstream f(cfg.report_csv);
        if (!f) throw std::runtime_error("cannot write " + cfg.report_csv);
        write_report_csv(rep, f);
    }
    if (!cfg.report_json.empty()) write_text(cfg.report_json, report_to_json(rep).dump(2) + "\n");
    if (cfg.verbosity > 0) {
        const auto matched = std::count_if(rep.cases.begin(), rep.cases.end(), [](const CaseReport& c) { return c.match; });
        out << matched << "/" << rep.cases.size() << " cases matched";
        if (so.run_exact) out << "; mean exact " << rep.mean_exact_time_s << " s";
        if (so.run_nlp) out << "; mean nlp best-start " << rep.mean_nlp_time_s << " s";
        if (so.run_exact && so.run_nlp) out << "; speed-up " << rep.speedup;
        if (rep.parallel) out << " (parallel run, times not comparable)";
        out << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.dump_spec && cfg.command != Command::bench) {
        out << dump_config(cfg).dump(2) << '\n';
        return kExitOk;
    }
    switch (cfg.command) {
        case Command::decompose: return run_decompose(cfg, out, err);
        case Command::export_model: return run_export(cfg, out);
        case Command::bench: return run_bench(cfg, out);
    }
    return kExitUsage;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        std::string help;
        RunConfig cfg = parse_args(argc, argv, &help);
        if (!help.empty()) {
            out << help;
            return kExitOk;
        }
        validate(cfg);
        return run(cfg, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        // Bad gate names, targets, unwritable outputs and the like.
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace qcd::cli
