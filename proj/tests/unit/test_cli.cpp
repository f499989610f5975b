#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qcd/cli.hpp"

using namespace qcd;
using namespace qcd::cli;
namespace fs = std::filesystem;

namespace {

RunConfig parse(std::vector<const char*> args) {
    args.insert(args.begin(), "qcdecomp");
    return parse_args(static_cast<int>(args.size()), args.data());
}

struct Ran {
    int code;
    std::string out, err;
};

Ran call(std::vector<const char*> args) {
    args.insert(args.begin(), "qcdecomp");
    std::ostringstream o, e;
    const int code = main_entry(static_cast<int>(args.size()), args.data(), o, e);
    return {code, o.str(), e.str()};
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("qcd_cli_test_" + name); }

}  // namespace

TEST_CASE("argument parsing") {
    const RunConfig a = parse({"decompose", "builtin:reverse_cnot", "--solver", "both", "--starts", "7", "--seed",
                               "4", "--budget-s", "12.5", "-v"});
    CHECK(a.command == Command::decompose);
    CHECK(a.solver == SolverChoice::both);
    CHECK(a.n_starts == 7);
    CHECK(a.seed == 4);
    CHECK(a.budget_s == 12.5);
    CHECK(a.verbosity == 2);
    CHECK(a.spec.n_qubits == 2);
    CHECK(a.spec.max_depth == 5);

    const RunConfig b = parse({"decompose", "--builtin", "toffoli", "--variant", "milp", "--no-symmetry",
                               "--max-depth", "6", "--phase-set", "1,-1", "-q"});
    CHECK(b.spec.variant == Variant::milp);
    CHECK_FALSE(b.spec.symmetry);
    CHECK(b.spec.max_depth == 6);
    CHECK(b.spec.phase_set.size() == 2);
    CHECK(b.verbosity == 0);

    const RunConfig c = parse({"bench", "--tier", "all", "--case", "magic", "--case", "qft", "--parallel"});
    CHECK(c.command == Command::bench);
    CHECK(c.cases == std::vector<std::string>{"magic", "qft"});
    CHECK(c.parallel);

    const RunConfig d = parse({"export", "builtin:magic", "-o", "m.lp", "--phase-index", "2"});
    CHECK(d.command == Command::export_model);
    CHECK(d.model_path == "m.lp");
    CHECK(d.phase_index == 2);

    std::string help;
    const char* h[] = {"qcdecomp", "--help"};
    parse_args(2, h, &help);
    CHECK(help.find("decompose") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(call({}).code == kExitUsage);
    CHECK(call({"decompose"}).code == kExitUsage);
    CHECK(call({"decompose", "builtin:no_such_case"}).code == kExitUsage);
    CHECK(call({"decompose", "builtin:magic", "--solver", "quantum"}).code == kExitUsage);
    CHECK(call({"decompose", "builtin:magic", "--budget-s", "0"}).code == kExitUsage);
    CHECK(call({"decompose", "builtin:magic", "--solver", "nlp", "--starts", "0"}).code == kExitUsage);
    CHECK(call({"export", "builtin:magic"}).code == kExitUsage);
    CHECK(call({"decompose", "/nonexistent/spec.json"}).code == kExitUsage);
    CHECK(call({"frobnicate"}).code == kExitUsage);
}

TEST_CASE("exit codes") {
    CHECK(exit_code(SolveStatus::optimal) == 0);
    CHECK(exit_code(SolveStatus::feasible) == 0);
    CHECK(exit_code(SolveStatus::infeasible) == 2);
    CHECK(exit_code(SolveStatus::budget_exhausted) == 3);
}

TEST_CASE("decompose end to end") {
    const auto sol = temp_file("sol.json");
    const Ran r = call({"decompose", "builtin:reverse_cnot", "--solver", "both", "--starts", "20", "-o",
                        sol.c_str()});
    CHECK(r.code == 0);
    CHECK(r.out.find("MATCH: both solvers found depth 3") != std::string::npos);
    std::ifstream in(sol);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.contains("exact"));
    fs::remove(sol);

    const Ran inf = call({"decompose", "builtin:reverse_cnot", "--max-depth", "2"});
    CHECK(inf.code == kExitInfeasible);
}

TEST_CASE("identity target is free") {
    const auto spec = temp_file("id.json");
    {
        std::ofstream f(spec);
        f << R"({"n_qubits": 1, "max_depth": 2, "input_gates": ["H_1"], "target": "I"})";
    }
    const Ran r = call({"decompose", spec.c_str()});
    CHECK(r.code == 0);
    CHECK(r.out.find("depth 0") != std::string::npos);
    fs::remove(spec);
}

TEST_CASE("dump-spec round trip") {
    const RunConfig a = parse({"decompose", "builtin:qft", "--solver", "nlp", "--starts", "9", "--seed", "3",
                               "--variant", "nlp", "--phase-set", "1,i", "--discretization", "theta=0,pi/4"});
    const auto path = temp_file("dump.json");
    {
        std::ofstream f(path);
        f << dump_config(a).dump(2);
    }
    const RunConfig b = parse({"decompose", path.c_str()});
    CHECK(same_config(a, b));
    CHECK(dump_config(b) == dump_config(a));
    // Explicit flags beat the file's run section.
    const RunConfig c = parse({"decompose", path.c_str(), "--starts", "2"});
    CHECK(c.n_starts == 2);
    CHECK_FALSE(same_config(a, c));
    fs::remove(path);
}

TEST_CASE("export writes an LP file") {
    const auto lp = temp_file("model.lp");
    const Ran r = call({"export", "builtin:reverse_cnot", "--variant", "milp", "-o", lp.c_str()});
    CHECK(r.code == 0);
    std::ifstream in(lp);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("Binaries") != std::string::npos);
    CHECK(ss.str().find("Subject To") != std::string::npos);
    fs::remove(lp);
}

TEST_CASE("circuit rendering") {
    const CircuitModel m = build_model(find_case("reverse_cnot").spec);
    const std::size_t id = m.identity_index;
    const std::string pic = render_circuit(std::vector<std::size_t>{0, 2, 0, id, id}, m);
    std::istringstream in(pic);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].rfind("q1: ", 0) == 0);
    CHECK(lines[2].rfind("q2: ", 0) == 0);
    CHECK(lines[1].find('*') != std::string::npos);
    CHECK(lines[2].find('X') != std::string::npos);
    CHECK(std::count(lines[1].begin(), lines[1].end(), 'H') == 2);
    CHECK(lines[1].size() == lines[2].size());
}

TEST_CASE("installed binary runs") {
    const char* bin = std::getenv("QCDECOMP_BIN");
    if (!bin) return;
    const std::string cmd = std::string(bin) + " decompose builtin:magic -q > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    CHECK(st == 0);
    const std::string bad = std::string(bin) + " decompose builtin:magic --max-depth 2 -q > /dev/null 2>&1";
    const int st2 = std::system(bad.c_str());
    CHECK(WEXITSTATUS(st2) == 2);
}
