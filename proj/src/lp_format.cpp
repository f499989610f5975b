#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "qcd/model.hpp"

namespace qcd {

namespace {

// CPLEX readers cap line length; wrap well before that.
constexpr std::size_t kWrap = 200;

class LineWriter {
  public:
    explicit LineWriter(std::ostream& out) : out_(out) {}

    void put(const std::string& token) {
        if (col_ + token.size() + 1 > kWrap) {
            out_ << "\n   ";
            col_ = 3;
        }
        out_ << ' ' << token;
        col_ += token.size() + 1;
    }
    void end() {
        out_ << '\n';
        col_ = 0;
    }
    void start(const std::string& head) {
        out_ << head;
        col_ = head.size();
    }

  private:
    std::ostream& out_;
    std::size_t col_ = 0;
};

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void put_term(LineWriter& w, double coef, const std::string& var, bool first) {
    const double a = std::fabs(coef);
    std::string sign = coef < 0 ? "-" : (first ? "" : "+");
    if (!sign.empty()) w.put(sign);
    w.put(a == 1.0 ? var : num(a) + " " + var);
}

const char* sense_str(Sense s) {
    switch (s) {
        case Sense::eq: return "=";
        case Sense::le: return "<=";
        case Sense::ge: return ">=";
    }
    return "=";
}

}  // namespace

void write_lp(const ConstraintRegistry& reg, std::ostream& out, const std::string& comment) {
    if (!comment.empty()) {
        std::istringstream lines(comment);
        for (std::string line; std::getline(lines, line);) out << "\\ " << line << '\n';
    }
    LineWriter w(out);
    out << "Minimize\n";
    w.start(" obj:");
    if (reg.objective.empty()) w.put("0");
    for (std::size_t t = 0; t < reg.objective.size(); ++t)
        put_term(w, reg.objective[t].coef, reg.var_names[reg.objective[t].var], t == 0);
    w.end();

    out << "Subject To\n";
    for (const auto& r : reg.rows) {
        w.start(" " + r.name + ":");
        bool first = true;
        for (const auto& t : r.lin) {
            put_term(w, t.coef, reg.var_names[t.var], first);
            first = false;
        }
        if (!r.quad.empty()) {
            if (!first) w.put("+");
            w.put("[");
            bool qfirst = true;
            for (const auto& q : r.quad) {
                put_term(w, q.coef, reg.var_names[q.a] + " * " + reg.var_names[q.b], qfirst);
                qfirst = false;
            }
            w.put("]");
            first = false;
        }
        if (first) w.put("0 " + reg.var_names.front());
        w.put(sense_str(r.sense));
        w.put(num(r.rhs));
        w.end();
    }

    out << "Bounds\n";
    for (std::size_t v = 0; v < reg.n_vars(); ++v) {
        if (reg.binary[v]) continue;
        out << ' ' << num(reg.lower[v]) << " <= " << reg.var_names[v] << " <= " << num(reg.upper[v]) << '\n';
    }
    bool any_binary = false;
    for (std::size_t v = 0; v < reg.n_vars(); ++v) {
        if (!reg.binary[v]) continue;
        if (!any_binary) {
            out << "Binaries\n";
            w.start("");
            any_binary = true;
        }
        w.put(reg.var_names[v]);
    }
    if (any_binary) w.end();
    out << "End\n";
}

void export_model(const CircuitModel& model, const std::filesystem::path& path, std::size_t phase) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    const Complex p = model.phase_set.at(phase);
    std::ostringstream c;
    c << "circuit decomposition model, variant " << variant_name(model.variant) << '\n'
      << "target " << (model.target_name.empty() ? "<matrix>" : model.target_name) << ", qubits "
      << model.n_qubits << ", max depth " << model.max_depth << ", input gates " << model.n_gates << '\n'
      << "target phase (" << num(p.real()) << ", " << num(p.imag()) << ")\n";
    for (std::size_t k = 0; k < model.n_gates; ++k) c << "gate " << (k + 1) << ": " << model.gate_names[k] << '\n';
    write_lp(build_registry(model, phase), out, c.str());
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

LpSummary scan_lp(std::istream& in) {
    enum class Section { none, objective, constraints, bounds, binaries, generals, end };
    static const std::set<std::string> keywords{"inf", "infinity", "free", "Inf", "Infinity", "Free"};
    Section sec = Section::none;
    std::set<std::string> vars;
    std::set<std::string> bins;
    LpSummary s;
    bool row_has_quad = false;
    bool in_row = false;
    auto lower = [](std::string t) {
        for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return t;
    };
    auto close_row = [&] {
        if (in_row && row_has_quad) ++s.quadratic_rows;
        in_row = false;
        row_has_quad = false;
    };
    for (std::string line; std::getline(in, line);) {
        if (const auto bs = line.find('\\'); bs != std::string::npos) line.erase(bs);
        std::istringstream ts(line);
        std::string first;
        if (!(ts >> first)) continue;
        const std::string head = lower(first);
        std::string rest_head;
        {
            std::istringstream peek(line);
            std::string a, b;
            peek >> a >> b;
            rest_head = lower(a + " " + b);
        }
        if (head == "minimize" || head == "maximize" || head == "minimise" || head == "maximise") {
            sec = Section::objective;
            continue;
        }
        if (rest_head == "subject to" || head == "st" || head == "s.t.") {
            sec = Section::constraints;
            continue;
        }
        if (head == "bounds") {
            close_row();
            sec = Section::bounds;
            continue;
        }
        if (head == "binaries" || head == "binary" || head == "bin") {
            close_row();
            sec = Section::binaries;
            continue;
        }
        if (head == "generals" || head == "general") {
            close_row();
            sec = Section::generals;
            continue;
        }
        if (head == "end") {
            close_row();
            sec = Section::end;
            continue;
        }
        std::istringstream tokens(line);
        for (std::string tok; tokens >> tok;) {
            if (tok.back() == ':') {
                if (sec == Section::constraints) {
                    close_row();
                    in_row = true;
                    ++s.rows;
                }
                continue;
            }
            if (tok == "[") row_has_quad = true;
            if (!(std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_')) continue;
            if (keywords.count(tok)) continue;
            vars.insert(tok);
            if (sec == Section::binaries) bins.insert(tok);
        }
    }
    close_row();
    s.variables = vars.size();
    s.binaries = bins.size();
    return s;
}

}  // namespace qcd
