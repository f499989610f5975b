#include "qcd/gates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qcd/simd/kernels.hpp"

namespace qcd {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

int qubits_for_dim(std::size_t dim) {
    int n = 0;
    while ((std::size_t{1} << n) < dim) ++n;
    if ((std::size_t{1} << n) != dim) throw std::invalid_argument("matrix dimension is not a power of two");
    return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(int n_qubits)
    : n_qubits_(n_qubits),
      dim_(dim_of(n_qubits)),
      re_(dim_ * dim_, 0.0),
      im_(dim_ * dim_, 0.0) {
    if (n_qubits < 0) throw std::invalid_argument("negative qubit count");
}

ComplexMatrix ComplexMatrix::identity(int n_qubits) {
    ComplexMatrix m(n_qubits);
    for (std::size_t i = 0; i < m.dim_; ++i) m.re_[i * m.dim_ + i] = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::from_entries(std::span<const Complex> entries) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(double(entries.size()))));
    if (side * side != entries.size()) throw std::invalid_argument("matrix is not square");
    ComplexMatrix m(qubits_for_dim(side));
    for (std::size_t k = 0; k < entries.size(); ++k) {
        m.re_[k] = entries[k].real();
        m.im_[k] = entries[k].imag();
    }
    return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    std::vector<Complex> flat;
    for (const auto& row : rows) {
        if (row.size() != rows.size()) throw std::invalid_argument("matrix is not square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return from_entries(flat);
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    if (dim_ != rhs.dim_) throw std::invalid_argument("matrix dimension mismatch");
    ComplexMatrix out(n_qubits_);
    simd::cmatmul(dim_, re_.data(), im_.data(), rhs.re_.data(), rhs.im_.data(), out.re_.data(),
                  out.im_.data());
    return out;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(n_qubits_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) {
            out.re_[j * dim_ + i] = re_[i * dim_ + j];
            out.im_[j * dim_ + i] = -im_[i * dim_ + j];
        }
    return out;
}

ComplexMatrix ComplexMatrix::scaled(Complex factor) const {
    ComplexMatrix out(n_qubits_);
    for (std::size_t k = 0; k < re_.size(); ++k) {
        const Complex v = Complex(re_[k], im_[k]) * factor;
        out.re_[k] = v.real();
        out.im_[k] = v.imag();
    }
    return out;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
    if (dim_ != other.dim_) throw std::invalid_argument("matrix dimension mismatch");
    return std::max(simd::max_abs_diff(re_.size(), re_.data(), other.re_.data()),
                    simd::max_abs_diff(im_.size(), im_.data(), other.im_.data()));
}

bool ComplexMatrix::is_unitary(double tol) const {
    return ((*this) * adjoint()).approx_equal(identity(n_qubits_), tol);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t da = a.dim();
    const std::size_t db = b.dim();
    ComplexMatrix out(a.n_qubits() + b.n_qubits());
    const std::size_t d = da * db;
    auto ar = a.re();
    auto ai = a.im();
    auto br = b.re();
    auto bi = b.im();
    auto cr = out.re();
    auto ci = out.im();
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t k = 0; k < da; ++k) {
            const double xr = ar[i * da + k];
            const double xi = ai[i * da + k];
            for (std::size_t j = 0; j < db; ++j)
                for (std::size_t l = 0; l < db; ++l) {
                    const std::size_t row = i * db + j;
                    const std::size_t col = k * db + l;
                    const double yr = br[j * db + l];
                    const double yi = bi[j * db + l];
                    cr[row * d + col] = xr * yr - xi * yi;
                    ci[row * d + col] = xr * yi + xi * yr;
                }
        }
    return out;
}

// ---------------------------------------------------------------------------
// RealEmbedding

RealEmbedding::RealEmbedding(const ComplexMatrix& m)
    : n_qubits_(m.n_qubits()), dim_(2 * m.dim()), mat_(dim_ * dim_, 0.0) {
    const std::size_t d = m.dim();
    auto re = m.re();
    auto im = m.im();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double r = re[i * d + j];
            const double c = im[i * d + j];
            mat_[i * dim_ + j] = r;
            mat_[i * dim_ + j + d] = -c;
            mat_[(i + d) * dim_ + j] = c;
            mat_[(i + d) * dim_ + j + d] = r;
        }
}

ComplexMatrix RealEmbedding::recover() const {
    ComplexMatrix m(n_qubits_);
    const std::size_t d = dim_ / 2;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m.set(i, j, {mat_[i * dim_ + j], mat_[(i + d) * dim_ + j]});
    return m;
}

RealEmbedding RealEmbedding::operator*(const RealEmbedding& rhs) const {
    if (dim_ != rhs.dim_) throw std::invalid_argument("embedding dimension mismatch");
    RealEmbedding out = *this;
    simd::matmul(dim_, mat_.data(), rhs.mat_.data(), out.mat_.data());
    return out;
}

// ---------------------------------------------------------------------------
// Gate library

AngleGrid AngleGrid::standard() {
    const std::vector<double> v{-kPi / 2, -kPi / 4, 0.0, kPi / 4, kPi / 2, kPi};
    return {v, v, v};
}

ComplexMatrix one_qubit_matrix(std::string_view base) {
    const double h = 1.0 / std::numbers::sqrt2;
    const Complex i{0.0, 1.0};
    const Complex w = std::polar(1.0, kPi / 4);
    if (base == "I") return ComplexMatrix::identity(1);
    if (base == "H") return ComplexMatrix::from_rows({{h, h}, {h, -h}});
    if (base == "X") return ComplexMatrix::from_rows({{0, 1}, {1, 0}});
    if (base == "Y") return ComplexMatrix::from_rows({{0, -i}, {i, 0}});
    if (base == "Z") return ComplexMatrix::from_rows({{1, 0}, {0, -1}});
    if (base == "S") return ComplexMatrix::from_rows({{1, 0}, {0, i}});
    if (base == "Sdg") return ComplexMatrix::from_rows({{1, 0}, {0, -i}});
    if (base == "T") return ComplexMatrix::from_rows({{1, 0}, {0, w}});
    if (base == "Tdg") return ComplexMatrix::from_rows({{1, 0}, {0, std::conj(w)}});
    if (base == "SX")
        return ComplexMatrix::from_rows({{Complex(0.5, 0.5), Complex(0.5, -0.5)},
                                         {Complex(0.5, -0.5), Complex(0.5, 0.5)}});
    if (base == "SXdg")
        return ComplexMatrix::from_rows({{Complex(0.5, -0.5), Complex(0.5, 0.5)},
                                         {Complex(0.5, 0.5), Complex(0.5, -0.5)}});
    throw LookupError("unknown one-qubit gate '" + std::string(base) + "'");
}

ComplexMatrix u3_matrix(double theta, double phi, double lam, U3Convention convention) {
    const double t = convention == U3Convention::half_angle ? theta / 2 : theta;
    const double c = std::cos(t);
    const double s = std::sin(t);
    return ComplexMatrix::from_rows({{c, -std::polar(1.0, lam) * s},
                                     {std::polar(1.0, phi) * s, std::polar(1.0, phi + lam) * c}});
}

ComplexMatrix rx_matrix(double theta) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    return ComplexMatrix::from_rows({{c, Complex(0, -s)}, {Complex(0, -s), c}});
}

ComplexMatrix ry_matrix(double theta) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    return ComplexMatrix::from_rows({{c, -s}, {s, c}});
}

ComplexMatrix rz_matrix(double theta) {
    return ComplexMatrix::from_rows(
        {{std::polar(1.0, -theta / 2), 0}, {0, std::polar(1.0, theta / 2)}});
}

namespace {

bool is_parametrized_base(std::string_view b) {
    return b == "U3" || b == "RX" || b == "RY" || b == "RZ";
}

bool is_one_qubit_base(std::string_view b) {
    static const std::vector<std::string_view> names{"H", "X",   "Y",  "Z",  "S",
                                                     "Sdg", "T", "Tdg", "SX", "SXdg"};
    return std::find(names.begin(), names.end(), b) != names.end();
}

// Controlled gates map to the one-qubit operator applied on the target.
std::optional<std::string_view> controlled_payload(std::string_view b) {
    if (b == "CNOT") return "X";
    if (b == "CY") return "Y";
    if (b == "CZ") return "Z";
    if (b == "CH") return "H";
    if (b == "CS") return "S";
    if (b == "CSdg") return "Sdg";
    if (b == "CT") return "T";
    if (b == "CTdg") return "Tdg";
    if (b == "CV") return "SX";
    if (b == "CVdg") return "SXdg";
    return std::nullopt;
}

bool is_two_qubit_base(std::string_view b) { return b == "SWAP" || controlled_payload(b).has_value(); }

std::string normalize_base(std::string_view raw) {
    std::string b(raw);
    static const std::vector<std::pair<std::string, std::string>> aliases{
        {"Identity", "I"},   {"CNot", "CNOT"},   {"CX", "CNOT"},      {"Tdagger", "Tdg"},
        {"Sdagger", "Sdg"},  {"SXdagger", "SXdg"}, {"V", "SX"},       {"Vdg", "SXdg"},
        {"Vdagger", "SXdg"}, {"CVdagger", "CVdg"}, {"CSdagger", "CSdg"}, {"CTdagger", "CTdg"},
        {"Swap", "SWAP"},    {"u3", "U3"},        {"Rx", "RX"},         {"Ry", "RY"},
        {"Rz", "RZ"},
    };
    for (const auto& [from, to] : aliases)
        if (b == from) return to;
    return b;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

GateDef parse_single(std::string_view token) {
    std::string text(token);
    std::optional<std::vector<double>> angle_values;
    if (const auto open = text.find('('); open != std::string::npos) {
        if (text.back() != ')') throw NamingError("unbalanced parentheses in '" + text + "'");
        std::vector<double> vals;
        for (const auto& part : split(text.substr(open + 1, text.size() - open - 2), ','))
            vals.push_back(parse_angle(part));
        angle_values = vals;
        text = text.substr(0, open);
    }
    auto parts = split(text, '_');
    GateDef g;
    g.base = normalize_base(parts[0]);
    for (std::size_t k = 1; k < parts.size(); ++k) {
        if (parts[k].empty() ||
            !std::all_of(parts[k].begin(), parts[k].end(), [](unsigned char c) { return std::isdigit(c); }))
            throw NamingError("malformed qubit index in '" + std::string(token) + "'");
        g.placement.push_back(std::stoi(parts[k]));
    }
    if (g.base == "I") {
        if (!g.placement.empty()) throw NamingError("identity takes no qubit index");
        g.kind = GateKind::one_qubit_constant;
    } else if (is_parametrized_base(g.base)) {
        g.kind = GateKind::one_qubit_parametrized;
        if (angle_values) {
            const auto& v = *angle_values;
            if (g.base == "U3" && v.size() != 3) throw NamingError("U3 takes three angles");
            if (g.base != "U3" && v.size() != 1) throw NamingError(g.base + " takes one angle");
            g.angles = Angles{v[0], v.size() > 1 ? v[1] : 0.0, v.size() > 2 ? v[2] : 0.0};
        }
    } else if (angle_values) {
        throw NamingError("gate '" + g.base + "' takes no angles");
    } else if (is_one_qubit_base(g.base)) {
        g.kind = GateKind::one_qubit_constant;
    } else if (is_two_qubit_base(g.base)) {
        g.kind = GateKind::two_qubit;
    } else {
        throw NamingError("unknown gate '" + std::string(token) + "'");
    }
    const std::size_t arity = g.base == "I" ? 0 : (g.kind == GateKind::two_qubit ? 2 : 1);
    if (g.placement.size() != arity)
        throw NamingError("gate '" + std::string(token) + "' expects " + std::to_string(arity) +
                          " qubit indices");
    g.name = gate_name(g);
    return g;
}

}  // namespace

double parse_angle(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) throw NamingError("empty angle");
    const auto pos = s.find("pi");
    if (pos == std::string::npos) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw NamingError("malformed angle '" + s + "'");
        return v;
    }
    std::string coeff = s.substr(0, pos);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    double c = 1.0;
    if (coeff == "-") c = -1.0;
    else if (!coeff.empty() && coeff != "+") c = std::stod(coeff);
    std::string rest = s.substr(pos + 2);
    double den = 1.0;
    if (!rest.empty()) {
        if (rest[0] != '/') throw NamingError("malformed angle '" + s + "'");
        den = std::stod(rest.substr(1));
    }
    return c * kPi / den;
}

std::string format_angle(double radians) {
    const double r = radians / kPi;
    const double twelfths = r * 12.0;
    const double rounded = std::round(twelfths);
    if (std::fabs(twelfths - rounded) < 1e-9) {
        long num = std::lround(rounded);
        long den = 12;
        if (num == 0) return "0";
        long a = std::labs(num);
        long b = den;
        while (b != 0) {
            const long t = a % b;
            a = b;
            b = t;
        }
        num /= a;
        den /= a;
        std::string s = num < 0 ? "-" : "";
        if (std::labs(num) != 1) s += std::to_string(std::labs(num));
        s += "pi";
        if (den != 1) s += "/" + std::to_string(den);
        return s;
    }
    std::ostringstream os;
    os.precision(10);
    os << radians;
    return os.str();
}

std::string gate_name(const GateDef& g) {
    if (g.kind == GateKind::local_product) {
        std::string s;
        for (std::size_t k = 0; k < g.factors.size(); ++k) {
            if (k > 0) s += "x";
            s += gate_name(g.factors[k]);
        }
        return s;
    }
    if (g.is_identity()) return "I";
    std::string s = g.base;
    for (int q : g.placement) s += "_" + std::to_string(q);
    if (g.kind == GateKind::one_qubit_parametrized && g.angles) {
        s += "(" + format_angle(g.angles->theta);
        if (g.base == "U3") s += "," + format_angle(g.angles->phi) + "," + format_angle(g.angles->lambda);
        s += ")";
    }
    return s;
}

GateDef parse_gate(std::string_view name) {
    std::vector<std::string> tokens;
    {
        // Split on 'x' only where it joins two gate tokens ("H_1xH_2").
        std::string cur;
        for (std::size_t k = 0; k < name.size(); ++k) {
            const char ch = name[k];
            if (ch == 'x' && k > 0 && (std::isdigit(static_cast<unsigned char>(name[k - 1])) ||
                                       name[k - 1] == ')')) {
                tokens.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        tokens.push_back(cur);
    }
    if (tokens.size() == 1) return parse_single(tokens[0]);
    GateDef g;
    g.kind = GateKind::local_product;
    g.base = "KRON";
    for (const auto& t : tokens) {
        GateDef f = parse_single(t);
        if (f.kind != GateKind::one_qubit_constant || f.is_identity())
            throw NamingError("product gate '" + std::string(name) +
                              "' must combine one-qubit constant gates");
        g.placement.push_back(f.placement[0]);
        g.factors.push_back(std::move(f));
    }
    g.name = gate_name(g);
    return g;
}

ComplexMatrix lift_one_qubit(const ComplexMatrix& u, int qubit, int n) {
    if (qubit < 1 || qubit > n) throw PlacementError("qubit index out of range");
    return kron(kron(ComplexMatrix::identity(qubit - 1), u), ComplexMatrix::identity(n - qubit));
}

ComplexMatrix lift_controlled(const ComplexMatrix& u, int control, int target, int n) {
    if (control < 1 || control > n || target < 1 || target > n)
        throw PlacementError("qubit index out of range");
    if (control == target) throw PlacementError("control and target coincide");
    const std::size_t d = dim_of(n);
    const std::size_t cbit = std::size_t{1} << (n - control);
    const std::size_t tbit = std::size_t{1} << (n - target);
    ComplexMatrix m(n);
    for (std::size_t col = 0; col < d; ++col) {
        if ((col & cbit) == 0) {
            m.set(col, col, 1.0);
            continue;
        }
        const std::size_t s = (col & tbit) ? 1 : 0;
        const std::size_t base = col & ~tbit;
        for (std::size_t r = 0; r < 2; ++r) m.set(base | (r ? tbit : 0), col, u(r, s));
    }
    return m;
}

namespace {

ComplexMatrix swap_matrix(int a, int b, int n) {
    if (a < 1 || a > n || b < 1 || b > n) throw PlacementError("qubit index out of range");
    if (a == b) throw PlacementError("swap qubits coincide");
    const std::size_t d = dim_of(n);
    const std::size_t abit = std::size_t{1} << (n - a);
    const std::size_t bbit = std::size_t{1} << (n - b);
    ComplexMatrix m(n);
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t row = col & ~(abit | bbit);
        if (col & abit) row |= bbit;
        if (col & bbit) row |= abit;
        m.set(row, col, 1.0);
    }
    return m;
}

ComplexMatrix parametrized_matrix(const GateDef& g, U3Convention convention) {
    if (!g.angles) throw PlacementError("parametrized gate '" + g.name + "' has no angles");
    const Angles& a = *g.angles;
    if (g.base == "U3") return u3_matrix(a.theta, a.phi, a.lambda, convention);
    if (g.base == "RX") return rx_matrix(a.theta);
    if (g.base == "RY") return ry_matrix(a.theta);
    return rz_matrix(a.theta);
}

}  // namespace

ComplexMatrix lift_gate(const GateDef& g, int n, U3Convention convention) {
    if (n < 1) throw PlacementError("register needs at least one qubit");
    for (int q : g.placement)
        if (q < 1 || q > n)
            throw PlacementError("gate '" + g.name + "' placed outside qubits 1.." + std::to_string(n));
    for (std::size_t a = 0; a < g.placement.size(); ++a)
        for (std::size_t b = a + 1; b < g.placement.size(); ++b)
            if (g.placement[a] == g.placement[b])
                throw PlacementError("gate '" + g.name + "' repeats a qubit");
    switch (g.kind) {
        case GateKind::one_qubit_constant:
            if (g.is_identity()) return ComplexMatrix::identity(n);
            if (g.placement.size() != 1) throw PlacementError("one-qubit gate needs one qubit");
            return lift_one_qubit(one_qubit_matrix(g.base), g.placement[0], n);
        case GateKind::one_qubit_parametrized:
            if (g.placement.size() != 1) throw PlacementError("one-qubit gate needs one qubit");
            return lift_one_qubit(parametrized_matrix(g, convention), g.placement[0], n);
        case GateKind::two_qubit:
            if (g.placement.size() != 2) throw PlacementError("two-qubit gate needs two qubits");
            if (g.base == "SWAP") return swap_matrix(g.placement[0], g.placement[1], n);
            return lift_controlled(one_qubit_matrix(*controlled_payload(g.base)), g.placement[0],
                                   g.placement[1], n);
        case GateKind::local_product: {
            ComplexMatrix m = ComplexMatrix::identity(n);
            for (const auto& f : g.factors) m = m * lift_gate(f, n, convention);
            return m;
        }
    }
    throw PlacementError("unhandled gate kind");
}

}  // namespace qcd
