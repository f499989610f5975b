#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcd {

using Complex = std::complex<double>;

/// Unitaries are compared entrywise at this tolerance on construction.
inline constexpr double kUnitaryTol = 1e-10;
/// Two input matrices closer than this are the same gate.
inline constexpr double kDedupTol = 1e-10;

class PlacementError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};
class NamingError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};
class LookupError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A 2^N x 2^N complex matrix in split storage. Qubit 1 is the most
/// significant bit of the row/column index.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    /// Zero matrix on `n_qubits` qubits (0 gives the 1x1 scalar).
    explicit ComplexMatrix(int n_qubits);

    static ComplexMatrix identity(int n_qubits);
    /// Builds from row-major complex entries; the size must be a power of two.
    static ComplexMatrix from_entries(std::span<const Complex> entries);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return dim_; }

    Complex operator()(std::size_t i, std::size_t j) const {
        return {re_[i * dim_ + j], im_[i * dim_ + j]};
    }
    void set(std::size_t i, std::size_t j, Complex v) {
        re_[i * dim_ + j] = v.real();
        im_[i * dim_ + j] = v.imag();
    }

    std::span<const double> re() const { return re_; }
    std::span<const double> im() const { return im_; }
    std::span<double> re() { return re_; }
    std::span<double> im() { return im_; }

    ComplexMatrix operator*(const ComplexMatrix& rhs) const;
    ComplexMatrix adjoint() const;
    ComplexMatrix scaled(Complex factor) const;

    double max_abs_diff(const ComplexMatrix& other) const;
    bool approx_equal(const ComplexMatrix& other, double tol) const {
        return max_abs_diff(other) <= tol;
    }
    bool is_unitary(double tol = kUnitaryTol) const;

  private:
    int n_qubits_ = 0;
    std::size_t dim_ = 1;
    std::vector<double> re_ = {0.0};
    std::vector<double> im_ = {0.0};
};

/// Complex Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Real form [[re, -im], [im, re]] of a complex matrix; matrix products
/// commute with the embedding, so every gate constraint becomes real.
class RealEmbedding {
  public:
    RealEmbedding() = default;
    explicit RealEmbedding(const ComplexMatrix& m);

    int n_qubits() const { return n_qubits_; }
    /// Side length, 2^(N+1).
    std::size_t dim() const { return dim_; }
    std::span<const double> data() const { return mat_; }
    double operator()(std::size_t i, std::size_t j) const { return mat_[i * dim_ + j]; }

    ComplexMatrix recover() const;
    RealEmbedding operator*(const RealEmbedding& rhs) const;

  private:
    int n_qubits_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> mat_;
};

inline RealEmbedding embed_real(const ComplexMatrix& m) { return RealEmbedding(m); }

enum class GateKind {
    one_qubit_constant,
    one_qubit_parametrized,
    two_qubit,
    /// Tensor product of one-qubit constant gates on distinct qubits, e.g.
    /// H_1xH_2. Selected as a single input gate.
    local_product,
};

struct Angles {
    double theta = 0.0;
    double phi = 0.0;
    double lambda = 0.0;
    bool operator==(const Angles&) const = default;
};

/// Candidate values for each angle of a parametrized gate. Single-angle
/// rotations only read `theta`.
struct AngleGrid {
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> lambda;
    bool operator==(const AngleGrid&) const = default;

    /// {-pi/2, -pi/4, 0, pi/4, pi/2, pi} for every angle.
    static AngleGrid standard();
};

/// Controls how U3 angles are read. `as_printed` uses cos(theta) and
/// sin(theta) on the diagonal/off-diagonal; `half_angle` is the common
/// cos(theta/2) convention. Nothing converts between the two implicitly.
enum class U3Convention { as_printed, half_angle };

struct GateDef {
    std::string name;
    GateKind kind = GateKind::one_qubit_constant;
    /// Library symbol: "H", "T", "CNOT", "CV", "U3", "RZ", ... ("I" for the identity).
    std::string base;
    /// 1-based qubit indices; (control, target) for controlled gates.
    std::vector<int> placement;
    /// Concrete angles; set only for expanded parametrized gates.
    std::optional<Angles> angles;
    /// Per-gate discretization, used before expansion.
    std::optional<AngleGrid> discretization;
    /// Factors of a local_product gate.
    std::vector<GateDef> factors;

    bool is_identity() const { return base == "I"; }
    bool is_cnot() const { return kind == GateKind::two_qubit && base == "CNOT"; }
};

/// Parses names such as "H_1", "Tdg_2", "CNOT_1_2", "CV_2_3", "U3_1",
/// "RZ_2", "H_1xH_2" and "I"/"Identity". Throws NamingError.
GateDef parse_gate(std::string_view name);

/// Canonical display name of a (possibly expanded) gate.
std::string gate_name(const GateDef& g);
std::string format_angle(double radians);
/// Reads "pi/4", "-3pi/4", "2*pi", "0.5" and the like (radians). Throws NamingError.
double parse_angle(std::string_view text);

/// One-qubit constant matrix for a library symbol (H, X, Y, Z, S, Sdg, T,
/// Tdg, SX, SXdg, I). Throws LookupError.
ComplexMatrix one_qubit_matrix(std::string_view base);

ComplexMatrix u3_matrix(double theta, double phi, double lam,
                        U3Convention convention = U3Convention::as_printed);
ComplexMatrix rx_matrix(double theta);
ComplexMatrix ry_matrix(double theta);
ComplexMatrix rz_matrix(double theta);

/// I^(q-1) (x) u (x) I^(n-q).
ComplexMatrix lift_one_qubit(const ComplexMatrix& u, int qubit, int n);
/// |0><0|_c (x) I + |1><1|_c (x) u_t, for any control/target order.
ComplexMatrix lift_controlled(const ComplexMatrix& u, int control, int target, int n);

/// Full 2^n x 2^n matrix of a gate placed on an n-qubit register. Throws
/// PlacementError for out-of-range or repeated qubits, and for parametrized
/// gates without concrete angles.
ComplexMatrix lift_gate(const GateDef& g, int n,
                        U3Convention convention = U3Convention::as_printed);

struct CatalogEntry {
    GateDef def;
    ComplexMatrix matrix;
};

struct GateCatalog {
    int n_qubits = 0;
    std::vector<CatalogEntry> inputs;
    std::string target_name;
    ComplexMatrix target;
    std::size_t identity_index = 0;

    std::size_t size() const { return inputs.size(); }
    bool has_cnot() const;
    std::vector<std::string> names() const;
};

struct InputSetOptions {
    /// Used for parametrized gates that carry no discretization of their own.
    AngleGrid default_grid = AngleGrid::standard();
    U3Convention convention = U3Convention::as_printed;
};

/// Expands parametrized gates over the Cartesian product of their angle
/// grids, lifts everything to n qubits, drops matrices that repeat an earlier
/// one within kDedupTol, and appends I^(n) when absent. The target is left
/// empty; see make_catalog.
GateCatalog build_input_set(std::span<const GateDef> defs, int n,
                            const InputSetOptions& options = {});

/// Standard target gates by name (Reverse-CNOT, Magic, Toffoli, CNOT_a_b,
/// Controlled-V, QFT, iSwap, Grover-Diffusion, Fredkin, Margolus, CZ, CH, W,
/// ...). Any parseable constant gate expression such as "H_1" or "S_1xS_2"
/// is accepted as well. Throws LookupError.
ComplexMatrix target_lookup(std::string_view name, int n);

/// Library target names known to target_lookup (besides gate expressions).
std::vector<std::string> target_names();

GateCatalog make_catalog(std::span<const GateDef> defs, int n, std::string target_name,
                         const ComplexMatrix& target, const InputSetOptions& options = {});

}  // namespace qcd
