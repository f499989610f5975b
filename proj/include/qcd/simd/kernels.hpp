#pragma once

// Dense kernels for the small square matrices that make up every gate
// product (dimension 2..32). A scalar reference table is always built; an
// AVX2/FMA table is compiled separately and picked at runtime when the CPU
// supports it. QCD_ISA=scalar in the environment forces the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace qcd::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// All matrices are row-major n x n.
struct KernelTable {
    // C = A * B, complex in split (re, im) storage.
    void (*cmatmul)(std::size_t n, const double* ar, const double* ai,
                    const double* br, const double* bi, double* cr, double* ci);
    // C = A * B
    void (*matmul)(std::size_t n, const double* a, const double* b, double* c);
    // C = A^T * B
    void (*matmul_tn)(std::size_t n, const double* a, const double* b, double* c);
    // C = A * B^T
    void (*matmul_nt)(std::size_t n, const double* a, const double* b, double* c);
    // y += alpha * x
    void (*axpy)(std::size_t len, double alpha, const double* x, double* y);
    double (*dot)(std::size_t len, const double* x, const double* y);
    double (*max_abs)(std::size_t len, const double* x);
    double (*max_abs_diff)(std::size_t len, const double* x, const double* y);
    // out[i] = x[i] * inv_step rounded to nearest, ties to even
    void (*quantize)(std::size_t len, const double* x, double inv_step, std::int32_t* out);
};

const KernelTable& scalar_kernels();
// Falls back to the scalar table when AVX2 was not compiled in.
const KernelTable& avx2_kernels();

bool isa_available(Isa isa);
Isa active_isa();
// Switches the process-wide table. Intended for tests and benchmarks.
void select_isa(Isa isa);
const KernelTable& kernels();

inline void cmatmul(std::size_t n, const double* ar, const double* ai, const double* br,
                    const double* bi, double* cr, double* ci) {
    kernels().cmatmul(n, ar, ai, br, bi, cr, ci);
}
inline void matmul(std::size_t n, const double* a, const double* b, double* c) {
    kernels().matmul(n, a, b, c);
}
inline void matmul_tn(std::size_t n, const double* a, const double* b, double* c) {
    kernels().matmul_tn(n, a, b, c);
}
inline void matmul_nt(std::size_t n, const double* a, const double* b, double* c) {
    kernels().matmul_nt(n, a, b, c);
}
inline void axpy(std::size_t len, double alpha, const double* x, double* y) {
    kernels().axpy(len, alpha, x, y);
}
inline double dot(std::size_t len, const double* x, const double* y) {
    return kernels().dot(len, x, y);
}
inline double max_abs(std::size_t len, const double* x) { return kernels().max_abs(len, x); }
inline double max_abs_diff(std::size_t len, const double* x, const double* y) {
    return kernels().max_abs_diff(len, x, y);
}
inline void quantize(std::size_t len, const double* x, double inv_step, std::int32_t* out) {
    kernels().quantize(len, x, inv_step, out);
}

}  // namespace qcd::simd
