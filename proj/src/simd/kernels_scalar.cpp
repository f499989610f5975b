#include "qcd/simd/kernels.hpp"

#include <cmath>

namespace qcd::simd {
namespace {

void cmatmul_scalar(std::size_t n, const double* ar, const double* ai, const double* br,
                    const double* bi, double* cr, double* ci) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sr = 0.0;
            double si = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double xr = ar[i * n + l];
                const double xi = ai[i * n + l];
                const double yr = br[l * n + j];
                const double yi = bi[l * n + j];
                sr += xr * yr - xi * yi;
                si += xr * yi + xi * yr;
            }
            cr[i * n + j] = sr;
            ci[i * n + j] = si;
        }
    }
}

void matmul_scalar(std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a[i * n + l] * b[l * n + j];
            c[i * n + j] = s;
        }
    }
}

void matmul_tn_scalar(std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a[l * n + i] * b[l * n + j];
            c[i * n + j] = s;
        }
    }
}

void matmul_nt_scalar(std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a[i * n + l] * b[j * n + l];
            c[i * n + j] = s;
        }
    }
}

void axpy_scalar(std::size_t len, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

double dot_scalar(std::size_t len, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[i] * y[i];
    return s;
}

double max_abs_scalar(std::size_t len, const double* x) {
    double m = 0.0;
    for (std::size_t i = 0; i < len; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

double max_abs_diff_scalar(std::size_t len, const double* x, const double* y) {
    double m = 0.0;
    for (std::size_t i = 0; i < len; ++i) m = std::fmax(m, std::fabs(x[i] - y[i]));
    return m;
}

void quantize_scalar(std::size_t len, const double* x, double inv_step, std::int32_t* out) {
    for (std::size_t i = 0; i < len; ++i)
        out[i] = static_cast<std::int32_t>(std::nearbyint(x[i] * inv_step));
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        cmatmul_scalar, matmul_scalar,  matmul_tn_scalar,    matmul_nt_scalar, axpy_scalar,
        dot_scalar,     max_abs_scalar, max_abs_diff_scalar, quantize_scalar,
    };
    return table;
}

}  // namespace qcd::simd
