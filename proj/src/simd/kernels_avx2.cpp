// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a runtime CPU check.

#include "qcd/simd/kernels.hpp"

#if defined(QCD_HAVE_AVX2)

#include <immintrin.h>

#include <array>
#include <cmath>

namespace qcd::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Row-oriented product: for each row i, c_row += a[i][l] * b_row(l). The
// vector width covers four output columns; n < 4 or a ragged tail falls back
// to scalar code.
void cmatmul_avx2(std::size_t n, const double* ar, const double* ai, const double* br,
                  const double* bi, double* cr, double* ci) {
    const std::size_t nv = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; j += 4) {
            __m256d sr = _mm256_setzero_pd();
            __m256d si = _mm256_setzero_pd();
            for (std::size_t l = 0; l < n; ++l) {
                const __m256d xr = _mm256_broadcast_sd(ar + i * n + l);
                const __m256d xi = _mm256_broadcast_sd(ai + i * n + l);
                const __m256d yr = _mm256_loadu_pd(br + l * n + j);
                const __m256d yi = _mm256_loadu_pd(bi + l * n + j);
                sr = _mm256_fmadd_pd(xr, yr, sr);
                sr = _mm256_fnmadd_pd(xi, yi, sr);
                si = _mm256_fmadd_pd(xr, yi, si);
                si = _mm256_fmadd_pd(xi, yr, si);
            }
            _mm256_storeu_pd(cr + i * n + j, sr);
            _mm256_storeu_pd(ci + i * n + j, si);
        }
        for (std::size_t j = nv; j < n; ++j) {
            double sr = 0.0;
            double si = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double xr = ar[i * n + l];
                const double xi = ai[i * n + l];
                sr += xr * br[l * n + j] - xi * bi[l * n + j];
                si += xr * bi[l * n + j] + xi * br[l * n + j];
            }
            cr[i * n + j] = sr;
            ci[i * n + j] = si;
        }
    }
}

void matmul_avx2(std::size_t n, const double* a, const double* b, double* c) {
    const std::size_t nv = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; j += 4) {
            __m256d s = _mm256_setzero_pd();
            for (std::size_t l = 0; l < n; ++l)
                s = _mm256_fmadd_pd(_mm256_broadcast_sd(a + i * n + l),
                                    _mm256_loadu_pd(b + l * n + j), s);
            _mm256_storeu_pd(c + i * n + j, s);
        }
        for (std::size_t j = nv; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a[i * n + l] * b[l * n + j];
            c[i * n + j] = s;
        }
    }
}

void matmul_tn_avx2(std::size_t n, const double* a, const double* b, double* c) {
    const std::size_t nv = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; j += 4) {
            __m256d s = _mm256_setzero_pd();
            for (std::size_t l = 0; l < n; ++l)
                s = _mm256_fmadd_pd(_mm256_broadcast_sd(a + l * n + i),
                                    _mm256_loadu_pd(b + l * n + j), s);
            _mm256_storeu_pd(c + i * n + j, s);
        }
        for (std::size_t j = nv; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a[l * n + i] * b[l * n + j];
            c[i * n + j] = s;
        }
    }
}

void matmul_nt_avx2(std::size_t n, const double* a, const double* b, double* c) {
    // Transpose B into a scratch buffer, then reuse the row kernel.
    constexpr std::size_t kMax = 32;
    if (n > kMax) {
        scalar_kernels().matmul_nt(n, a, b, c);
        return;
    }
    std::array<double, kMax * kMax> bt;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) bt[j * n + i] = b[i * n + j];
    matmul_avx2(n, a, bt.data(), c);
}

void axpy_avx2(std::size_t len, double alpha, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < len; ++i) y[i] += alpha * x[i];
}

double dot_avx2(std::size_t len, const double* x, const double* y) {
    __m256d s = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s);
    double r = hsum(s);
    for (; i < len; ++i) r += x[i] * y[i];
    return r;
}

double max_abs_avx2(std::size_t len, const double* x) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    std::array<double, 4> lanes;
    _mm256_storeu_pd(lanes.data(), m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; i < len; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

double max_abs_diff_avx2(std::size_t len, const double* x, const double* y) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    std::array<double, 4> lanes;
    _mm256_storeu_pd(lanes.data(), m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; i < len; ++i) r = std::fmax(r, std::fabs(x[i] - y[i]));
    return r;
}

void quantize_avx2(std::size_t len, const double* x, double inv_step, std::int32_t* out) {
    const __m256d s = _mm256_set1_pd(inv_step);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d r = _mm256_round_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), s),
                                          _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), _mm256_cvtpd_epi32(r));
    }
    for (; i < len; ++i) out[i] = static_cast<std::int32_t>(std::nearbyint(x[i] * inv_step));
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{
        cmatmul_avx2, matmul_avx2,  matmul_tn_avx2,    matmul_nt_avx2, axpy_avx2,
        dot_avx2,     max_abs_avx2, max_abs_diff_avx2, quantize_avx2,
    };
    return table;
}

}  // namespace qcd::simd

#else

namespace qcd::simd {
const KernelTable& avx2_kernels() { return scalar_kernels(); }
}  // namespace qcd::simd

#endif
