#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "qcd/simd/kernels.hpp"

using namespace qcd::simd;

namespace {

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Triple loop, no library code.
std::vector<double> ref_matmul(std::size_t n, const std::vector<double>& a, const std::vector<double>& b, bool ta,
                               bool tb) {
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < n; ++k) s += (ta ? a[k * n + i] : a[i * n + k]) * (tb ? b[j * n + k] : b[k * n + j]);
            c[i * n + j] = s;
        }
    return c;
}

double maxdiff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// The AVX2 table is only safe to call when the CPU has it.
std::vector<const KernelTable*> tables() {
    std::vector<const KernelTable*> t{&scalar_kernels()};
    if (isa_available(Isa::avx2)) t.push_back(&avx2_kernels());
    return t;
}

const KernelTable& other() { return isa_available(Isa::avx2) ? avx2_kernels() : scalar_kernels(); }

}  // namespace

TEST_CASE("kernels agree with reference loops for every table") {
    std::mt19937_64 rng(42);
    for (const KernelTable* t : tables())
        for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 16u, 32u}) {
            CAPTURE(n);
            const auto a = rand_vec(n * n, rng), b = rand_vec(n * n, rng);
            std::vector<double> c(n * n);
            t->matmul(n, a.data(), b.data(), c.data());
            CHECK(maxdiff(c, ref_matmul(n, a, b, false, false)) < 1e-12);
            t->matmul_tn(n, a.data(), b.data(), c.data());
            CHECK(maxdiff(c, ref_matmul(n, a, b, true, false)) < 1e-12);
            t->matmul_nt(n, a.data(), b.data(), c.data());
            CHECK(maxdiff(c, ref_matmul(n, a, b, false, true)) < 1e-12);

            const auto ar = rand_vec(n * n, rng), ai = rand_vec(n * n, rng);
            const auto br = rand_vec(n * n, rng), bi = rand_vec(n * n, rng);
            std::vector<double> cr(n * n), ci(n * n);
            t->cmatmul(n, ar.data(), ai.data(), br.data(), bi.data(), cr.data(), ci.data());
            double worst = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    std::complex<double> s = 0;
                    for (std::size_t k = 0; k < n; ++k)
                        s += std::complex<double>(ar[i * n + k], ai[i * n + k]) *
                             std::complex<double>(br[k * n + j], bi[k * n + j]);
                    worst = std::max(worst, std::abs(s - std::complex<double>(cr[i * n + j], ci[i * n + j])));
                }
            CHECK(worst < 1e-12);
        }
}

TEST_CASE("vector kernels agree with reference loops and across tables") {
    std::mt19937_64 rng(7);
    for (std::size_t len : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1000u}) {
        CAPTURE(len);
        const auto x = rand_vec(len, rng), y0 = rand_vec(len, rng);
        double dot = 0, mabs = 0, mdiff = 0;
        for (std::size_t i = 0; i < len; ++i) {
            dot += x[i] * y0[i];
            mabs = std::max(mabs, std::abs(x[i]));
            mdiff = std::max(mdiff, std::abs(x[i] - y0[i]));
        }
        std::vector<std::int32_t> qs(len), qa(len);
        for (const KernelTable* t : tables()) {
            CHECK(t->dot(len, x.data(), y0.data()) == doctest::Approx(dot).epsilon(1e-12));
            CHECK(t->max_abs(len, x.data()) == mabs);
            CHECK(t->max_abs_diff(len, x.data(), y0.data()) == mdiff);
            auto y = y0;
            t->axpy(len, 0.37, x.data(), y.data());
            for (std::size_t i = 0; i < len; ++i) CHECK(y[i] == doctest::Approx(y0[i] + 0.37 * x[i]).epsilon(1e-15));
        }
        scalar_kernels().quantize(len, x.data(), 1e6, qs.data());
        other().quantize(len, x.data(), 1e6, qa.data());
        CHECK(qs == qa);
        for (std::size_t i = 0; i < len; ++i) CHECK(qs[i] == static_cast<std::int32_t>(std::nearbyint(x[i] * 1e6)));
    }
    // Ties round to even in both tables.
    const std::vector<double> ties{0.5, 1.5, 2.5, -0.5, -1.5, 3.5, 4.5, -2.5};
    std::vector<std::int32_t> qs(ties.size()), qa(ties.size());
    scalar_kernels().quantize(ties.size(), ties.data(), 1.0, qs.data());
    other().quantize(ties.size(), ties.data(), 1.0, qa.data());
    CHECK(qs == std::vector<std::int32_t>{0, 2, 2, 0, -2, 4, 4, -2});
    CHECK(qa == qs);
}

TEST_CASE("runtime selection") {
    CHECK(isa_available(Isa::scalar));
    const Isa before = active_isa();
    select_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    CHECK(&kernels() == &scalar_kernels());
    if (isa_available(Isa::avx2)) {
        select_isa(Isa::avx2);
        CHECK(active_isa() == Isa::avx2);
    }
    select_isa(before);
    CHECK(isa_name(Isa::avx2) == "avx2");
}
