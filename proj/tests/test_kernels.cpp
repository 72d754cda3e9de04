#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "delaykit/kernels.hpp"
#include "delaykit/rng.hpp"

using namespace delaykit;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, bool mixed_sign) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = 0.5 + rng.uniform();
        if (mixed_sign && rng.uniform() < 0.5) x = -x;
    }
    return v;
}

// Sizes cover every remainder of the 4-lane and 2-lane kernels.
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 31, 32, 33, 1000};

}  // namespace

#if defined(DELAYKIT_HAVE_AVX2_TU)

TEST_CASE("avx2 kernels match the scalar reference") {
    Rng rng(2024);
    for (const std::size_t n : kSizes) {
        const auto a = random_vec(n, rng, true);
        const auto b = random_vec(n, rng, true);

        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
        const double tol = 1e-12 * (scale + 1.0);

        CHECK(std::abs(knl::avx2::dot(a.data(), b.data(), n) -
                       knl::scalar::dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(knl::avx2::sum(a.data(), n) - knl::scalar::sum(a.data(), n)) <= tol);
        CHECK(std::abs(knl::avx2::sumsq(a.data(), n) - knl::scalar::sumsq(a.data(), n)) <=
              tol);
        CHECK(std::abs(knl::avx2::dist2(a.data(), b.data(), n) -
                       knl::scalar::dist2(a.data(), b.data(), n)) <= tol);

        auto y1 = b;
        auto y2 = b;
        knl::scalar::axpy(0.37, a.data(), y1.data(), n);
        knl::avx2::axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

        std::vector<double> o1(n), o2(n);
        knl::scalar::dist2_2d(a.data(), b.data(), 0.25, -0.5, n, o1.data());
        knl::avx2::dist2_2d(a.data(), b.data(), 0.25, -0.5, n, o2.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-13));

        knl::scalar::sq_diff_accum(a.data(), 0.7, o1.data(), n, true);
        knl::avx2::sq_diff_accum(a.data(), 0.7, o2.data(), n, true);
        knl::scalar::sq_diff_accum(b.data(), -0.2, o1.data(), n, false);
        knl::avx2::sq_diff_accum(b.data(), -0.2, o2.data(), n, false);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-13));

        double m_s = 0.0, m_v = 0.0;
        const std::size_t i_s = knl::scalar::argmin_pairwise_max(a.data(), b.data(), 0.9, n, m_s);
        const std::size_t i_v = knl::avx2::argmin_pairwise_max(a.data(), b.data(), 0.9, n, m_v);
        CHECK(m_s == m_v);
        CHECK(i_s == i_v);
    }
}

TEST_CASE("argmin_pairwise_max ignores +inf entries and finds first index") {
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> a = {inf, 2.0, 5.0, inf, 1.5};
    const std::vector<double> b = {1.0, inf, 3.0, inf, 1.0};
    double m = 0.0;
    CHECK(knl::scalar::argmin_pairwise_max(a.data(), b.data(), 0.0, a.size(), m) == 4);
    CHECK(m == 1.5);
    CHECK(knl::avx2::argmin_pairwise_max(a.data(), b.data(), 0.0, a.size(), m) == 4);
    CHECK(m == 1.5);
    // floor clamping: the only sub-floor finite pair clamps up to the floor
    CHECK(knl::scalar::argmin_pairwise_max(a.data(), b.data(), 4.0, a.size(), m) == 4);
    CHECK(m == 4.0);
    CHECK(knl::avx2::argmin_pairwise_max(a.data(), b.data(), 4.0, a.size(), m) == 4);
    CHECK(m == 4.0);
    // equal clamped values tie to the first index
    const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(knl::avx2::argmin_pairwise_max(ones.data(), ones.data(), 2.0, ones.size(), m) == 0);
    CHECK(m == 2.0);
    const std::vector<double> all_inf = {inf, inf};
    CHECK(knl::scalar::argmin_pairwise_max(all_inf.data(), all_inf.data(), 1.0, 2, m) == 2);
    CHECK(knl::avx2::argmin_pairwise_max(all_inf.data(), all_inf.data(), 1.0, 2, m) == 2);
}

#endif  // DELAYKIT_HAVE_AVX2_TU

TEST_CASE("dispatched kernels agree with scalar within rounding") {
    Rng rng(7);
    const std::size_t n = 257;
    const auto a = random_vec(n, rng, true);
    const auto b = random_vec(n, rng, true);
    CHECK(std::abs(knl::dot(a.data(), b.data(), n) -
                   knl::scalar::dot(a.data(), b.data(), n)) < 1e-10);
    CHECK(knl::backend_name() != nullptr);
}

TEST_CASE("scalar kernel basics") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {4.0, 5.0, 6.0};
    CHECK(knl::scalar::dot(a.data(), b.data(), 3) == 32.0);
    CHECK(knl::scalar::sum(a.data(), 3) == 6.0);
    CHECK(knl::scalar::sumsq(a.data(), 3) == 14.0);
    CHECK(knl::scalar::dist2(a.data(), b.data(), 3) == 27.0);
}
