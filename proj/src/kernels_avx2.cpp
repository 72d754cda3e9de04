#include "delaykit/kernels.hpp"

#if defined(DELAYKIT_HAVE_AVX2_TU)

#include <immintrin.h>
#include <limits>

namespace delaykit::knl::avx2 {

namespace {

inline double hadd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hadd(acc) + tail;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i];
    return hadd(acc) + tail;
}

double sumsq(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * a[i];
    return hadd(acc) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dist2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return hadd(acc) + tail;
}

void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy)));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first) {
    const __m256d vq = _mm256_set1_pd(q);
    std::size_t i = 0;
    if (first) {
        for (; i + 4 <= n; i += 4) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(c + i), vq);
            _mm256_storeu_pd(out + i, _mm256_mul_pd(d, d));
        }
        for (; i < n; ++i) {
            const double d = c[i] - q;
            out[i] = d * d;
        }
    } else {
        for (; i + 4 <= n; i += 4) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(c + i), vq);
            _mm256_storeu_pd(out + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(out + i)));
        }
        for (; i < n; ++i) {
            const double d = c[i] - q;
            out[i] += d * d;
        }
    }
}


std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out) {
    const __m256d vfloor = _mm256_set1_pd(floor_val);
    __m256d vbest = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d vidx = _mm256_set1_pd(static_cast<double>(n));
    __m256d vcur = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d vfour = _mm256_set1_pd(4.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_max_pd(
            _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)), vfloor);
        // strict less keeps the first occurrence within each lane
        const __m256d lt = _mm256_cmp_pd(m, vbest, _CMP_LT_OQ);
        vbest = _mm256_blendv_pd(vbest, m, lt);
        vidx = _mm256_blendv_pd(vidx, vcur, lt);
        vcur = _mm256_add_pd(vcur, vfour);
    }
    double best[4], idx[4];
    _mm256_storeu_pd(best, vbest);
    _mm256_storeu_pd(idx, vidx);
    double out = std::numeric_limits<double>::infinity();
    double out_i = static_cast<double>(n);
    for (int k = 0; k < 4; ++k) {
        if (best[k] < out || (best[k] == out && idx[k] < out_i)) {
            out = best[k];
            out_i = idx[k];
        }
    }
    std::size_t best_i = static_cast<std::size_t>(out_i);
    for (; i < n; ++i) {
        double m = a[i] > b[i] ? a[i] : b[i];
        if (m < floor_val) m = floor_val;
        if (m < out) {
            out = m;
            best_i = i;
        }
    }
    min_out = out;
    return out == std::numeric_limits<double>::infinity() ? n : best_i;
}

}  // namespace delaykit::knl::avx2

#endif  // DELAYKIT_HAVE_AVX2_TU
